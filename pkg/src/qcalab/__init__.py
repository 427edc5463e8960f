"""Toolkit for one-dimensional quantum cellular automata and their lattice-gas structure."""

from .classify import (
    NOT_QLGA,
    QLGA,
    CriterionReport,
    factorization_pretest,
    intersection_algebra,
    product_property_check,
    product_span,
    qlga_criterion,
    scan_constructions,
)
from .config import CircuitConfig, load_config, parse_config
from .errors import AnomalyError, ConfigError, ProblemTooLarge, QcaError, SupportCapExceeded
from .heisenberg import LocalOperator, conjugate_through, minimal_neighborhood
from .lattice import CellStructure, Lattice, Site, Window
from .qca import (
    AdvectionLayer,
    CellConstruction,
    Circuit,
    ScatteringLayer,
    StateVector,
    build_dense_evolution,
    regroup,
    simulate,
    symmetric_scattering_matrix,
    two_qlga_circuit,
)

__version__ = "0.1.0"
