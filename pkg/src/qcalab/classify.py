"""
Decide whether a QCA circuit admits a lattice-gas (particle) description
under a given cell construction.

For target cell ``y`` and each neighborhood offset ``k``, the intersection
algebra ``D[k]`` collects the operators in the image of cell ``y - k`` that
act on cell ``y`` alone. The circuit is a lattice gas under the construction
exactly when ordered products of the ``D[k]`` span the full algebra of cell
``y``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .heisenberg import (
    DEFAULT_SITE_CAP,
    NeighborhoodReport,
    cell_algebra_images,
    minimal_neighborhood,
)
from .lattice import Window, embed_operator
from .linalg import DEFAULT_TOL, Subspace
from .qca import CellConstruction, Circuit, regroup

QLGA = "QLGA"
NOT_QLGA = "NotQLGA"
MIN_CONSTRUCTED_CELLS = 5


@dataclass(frozen=True)
class IntersectionAlgebra:
    source: int
    target: int
    offset: int
    basis: Subspace
    matrices: tuple

    @property
    def dim(self) -> int:
        return self.basis.dim

    def contains_identity(self, tol=1e-9) -> bool:
        d = int(math.isqrt(self.basis.ambient_dim))
        return self.basis.contains(np.eye(d).ravel(), tol)

    def adjoint_closed(self, tol=1e-9) -> bool:
        return all(self.basis.contains(m.conj().T.ravel(), tol) for m in self.matrices)


def intersection_algebra(
    circuit: Circuit,
    offset: int,
    target: int = 0,
    tol: float = DEFAULT_TOL,
    cap: int = DEFAULT_SITE_CAP,
    images=None,
) -> IntersectionAlgebra:
    """
    Operators of ``G^dag A_{target-offset} G`` that are local upon cell ``target``.

    Each conjugated matrix unit M_i is projected onto the operators of the
    form ``B (x) I`` with ``B`` on the target cell; that projection is
    ``P_i (x) I`` with ``P_i`` the normalised partial trace. Because the M_i
    are orthonormal, a combination ``sum c_i M_i`` is local on the target
    exactly when ``c`` is in the nullspace of ``I - P^dag P``.

    ``images`` may carry precomputed forward images of the source cell's
    matrix units, as returned by :func:`cell_algebra_images`.
    """
    lattice = circuit.lattice
    source = (target - offset) % lattice.n_cells
    target_window = Window(lattice.cell_sites(target))
    target_set = set(target_window.sites)
    d = lattice.cell.cell_dim
    columns = []
    if images is None:
        images = cell_algebra_images(circuit, source, cap=cap, tol=tol)
    for img in images:
        sites = img.window.sites
        dims = img.dims
        keep = [p for p, s in enumerate(sites) if s in target_set]
        traced = math.prod(dims[p] for p in range(len(sites)) if p not in keep)
        reduced = linalg.partial_trace(img.matrix, dims, keep) / traced if sites else img.matrix
        kept = Window(tuple(sites[p] for p in keep))
        columns.append(embed_operator(reduced, kept, target_window, lattice).ravel())
    p = np.stack(columns, axis=1)
    gram = np.eye(p.shape[1]) - p.conj().T @ p
    _, null = linalg.rank_and_nullspace(gram, tol, scale=1.0)
    basis = linalg.span(p @ null.basis, tol) if null.dim else linalg.span([], tol, ambient_dim=d * d)
    matrices = tuple(basis.basis[:, i].reshape(d, d) for i in range(basis.dim))
    return IntersectionAlgebra(source, target, offset, basis, matrices)


def factorization_pretest(cell_dim: int, neighborhood_size: int) -> bool:
    """True iff ``cell_dim`` is a product of ``neighborhood_size`` integers, each at least 2."""
    if cell_dim < 2 or neighborhood_size < 1:
        raise ValueError("need cell_dim >= 2 and neighborhood_size >= 1")
    n = cell_dim
    count = 0
    f = 2
    while f * f <= n:
        while n % f == 0:
            n //= f
            count += 1
        f += 1
    if n > 1:
        count += 1
    return count >= neighborhood_size


def product_span(algebras, tol: float = DEFAULT_TOL) -> Subspace:
    """Span of all ordered products ``a_1 a_2 ... a_r`` with ``a_i`` drawn from the i-th basis."""
    d = algebras[0][0].shape[0]
    full = d * d
    current = [np.eye(d, dtype=complex)]
    sub = linalg.span([current[0].ravel()], tol)
    for basis in algebras:
        q = np.zeros((full, 0), dtype=complex)
        for a in current:
            block = np.stack([(a @ b).ravel() for b in basis], axis=1)
            q = linalg.span(np.hstack([q, block]), tol).basis
            if q.shape[1] == full:
                break
        sub = Subspace(full, q, tol)
        current = [q[:, i].reshape(d, d) for i in range(q.shape[1])]
    return sub


@dataclass
class CriterionReport:
    construction: CellConstruction
    neighborhood: tuple
    backward: tuple
    cell_dim: int
    n_cells: int
    pretest: bool
    verdict: str
    d_dims: dict = None
    product_span_dim: int = None
    reversed_span_dim: int = None
    subcell_dims: list = None
    anomalies: list = field(default_factory=list)

    @property
    def cell_alg_dim(self) -> int:
        return self.cell_dim * self.cell_dim

    @property
    def is_qlga(self) -> bool:
        return self.verdict == QLGA

    def to_dict(self) -> dict:
        return {
            "shift": list(self.construction.shift_offsets),
            "m": self.construction.group,
            "neighborhood": list(self.neighborhood),
            "backward_neighborhood": list(self.backward),
            "cell_dim": self.cell_dim,
            "cell_alg_dim": self.cell_alg_dim,
            "n_constructed_cells": self.n_cells,
            "factorization_pretest": self.pretest,
            "d_dims": None if self.d_dims is None else {str(k): v for k, v in sorted(self.d_dims.items())},
            "product_span_dim": self.product_span_dim,
            "reversed_span_dim": self.reversed_span_dim,
            "verdict": self.verdict,
            "subcell_dims": self.subcell_dims,
            "anomalies": list(self.anomalies),
        }


def constructed_cells_needed(circuit: Circuit, construction: CellConstruction) -> int:
    """Constructed-cell count keeping every support clear of the periodic wrap."""
    reach = circuit.reach() + 2 * max((abs(c) for c in construction.shift_offsets), default=0)
    return max(MIN_CONSTRUCTED_CELLS, 2 * reach + 3)


def qlga_criterion(
    circuit: Circuit,
    construction: CellConstruction,
    tol: float = DEFAULT_TOL,
    cap: int = DEFAULT_SITE_CAP,
    target: int = 0,
) -> CriterionReport:
    m = construction.group
    n_groups = constructed_cells_needed(circuit, construction)
    sized = circuit.with_cells(m * n_groups)
    grouped = regroup(sized, construction)
    nb: NeighborhoodReport = minimal_neighborhood(grouped, cell=target, cap=cap, tol=tol)
    hood = tuple(nb.sorted_forward())
    cell_dim = grouped.lattice.cell.cell_dim
    report = CriterionReport(
        construction=construction,
        neighborhood=hood,
        backward=tuple(nb.sorted_backward()),
        cell_dim=cell_dim,
        n_cells=n_groups,
        pretest=factorization_pretest(cell_dim, len(hood)),
        verdict=NOT_QLGA,
    )
    if not nb.reversible:
        report.anomalies.append("backward neighborhood is not the reflection of the forward one")
    if not report.pretest:
        return report

    # translation invariance: D for source y-k and target y equals D for source y and target y+k
    n = grouped.lattice.n_cells
    images = cell_algebra_images(grouped, target, cap=cap, tol=tol)
    algebras = {
        k: intersection_algebra(grouped, k, (target + k) % n, tol, cap, images=images) for k in hood
    }
    report.d_dims = {k: a.dim for k, a in algebras.items()}
    ordered = [list(algebras[k].matrices) for k in hood]
    report.product_span_dim = product_span(ordered, tol).dim
    report.reversed_span_dim = product_span(ordered[::-1], tol).dim
    if report.product_span_dim != report.reversed_span_dim:
        report.anomalies.append("product span depends on factor order")
    if report.product_span_dim == report.cell_alg_dim:
        report.verdict = QLGA
        dims = []
        for k in hood:
            root = math.isqrt(report.d_dims[k])
            if root * root != report.d_dims[k]:
                report.anomalies.append(f"dim D[{k}] = {report.d_dims[k]} is not a perfect square")
            dims.append(root)
        report.subcell_dims = dims
    return report


def default_shift_candidates(n_subcells: int):
    return [tuple(c) for c in itertools.product((-1, 0, 1), repeat=n_subcells)]


@dataclass
class ScanResult:
    reports: list

    @property
    def any_qlga(self) -> bool:
        return any(r.is_qlga for r in self.reports)

    @property
    def summary(self) -> str:
        hits = [r.construction.label() for r in self.reports if r.is_qlga]
        if not hits:
            return "no QLGA structure found among scanned constructions"
        return "QLGA structure found for: " + "; ".join(hits)

    @property
    def anomalies(self) -> list:
        return [(r.construction.label(), a) for r in self.reports for a in r.anomalies]


def scan_constructions(
    circuit: Circuit,
    max_m: int = 2,
    shift_candidates=None,
    tol: float = DEFAULT_TOL,
    cap: int = DEFAULT_SITE_CAP,
    extra=(),
) -> ScanResult:
    """Run :func:`qlga_criterion` for every (shift, m) with ``m <= max_m``, plus any ``extra`` constructions."""
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    d = circuit.lattice.cell.n_subcells
    shifts = default_shift_candidates(d) if shift_candidates is None else [tuple(s) for s in shift_candidates]
    constructions = [CellConstruction(s, m) for m in range(1, max_m + 1) for s in shifts]
    for c in extra:
        if c not in constructions:
            constructions.append(c)
    return ScanResult([qlga_criterion(circuit, c, tol, cap) for c in constructions])


@dataclass
class PropertyReport:
    trials: int
    seed: int
    ranks_right: list
    ranks_left: list
    identity_rank: int
    projector_rank_right: int
    projector_rank_left: int

    @property
    def rank1_hits(self) -> int:
        return sum(r == 1 for r in self.ranks_right) + sum(r == 1 for r in self.ranks_left)

    @staticmethod
    def _hist(ranks) -> dict:
        out = {}
        for r in ranks:
            out[r] = out.get(r, 0) + 1
        return dict(sorted(out.items()))

    @property
    def histogram_right(self) -> dict:
        return self._hist(self.ranks_right)

    @property
    def histogram_left(self) -> dict:
        return self._hist(self.ranks_left)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "rank1_hits": self.rank1_hits,
            "identity_rank": self.identity_rank,
            "projector_rank_right": self.projector_rank_right,
            "projector_rank_left": self.projector_rank_left,
            "histogram_right": {str(k): v for k, v in self.histogram_right.items()},
            "histogram_left": {str(k): v for k, v in self.histogram_left.items()},
        }


def _random_nonscalar(rng, d):
    while True:
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        if np.linalg.norm(a - np.trace(a) / d * np.eye(d)) > 1e-6:
            return a


def product_property_check(s, trials: int = 200, seed: int = 0, dims=(2, 2), tol: float = DEFAULT_TOL) -> PropertyReport:
    """
    Operator Schmidt rank of ``s^dag (I (x) A) s`` and ``s^dag (A (x) I) s`` for random non-scalar ``A``.

    Rank 1 means the conjugated operator is still a product.
    """
    s = linalg.as_matrix(s)
    da, db = dims
    if s.shape != (da * db, da * db):
        raise ValueError(f"scattering matrix must be {da * db}x{da * db}")
    sd = s.conj().T

    def right(a):
        return linalg.operator_schmidt_rank(sd @ np.kron(np.eye(da), a) @ s, da, db, tol)

    def left(a):
        return linalg.operator_schmidt_rank(sd @ np.kron(a, np.eye(db)) @ s, da, db, tol)

    rng = np.random.default_rng(seed)
    ranks_right, ranks_left = [], []
    for _ in range(trials):
        ranks_right.append(right(_random_nonscalar(rng, db)))
        ranks_left.append(left(_random_nonscalar(rng, da)))
    proj_b = np.zeros((db, db))
    proj_b[0, 0] = 1
    proj_a = np.zeros((da, da))
    proj_a[0, 0] = 1
    return PropertyReport(
        trials=trials,
        seed=seed,
        ranks_right=ranks_right,
        ranks_left=ranks_left,
        identity_rank=right(np.eye(db)),
        projector_rank_right=right(proj_b),
        projector_rank_left=left(proj_a),
    )
