"""
Layered circuits for one-dimensional QCA: advection and scattering layers,
concatenation, cell constructions, and state-vector simulation.

Advection sign convention: with offsets ``(e_1, ..., e_d)`` the new content of
site ``(x, j)`` is the old content of site ``(x + e_j, j)``, cells taken mod N.
Layers are stored in time order, so the evolution ``S2 s2 S1 s1`` is the list
``[s1, S1, s2, S2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .lattice import Lattice, Site
from .linalg import as_matrix, is_unitary
from .errors import ProblemTooLarge

DENSE_CAP = 4096
UNITARY_TOL = 1e-10

SQRT_HALF = 1 / math.sqrt(2)


def symmetric_scattering_matrix() -> np.ndarray:
    """The symmetric two-qubit scattering matrix fixing |00> used by the example QCA."""
    h = SQRT_HALF
    return np.array(
        [
            [1, 0, 0, 0],
            [0, h, 1j * h, 0],
            [0, 1j * h, h, 0],
            [0, 0, 0, 1j],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class AdvectionLayer:
    """
    Translation-invariant permutation of subcell contents.

    ``offsets[j-1]`` is the cell offset for subcell ``j``. ``sources`` is only
    set for the generalized layers produced by :func:`regroup`: new content of
    ``(x, j)`` is then the old content of ``(x + e_j, sources[j-1])``.
    """

    offsets: tuple
    sources: tuple = None

    def __post_init__(self):
        offsets = tuple(int(e) for e in self.offsets)
        object.__setattr__(self, "offsets", offsets)
        if self.sources is not None:
            sources = tuple(int(s) for s in self.sources)
            if sorted(sources) != list(range(1, len(offsets) + 1)):
                raise ValueError(f"sources {sources} is not a permutation of 1..{len(offsets)}")
            if sources == tuple(range(1, len(offsets) + 1)):
                sources = None
            object.__setattr__(self, "sources", sources)

    @property
    def n_subcells(self) -> int:
        return len(self.offsets)

    def source_of(self, j: int) -> int:
        return j if self.sources is None else self.sources[j - 1]

    @property
    def is_identity(self) -> bool:
        return self.sources is None and not any(self.offsets)

    def then(self, later: "AdvectionLayer") -> "AdvectionLayer":
        """Single layer equal to applying ``self`` and then ``later``."""
        if later.n_subcells != self.n_subcells:
            raise ValueError("advection layers act on different subcell counts")
        d = self.n_subcells
        offsets = []
        sources = []
        for j in range(1, d + 1):
            k = later.source_of(j)
            offsets.append(later.offsets[j - 1] + self.offsets[k - 1])
            sources.append(self.source_of(k))
        return AdvectionLayer(tuple(offsets), tuple(sources))

    def inverse(self) -> "AdvectionLayer":
        d = self.n_subcells
        offsets = [0] * d
        sources = [0] * d
        for j in range(1, d + 1):
            k = self.source_of(j)
            offsets[k - 1] = -self.offsets[j - 1]
            sources[k - 1] = j
        return AdvectionLayer(tuple(offsets), tuple(sources))

    def site_map(self, site: Site, lattice: Lattice) -> Site:
        """Old site whose content lands on ``site``."""
        j = site.subcell
        return Site((site.cell + self.offsets[j - 1]) % lattice.n_cells, self.source_of(j))


@dataclass(frozen=True)
class ScatteringLayer:
    """
    Unitary ``s`` applied simultaneously in every cell.

    ``subcells`` (1-based, ascending) restricts the action to part of each
    cell; ``None`` means the whole cell.
    """

    s: np.ndarray
    subcells: tuple = None

    def __post_init__(self):
        s = as_matrix(self.s).copy()
        if s.shape[0] != s.shape[1]:
            raise ValueError(f"scattering matrix must be square, got {s.shape}")
        if not is_unitary(s, UNITARY_TOL):
            raise ValueError("scattering matrix is not unitary")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        if self.subcells is not None:
            sub = tuple(int(j) for j in self.subcells)
            if list(sub) != sorted(set(sub)):
                raise ValueError("subcells must be strictly ascending")
            object.__setattr__(self, "subcells", sub)

    def acting_subcells(self, n_subcells: int) -> tuple:
        return tuple(range(1, n_subcells + 1)) if self.subcells is None else self.subcells


Layer = Union[AdvectionLayer, ScatteringLayer]


def _check_layer(layer, lattice: Lattice):
    d = lattice.cell.n_subcells
    dims = lattice.cell.subcell_dims
    if isinstance(layer, AdvectionLayer):
        if layer.n_subcells != d:
            raise ValueError(f"advection has {layer.n_subcells} offsets, cell has {d} subcells")
        for j in range(1, d + 1):
            if dims[layer.source_of(j) - 1] != dims[j - 1]:
                raise ValueError("advection moves content between subcells of different dimension")
    elif isinstance(layer, ScatteringLayer):
        sub = layer.acting_subcells(d)
        if sub[-1] > d or sub[0] < 1:
            raise ValueError(f"scattering subcells {sub} out of range 1..{d}")
        side = math.prod(dims[j - 1] for j in sub)
        if layer.s.shape[0] != side:
            raise ValueError(f"scattering matrix side {layer.s.shape[0]} != {side}")
    else:
        raise TypeError(f"unknown layer type {type(layer).__name__}")


@dataclass(frozen=True)
class Circuit:
    lattice: Lattice
    layers: tuple = ()

    def __post_init__(self):
        layers = tuple(self.layers)
        for layer in layers:
            _check_layer(layer, self.lattice)
        object.__setattr__(self, "layers", layers)

    def __len__(self):
        return len(self.layers)

    def with_cells(self, n_cells: int) -> "Circuit":
        return Circuit(self.lattice.with_cells(n_cells), self.layers)

    def inverse(self) -> "Circuit":
        out = []
        for layer in reversed(self.layers):
            if isinstance(layer, AdvectionLayer):
                out.append(layer.inverse())
            else:
                out.append(ScatteringLayer(layer.s.conj().T, layer.subcells))
        return Circuit(self.lattice, out)

    def reach(self) -> int:
        """Upper bound on how many cells a site can move over one application."""
        return sum(
            max(abs(e) for e in layer.offsets)
            for layer in self.layers
            if isinstance(layer, AdvectionLayer)
        )

    def scattering_layers(self):
        return [layer for layer in self.layers if isinstance(layer, ScatteringLayer)]


@dataclass(frozen=True)
class CellConstruction:
    """Per-subcell shift ``c_j`` followed by grouping ``m`` adjacent cells."""

    shift_offsets: tuple
    group: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shift_offsets", tuple(int(c) for c in self.shift_offsets))
        if int(self.group) < 1:
            raise ValueError("group must be >= 1")
        object.__setattr__(self, "group", int(self.group))

    @property
    def is_identity(self) -> bool:
        return self.group == 1 and not any(self.shift_offsets)

    def label(self) -> str:
        return f"shift=({','.join(f'{c:+d}' if c else '0' for c in self.shift_offsets)}) m={self.group}"


def identity_construction(n_subcells: int) -> CellConstruction:
    return CellConstruction((0,) * n_subcells, 1)


@dataclass
class StateVector:
    lattice: Lattice
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != self.lattice.dim:
            raise ValueError(f"expected {self.lattice.dim} amplitudes, got {amps.size}")
        self.amplitudes = amps

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(_site_dims(self.lattice))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, lattice: Lattice, digits) -> "StateVector":
        """Computational basis state from one digit per site, in canonical site order."""
        digits = [int(b) for b in digits]
        dims = _site_dims(lattice)
        if len(digits) != len(dims):
            raise ValueError(f"need {len(dims)} site digits, got {len(digits)}")
        for b, d in zip(digits, dims):
            if not 0 <= b < d:
                raise ValueError(f"digit {b} out of range for a site of dimension {d}")
        amps = np.zeros(lattice.dim, dtype=complex)
        amps[np.ravel_multi_index(digits, dims)] = 1.0
        return cls(lattice, amps)

    @classmethod
    def single_excitation(cls, lattice: Lattice, cell=None) -> "StateVector":
        """Every subcell of one cell at its top level, every other site at 0."""
        cell = lattice.n_cells // 2 if cell is None else cell % lattice.n_cells
        digits = [0] * lattice.n_sites
        for j, d in enumerate(lattice.cell.subcell_dims, start=1):
            digits[lattice.site_index(Site(cell, j))] = d - 1
        return cls.basis(lattice, digits)


def _site_dims(lattice: Lattice) -> list:
    return list(lattice.cell.subcell_dims) * lattice.n_cells


def _advect_tensor(t: np.ndarray, lattice: Lattice, layer: AdvectionLayer) -> np.ndarray:
    n_sites = lattice.n_sites
    perm = [lattice.site_index(layer.site_map(s, lattice)) for s in lattice.all_sites()]
    perm += list(range(n_sites, t.ndim))
    return t.transpose(perm)


def _scatter_tensor(t: np.ndarray, lattice: Lattice, layer: ScatteringLayer) -> np.ndarray:
    sub = layer.acting_subcells(lattice.cell.n_subcells)
    dims = [lattice.cell.subcell_dims[j - 1] for j in sub]
    k = len(sub)
    gate = layer.s.reshape(dims + dims)
    for x in range(lattice.n_cells):
        axes = [lattice.site_index(Site(x, j)) for j in sub]
        t = np.tensordot(gate, t, axes=(list(range(k, 2 * k)), axes))
        t = np.moveaxis(t, list(range(k)), axes)
    return t


def _apply_layer_tensor(t, lattice, layer):
    if isinstance(layer, AdvectionLayer):
        return _advect_tensor(t, lattice, layer)
    return _scatter_tensor(t, lattice, layer)


def apply_advection(state: StateVector, layer: AdvectionLayer) -> StateVector:
    _check_layer(layer, state.lattice)
    t = _advect_tensor(state.tensor(), state.lattice, layer)
    return StateVector(state.lattice, np.ascontiguousarray(t).ravel())


def apply_scattering(state: StateVector, layer: ScatteringLayer) -> StateVector:
    _check_layer(layer, state.lattice)
    t = _scatter_tensor(state.tensor(), state.lattice, layer)
    return StateVector(state.lattice, np.ascontiguousarray(t).ravel())


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if state.lattice != circuit.lattice:
        raise ValueError("state and circuit live on different lattices")
    t = state.tensor()
    for layer in circuit.layers:
        t = _apply_layer_tensor(t, circuit.lattice, layer)
    return StateVector(state.lattice, np.ascontiguousarray(t).ravel())


def simulate(state: StateVector, circuit: Circuit, steps: int) -> StateVector:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    for _ in range(steps):
        state = apply_circuit(state, circuit)
    return state


def cell_occupancy(state: StateVector) -> np.ndarray:
    """Probability, per cell, that the cell is not in its all-zero state."""
    lattice = state.lattice
    d = lattice.cell.cell_dim
    probs = (np.abs(state.amplitudes) ** 2).reshape([d] * lattice.n_cells)
    # summing the excited levels directly keeps empty cells at exactly zero
    return np.array([np.take(probs, range(1, d), axis=x).sum() for x in range(lattice.n_cells)])


def cell_population(state: StateVector) -> np.ndarray:
    """Expected number of subcells per cell that are not at level 0."""
    lattice = state.lattice
    probs = np.abs(state.tensor()) ** 2
    out = np.zeros(lattice.n_cells)
    for s in lattice.all_sites():
        levels = range(1, lattice.site_dim(s))
        out[s.cell] += np.take(probs, levels, axis=lattice.site_index(s)).sum()
    return out


def build_dense_evolution(circuit: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Full unitary of one application of the circuit; column k is the image of basis state k."""
    lattice = circuit.lattice
    dim = lattice.dim
    if dim > cap:
        raise ProblemTooLarge(f"global dimension {dim} exceeds the dense cap {cap}")
    t = np.eye(dim, dtype=complex).reshape(_site_dims(lattice) + [dim])
    for layer in circuit.layers:
        t = _apply_layer_tensor(t, lattice, layer)
    return np.ascontiguousarray(t).reshape(dim, dim)


def translation_matrix(lattice: Lattice, z: int = 1, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense translation taking the content of cell ``x + z`` to cell ``x``."""
    shift = AdvectionLayer((z,) * lattice.cell.n_subcells)
    return build_dense_evolution(Circuit(lattice, [shift]), cap)


def qlga(lattice: Lattice, offsets, s) -> Circuit:
    """Two-layer circuit: advection with ``offsets`` followed by cell-wise ``s``."""
    return Circuit(lattice, [AdvectionLayer(tuple(offsets)), ScatteringLayer(s)])


def concat(first: Circuit, second: Circuit) -> Circuit:
    if first.lattice != second.lattice:
        raise ValueError("cannot concatenate circuits on different lattices")
    return Circuit(first.lattice, first.layers + second.layers)


def two_qlga_circuit(lattice: Lattice, s1, s2, offsets1=(0, -1), offsets2=(1, 0)) -> Circuit:
    """Concatenation of the QLGA (offsets1, s1) followed by (offsets2, s2)."""
    return concat(qlga(lattice, offsets1, s1), qlga(lattice, offsets2, s2))


def merge_advections(layers) -> list:
    """Fuse runs of adjacent advection layers; drop identity advections and identity scatterings."""
    out = []
    for layer in layers:
        if isinstance(layer, ScatteringLayer) and np.array_equal(layer.s, np.eye(layer.s.shape[0])):
            continue
        if isinstance(layer, AdvectionLayer) and out and isinstance(out[-1], AdvectionLayer):
            layer = out.pop().then(layer)
        out.append(layer)
    return [layer for layer in out if not (isinstance(layer, AdvectionLayer) and layer.is_identity)]


def _group_layer(layer, d: int, m: int) -> list:
    if isinstance(layer, AdvectionLayer):
        offsets, sources = [], []
        for i in range(m):
            for j in range(1, d + 1):
                t = i + layer.offsets[j - 1]
                offsets.append(t // m)
                sources.append((t % m) * d + layer.source_of(j))
        return [AdvectionLayer(tuple(offsets), tuple(sources))]
    sub = layer.acting_subcells(d)
    return [ScatteringLayer(layer.s, tuple(i * d + j for j in sub)) for i in range(m)]


def regroup(circuit: Circuit, construction: CellConstruction) -> Circuit:
    """
    Express ``circuit`` over the cells of ``construction``.

    The constructed cell ``y`` holds the sites ``(m*y + i + c_j, j)`` for
    ``i = 0..m-1`` and ``j = 1..d``, ordered by ``(i, j)``. The result's dense
    evolution is ``P^dag U P`` with ``P = construction_permutation(...)``. A
    cell-wise scattering becomes ``m`` scattering layers, each acting on the
    subcells of one original cell.
    """
    lattice = circuit.lattice
    d = lattice.cell.n_subcells
    m = construction.group
    if len(construction.shift_offsets) != d:
        raise ValueError(f"construction has {len(construction.shift_offsets)} shifts, cell has {d} subcells")
    if lattice.n_cells % m:
        raise ValueError(f"lattice of {lattice.n_cells} cells is not divisible by m={m}")
    if construction.is_identity:
        return circuit
    layers = list(circuit.layers)
    if any(construction.shift_offsets):
        shift = AdvectionLayer(construction.shift_offsets)
        unshift = shift.inverse()
        wrapped = []
        for layer in layers:
            wrapped += [unshift, layer, shift]
        layers = merge_advections(wrapped)
    if m == 1:
        return Circuit(lattice, layers)
    grouped = Lattice.of(lattice.n_cells // m, lattice.cell.subcell_dims * m)
    out = []
    for layer in layers:
        out += _group_layer(layer, d, m)
    return Circuit(grouped, out)


def construction_permutation(lattice: Lattice, construction: CellConstruction, cap: int = DENSE_CAP) -> np.ndarray:
    """Permutation ``P`` with ``P^dag U P`` the evolution over constructed cells."""
    shift = AdvectionLayer(construction.shift_offsets)
    r = build_dense_evolution(Circuit(lattice, [shift]), cap)
    return r.conj().T


def fixes_quiescent(circuit: Circuit, tol: float = 1e-10) -> bool:
    """True if every scattering matrix maps |0...0> to itself."""
    for layer in circuit.scattering_layers():
        col = layer.s[:, 0]
        target = np.zeros_like(col)
        target[0] = 1
        if np.max(np.abs(col - target)) > tol:
            return False
    return True
