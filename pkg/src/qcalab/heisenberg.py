"""
Heisenberg-picture conjugation of local operators through a circuit.

Operators are carried on the smallest window of sites they act on. An
advection layer only relabels sites. A scattering layer first widens the
window to every scattered subcell of each cell it touches, then conjugates.
Identity tensor factors are trimmed after every scattering layer so windows
stay small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SupportCapExceeded
from .lattice import Lattice, Site, Window, embed_operator, tensor_permute
from .linalg import as_matrix
from .qca import AdvectionLayer, Circuit, ScatteringLayer

DEFAULT_SITE_CAP = 12
TRIM_TOL = 1e-9

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class LocalOperator:
    lattice: Lattice
    window: Window
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        side = self.window.dimension(self.lattice)
        if m.shape != (side, side):
            raise ValueError(f"matrix shape {m.shape} does not match window dimension {side}")
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple:
        return self.window.dims(self.lattice)

    def cells(self) -> tuple:
        return self.window.cells()

    def adjoint(self) -> "LocalOperator":
        return LocalOperator(self.lattice, self.window, self.matrix.conj().T)

    def embed(self, into: Window) -> np.ndarray:
        return embed_operator(self.matrix, self.window, into, self.lattice)

    def to_global(self) -> np.ndarray:
        """Dense matrix on the whole lattice, canonical site order."""
        return self.embed(Window(self.lattice.all_sites()))


@dataclass(frozen=True)
class NeighborhoodReport:
    forward: frozenset
    backward: frozenset

    @property
    def reversible(self) -> bool:
        return self.backward == frozenset(-k for k in self.forward)

    def sorted_forward(self) -> list:
        return sorted(self.forward)

    def sorted_backward(self) -> list:
        return sorted(self.backward)


def cell_operator(lattice: Lattice, cell: int, matrix, subcells=None) -> LocalOperator:
    return LocalOperator(lattice, Window(lattice.cell_sites(cell, subcells)), matrix)


def matrix_units(d: int):
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1.0
            yield e


def _is_identity_factor(t: np.ndarray, p: int, n: int, d: int, tol: float) -> np.ndarray:
    """Reduced tensor if factor ``p`` is the identity within ``tol``, else ``None``."""
    moved = np.moveaxis(t, [p, n + p], [-2, -1])
    # cheap rejections before the full comparison
    if np.max(np.abs(moved[..., 0, 1])) > tol or np.max(np.abs(moved[..., 0, 0] - moved[..., 1, 1])) > tol:
        return None
    reduced = np.trace(moved, axis1=-2, axis2=-1) / d
    if np.max(np.abs(moved - reduced[..., None, None] * np.eye(d))) > tol:
        return None
    return reduced


def _trim(t: np.ndarray, sites: list, dims: list, tol: float, candidates=None):
    """Drop identity tensor factors; returns the reduced tensor and the kept sites."""
    scale = max(1.0, float(np.max(np.abs(t)))) if t.size else 1.0
    p = 0
    while p < len(sites):
        if candidates is not None and sites[p] not in candidates:
            p += 1
            continue
        reduced = _is_identity_factor(t, p, len(sites), dims[p], tol * scale)
        if reduced is None:
            p += 1
        else:
            t = reduced
            del sites[p]
            del dims[p]
    return t, sites, dims


def trim_support(op: LocalOperator, tol: float = TRIM_TOL) -> LocalOperator:
    """Remove every site on which ``op`` acts as the identity."""
    sites = list(op.window.sites)
    dims = list(op.dims)
    t = op.matrix.reshape(dims + dims) if sites else op.matrix
    t, sites, dims = _trim(t, sites, dims, tol)
    side = int(np.prod(dims, dtype=int))
    return LocalOperator(op.lattice, Window(tuple(sites)), t.reshape(side, side))


def _apply_left(t, gate, positions, k):
    t = np.tensordot(gate, t, axes=(list(range(k, 2 * k)), positions))
    return np.moveaxis(t, list(range(k)), positions)


def _apply_right(t, gate, positions, k):
    n2 = t.ndim
    t = np.tensordot(t, gate, axes=(positions, list(range(k))))
    return np.moveaxis(t, list(range(n2 - k, n2)), positions)


class _Work:
    """Mutable tensor form of a local operator during conjugation."""

    def __init__(self, op: LocalOperator):
        self.lattice = op.lattice
        self.sites = list(op.window.sites)
        self.dims = list(op.dims)
        self.t = op.matrix.reshape(self.dims + self.dims) if self.sites else op.matrix.reshape(())

    def relabel(self, mapping):
        new_sites = [mapping(s) for s in self.sites]
        order = sorted(range(len(new_sites)), key=lambda i: new_sites[i])
        self.t = tensor_permute(self.t, order, len(order))
        self.sites = [new_sites[i] for i in order]
        self.dims = [self.lattice.site_dim(s) for s in self.sites]

    def widen(self, extra, cap):
        extra = [s for s in extra if s not in set(self.sites)]
        if not extra:
            return
        if len(self.sites) + len(extra) > cap:
            raise SupportCapExceeded(
                f"operator support would grow to {len(self.sites) + len(extra)} sites (cap {cap})"
            )
        n = len(self.sites)
        extra_dims = [self.lattice.site_dim(s) for s in extra]
        big = self.t
        for d in extra_dims:
            big = np.multiply.outer(big, np.eye(d))
        # axes now: out(n), in(n), then (out, in) pairs of the extra sites
        e = len(extra)
        out_axes = list(range(n)) + [2 * n + 2 * i for i in range(e)]
        in_axes = list(range(n, 2 * n)) + [2 * n + 2 * i + 1 for i in range(e)]
        order_sites = self.sites + extra
        order = sorted(range(n + e), key=lambda i: order_sites[i])
        big = big.transpose([out_axes[i] for i in order] + [in_axes[i] for i in order])
        self.sites = [order_sites[i] for i in order]
        self.dims = [self.lattice.site_dim(s) for s in self.sites]
        self.t = big

    def conjugate_cell(self, left, right, positions):
        k = len(positions)
        n = len(self.sites)
        self.t = _apply_left(self.t, left, positions, k)
        self.t = _apply_right(self.t, right, [n + p for p in positions], k)

    def trim(self, tol, candidates=None):
        self.t, self.sites, self.dims = _trim(self.t, self.sites, self.dims, tol, candidates)

    def result(self) -> LocalOperator:
        side = int(np.prod(self.dims, dtype=int))
        return LocalOperator(self.lattice, Window(tuple(self.sites)), self.t.reshape(side, side))


def _scatter(work: _Work, layer: ScatteringLayer, direction: str, cap: int) -> set:
    """Conjugate by one scattering layer; returns the sites it acted on."""
    lattice = work.lattice
    sub = layer.acting_subcells(lattice.cell.n_subcells)
    touched = sorted({s.cell for s in work.sites if s.subcell in sub})
    if not touched:
        return set()
    work.widen([Site(x, j) for x in touched for j in sub], cap)
    dims = [lattice.cell.subcell_dims[j - 1] for j in sub]
    s = layer.s
    sd = s.conj().T
    if direction == FORWARD:
        left, right = sd, s
    else:
        left, right = s, sd
    left = left.reshape(dims + dims)
    right = right.reshape(dims + dims)
    for x in touched:
        positions = [work.sites.index(Site(x, j)) for j in sub]
        work.conjugate_cell(left, right, positions)
    return {Site(x, j) for x in touched for j in sub}


def conjugate_through(
    op: LocalOperator,
    circuit: Circuit,
    direction: str = FORWARD,
    cap: int = DEFAULT_SITE_CAP,
    tol: float = TRIM_TOL,
) -> LocalOperator:
    """
    ``G^dag op G`` (forward) or ``G op G^dag`` (backward) for the circuit's one-step evolution ``G``.

    Under ``G^dag (.) G`` an advection sends an operator on site ``(x, j)`` to
    the site ``(x + e_j, j)`` whose content it receives.
    """
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be '{FORWARD}' or '{BACKWARD}'")
    if op.lattice != circuit.lattice:
        raise ValueError("operator and circuit live on different lattices")
    lattice = circuit.lattice
    work = _Work(op)
    layers = reversed(circuit.layers) if direction == FORWARD else circuit.layers
    for layer in layers:
        if isinstance(layer, AdvectionLayer):
            if direction == FORWARD:
                work.relabel(lambda s, layer=layer: layer.site_map(s, lattice))
            else:
                inv = layer.inverse()
                work.relabel(lambda s, inv=inv: inv.site_map(s, lattice))
        else:
            # conjugation elsewhere cannot create or destroy an identity factor
            acted = _scatter(work, layer, direction, cap)
            work.trim(tol, acted)
    work.trim(tol)
    return work.result()


def support_offsets(op: LocalOperator, origin: int) -> set:
    """Cells of the operator's support as offsets from ``origin``."""
    return {op.lattice.relative_offset(x, origin) for x in op.cells()}


def cell_algebra_images(circuit: Circuit, cell: int = 0, direction: str = FORWARD, cap=DEFAULT_SITE_CAP, tol=TRIM_TOL):
    """Conjugated images of every matrix unit of one cell, in row-major unit order."""
    lattice = circuit.lattice
    d = lattice.cell.cell_dim
    return [
        conjugate_through(cell_operator(lattice, cell, e), circuit, direction, cap, tol)
        for e in matrix_units(d)
    ]


def site_generator_images(circuit: Circuit, cell: int = 0, direction: str = FORWARD, cap=DEFAULT_SITE_CAP, tol=TRIM_TOL):
    """
    Conjugated images of the single-site matrix units of one cell.

    These generate the cell algebra, and the support of a sum or product is
    inside the union of the supports, so they give the same support union as a
    full operator basis of the cell at a fraction of the cost.
    """
    lattice = circuit.lattice
    out = []
    for site in lattice.cell_sites(cell):
        for e in matrix_units(lattice.site_dim(site)):
            op = LocalOperator(lattice, Window((site,)), e)
            out.append(conjugate_through(op, circuit, direction, cap, tol))
    return out


def minimal_neighborhood(circuit: Circuit, cell: int = 0, cap=DEFAULT_SITE_CAP, tol=TRIM_TOL) -> NeighborhoodReport:
    """Forward and backward cell supports of the image of one cell's algebra."""
    sets = {}
    for direction in (FORWARD, BACKWARD):
        offsets = set()
        for img in site_generator_images(circuit, cell, direction, cap, tol):
            offsets |= support_offsets(img, cell)
        sets[direction] = frozenset(offsets) if offsets else frozenset({0})
    return NeighborhoodReport(sets[FORWARD], sets[BACKWARD])


def supports_within(circuit: Circuit, neighborhood, cell: int = 0, cap=DEFAULT_SITE_CAP, tol=TRIM_TOL) -> bool:
    """Check both directions of structural reversibility for the algebra of ``cell``."""
    fwd = set(neighborhood)
    bwd = {-k for k in fwd}
    for img in site_generator_images(circuit, cell, FORWARD, cap, tol):
        if not support_offsets(img, cell) <= fwd:
            return False
    for img in site_generator_images(circuit, cell, BACKWARD, cap, tol):
        if not support_offsets(img, cell) <= bwd:
            return False
    return True


def dense_conjugate(u: np.ndarray, a: np.ndarray, direction: str = FORWARD) -> np.ndarray:
    if direction == FORWARD:
        return u.conj().T @ a @ u
    return u @ a @ u.conj().T
