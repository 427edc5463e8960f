"""
Sites, windows and cell structure on a periodic one-dimensional lattice.

A site is a pair ``(cell, subcell)`` with ``subcell`` counted from 1. All
operator matrices in the package are laid out with tensor factors in the
canonical site order: cell ascending, then subcell ascending, the first
factor being the most significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import as_matrix


@dataclass(frozen=True)
class CellStructure:
    subcell_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subcell_dims)
        if len(dims) < 1:
            raise ValueError("a cell needs at least one subcell")
        if any(d < 2 for d in dims):
            raise ValueError(f"subcell dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "subcell_dims", dims)

    @property
    def n_subcells(self) -> int:
        return len(self.subcell_dims)

    @property
    def cell_dim(self) -> int:
        return math.prod(self.subcell_dims)


class Site(NamedTuple):
    cell: int
    subcell: int


@dataclass(frozen=True)
class Lattice:
    n_cells: int
    cell: CellStructure

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("a lattice needs at least two cells")
        if not isinstance(self.cell, CellStructure):
            object.__setattr__(self, "cell", CellStructure(tuple(self.cell)))

    @classmethod
    def of(cls, n_cells, subcell_dims):
        return cls(int(n_cells), CellStructure(tuple(subcell_dims)))

    @property
    def n_sites(self) -> int:
        return self.n_cells * self.cell.n_subcells

    @property
    def dim(self) -> int:
        return self.cell.cell_dim ** self.n_cells

    def with_cells(self, n_cells: int) -> "Lattice":
        return Lattice(int(n_cells), self.cell)

    def site(self, cell, subcell) -> Site:
        if not 1 <= subcell <= self.cell.n_subcells:
            raise ValueError(f"subcell {subcell} out of range 1..{self.cell.n_subcells}")
        return Site(cell % self.n_cells, subcell)

    def site_dim(self, site: Site) -> int:
        return self.cell.subcell_dims[site.subcell - 1]

    def cell_sites(self, cell: int, subcells=None) -> tuple:
        subcells = range(1, self.cell.n_subcells + 1) if subcells is None else subcells
        return tuple(Site(cell % self.n_cells, j) for j in subcells)

    def all_sites(self) -> tuple:
        return tuple(
            Site(x, j) for x in range(self.n_cells) for j in range(1, self.cell.n_subcells + 1)
        )

    def site_index(self, site: Site) -> int:
        """Position of ``site`` in the canonical order of the full lattice."""
        return site.cell * self.cell.n_subcells + site.subcell - 1

    def relative_offset(self, cell: int, origin: int) -> int:
        """Cell offset ``cell - origin`` mapped into the symmetric range (-N/2, N/2]."""
        n = self.n_cells
        r = (cell - origin) % n
        return r - n if r > n // 2 else r


def translate(site: Site, z: int, lattice: Lattice) -> Site:
    return Site((site.cell + z) % lattice.n_cells, site.subcell)


@dataclass(frozen=True)
class Window:
    """Ordered set of distinct sites, kept in canonical order."""

    sites: tuple = ()

    def __post_init__(self):
        sites = tuple(sorted({Site(int(s[0]), int(s[1])) for s in self.sites}))
        object.__setattr__(self, "sites", sites)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site):
        return Site(*site) in set(self.sites)

    def index(self, site) -> int:
        return self.sites.index(Site(*site))

    def dims(self, lattice: Lattice) -> tuple:
        return tuple(lattice.site_dim(s) for s in self.sites)

    def dimension(self, lattice: Lattice) -> int:
        return math.prod(self.dims(lattice))

    def cells(self) -> tuple:
        return tuple(sorted({s.cell for s in self.sites}))

    def issubset(self, other: "Window") -> bool:
        return set(self.sites) <= set(other.sites)

    def without(self, sites) -> "Window":
        drop = {Site(*s) for s in sites}
        return Window(tuple(s for s in self.sites if s not in drop))


def window_union(a: Window, b: Window) -> Window:
    return Window(a.sites + b.sites)


def tensor_permute(t: np.ndarray, perm, n: int) -> np.ndarray:
    """Permute the tensor factors of an operator tensor with ``n`` output and ``n`` input axes."""
    perm = list(perm)
    return t.transpose(perm + [n + p for p in perm])


def embed_operator(op_matrix, from_window: Window, into_window: Window, lattice: Lattice) -> np.ndarray:
    """
    Extend an operator on ``from_window`` to ``into_window`` by identity factors.

    The result has its tensor factors in the canonical order of ``into_window``.
    """
    if not from_window.issubset(into_window):
        missing = sorted(set(from_window.sites) - set(into_window.sites))
        raise ValueError(f"sites {missing} are not in the target window")
    m = as_matrix(op_matrix)
    d_from = from_window.dimension(lattice)
    if m.shape != (d_from, d_from):
        raise ValueError(f"operator shape {m.shape} does not match window dimension {d_from}")
    extra = [s for s in into_window.sites if s not in set(from_window.sites)]
    d_extra = int(np.prod([lattice.site_dim(s) for s in extra], dtype=int))
    big = np.kron(m, np.eye(d_extra))
    order = list(from_window.sites) + extra
    dims = [lattice.site_dim(s) for s in order]
    n = len(order)
    if n == 0:
        return big
    t = big.reshape(dims + dims)
    perm = [order.index(s) for s in into_window.sites]
    d_into = into_window.dimension(lattice)
    return tensor_permute(t, perm, n).reshape(d_into, d_into)
