"""Brute-force oracles shared by the tests. Everything here works on dense global matrices."""

from pathlib import Path

import numpy as np

from qcalab.lattice import Lattice, Site
from qcalab.qca import symmetric_scattering_matrix, two_qlga_circuit

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
S = symmetric_scattering_matrix()
I4 = np.eye(4, dtype=complex)

CIRCUITS = {
    "main": (S, S),
    "s1_identity": (I4, S),
    "s2_identity": (S, I4),
}


def example_circuit(name: str, n_cells: int):
    s1, s2 = CIRCUITS[name]
    return two_qlga_circuit(Lattice.of(n_cells, (2, 2)), s1, s2)


def dense_local_dim(u, lattice, source_sites, target_sites, tol=1e-9) -> int:
    """
    Dimension of the operators A on ``source_sites`` with ``u^dag (A x I) u = B x I``, B on ``target_sites``.

    Works straight from the global unitary: for matrix units E on the source,
    the normalised partial trace of ``u^dag E u`` onto the target is read off
    a single contraction of ``u`` with its conjugate.
    """
    n = lattice.n_sites
    dims = [lattice.site_dim(Site(x, j)) for x in range(lattice.n_cells) for j in range(1, lattice.cell.n_subcells + 1)]

    def idx(s):
        return lattice.site_index(Site(s[0] % lattice.n_cells, s[1]))

    src = [idx(s) for s in source_sites]
    tgt = [idx(s) for s in target_sites]
    g = u.reshape(dims + dims)
    rest_out = [a for a in range(n) if a not in src]
    rest_in = [n + a for a in range(n) if a not in tgt]
    g = g.transpose(src + [n + t for t in tgt] + rest_out + rest_in)
    ds = int(np.prod([dims[a] for a in src]))
    dt = int(np.prod([dims[a] for a in tgt]))
    g = g.reshape(ds * dt, -1)
    k = (g.conj() @ g.T).reshape(ds, dt, ds, dt).transpose(0, 2, 1, 3) / (u.shape[0] // dt)
    p = k.reshape(ds * ds, dt * dt).T
    gram = np.eye(ds * ds) - p.conj().T @ p
    s = np.linalg.svd(gram, compute_uv=False)
    return int(np.sum(s <= tol * max(1.0, s[0])))


def constructed_cell(y: int, shift, m: int, n_subcells: int = 2):
    """Original-lattice sites of constructed cell ``y``: ``(m*y + i + c_j, j)``."""
    return [(m * y + i + shift[j - 1], j) for i in range(m) for j in range(1, n_subcells + 1)]


def random_operator(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


ACCEPTANCE_LINES = {}


def record_criterion(number: int, passed: bool, detail: str):
    """Remember and print one pass/fail line; the terminal summary repeats them all."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
