import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import I4, S, example_circuit, random_operator
from qcalab.errors import SupportCapExceeded
from qcalab.heisenberg import (
    BACKWARD,
    FORWARD,
    LocalOperator,
    cell_algebra_images,
    cell_operator,
    conjugate_through,
    dense_conjugate,
    minimal_neighborhood,
    support_offsets,
    supports_within,
    trim_support,
)
from qcalab.lattice import Lattice, Window
from qcalab.qca import AdvectionLayer, Circuit, ScatteringLayer, build_dense_evolution, qlga

NAMES = ["main", "s1_identity", "s2_identity"]
Z = np.diag([1, -1]).astype(complex)


@pytest.fixture(scope="module")
def dense5():
    out = {}
    for name in NAMES:
        c = example_circuit(name, 5)
        out[name] = (c, build_dense_evolution(c))
    return out


def test_conjugate_example_follows_dense_oracle():
    # Z on (0, 2) through the offsets (0, -1) advection: the dense oracle decides where it lands
    lat = Lattice.of(4, (2, 2))
    circuit = Circuit(lat, [AdvectionLayer((0, -1))])
    op = LocalOperator(lat, Window(((0, 2),)), Z)
    out = conjugate_through(op, circuit)
    u = build_dense_evolution(circuit)
    np.testing.assert_allclose(out.to_global(), dense_conjugate(u, op.to_global()), atol=1e-12)
    assert out.window.sites == ((3, 2),)


def test_identity_circuit_keeps_operator():
    lat = Lattice.of(4, (2, 2))
    rng = np.random.default_rng(0)
    op = cell_operator(lat, 1, random_operator(rng, 4))
    out = conjugate_through(op, Circuit(lat, [AdvectionLayer((0, 0)), ScatteringLayer(np.eye(4))]))
    assert out.window == op.window
    np.testing.assert_allclose(out.matrix, op.matrix, atol=1e-12)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("direction", [FORWARD, BACKWARD])
def test_oracle_equivalence_random_operators(dense5, name, direction):
    circuit, u = dense5[name]
    rng = np.random.default_rng(11)
    worst = 0.0
    for trial in range(50):
        cell = int(rng.integers(0, 5))
        op = cell_operator(circuit.lattice, cell, random_operator(rng, 4))
        local = conjugate_through(op, circuit, direction)
        dense = dense_conjugate(u, op.to_global(), direction)
        worst = max(worst, float(np.max(np.abs(local.to_global() - dense))))
    assert worst <= 1e-9


@pytest.mark.parametrize("name", NAMES)
def test_adjoint_and_product_preserved(name):
    circuit = example_circuit(name, 7)
    lat = circuit.lattice
    rng = np.random.default_rng(5)
    a = cell_operator(lat, 3, random_operator(rng, 4))
    b = LocalOperator(lat, Window(((4, 1),)), random_operator(rng, 2))
    ca, cb = conjugate_through(a, circuit), conjugate_through(b, circuit)
    np.testing.assert_allclose(conjugate_through(a.adjoint(), circuit).matrix, ca.adjoint().matrix, atol=1e-9)

    union = Window(tuple(set(ca.window.sites) | set(cb.window.sites)))
    ab = LocalOperator(lat, Window(tuple(set(a.window.sites) | set(b.window.sites))),
                       a.embed(Window(tuple(set(a.window.sites) | set(b.window.sites))))
                       @ b.embed(Window(tuple(set(a.window.sites) | set(b.window.sites)))))
    cab = conjugate_through(ab, circuit)
    np.testing.assert_allclose(cab.embed(union), ca.embed(union) @ cb.embed(union), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_trim_idempotent(seed):
    rng = np.random.default_rng(seed)
    lat = Lattice.of(5, (2, 2))
    op = cell_operator(lat, 2, np.kron(random_operator(rng, 2), np.eye(2)))
    wide = LocalOperator(lat, Window(lat.cell_sites(1) + lat.cell_sites(2)), op.embed(Window(lat.cell_sites(1) + lat.cell_sites(2))))
    once = trim_support(wide)
    twice = trim_support(once)
    assert once.window.sites == ((2, 1),)
    assert twice.window == once.window
    np.testing.assert_array_equal(twice.matrix, once.matrix)


def test_trim_scalar_operator():
    lat = Lattice.of(4, (2, 2))
    out = trim_support(cell_operator(lat, 0, 3 * np.eye(4)))
    assert len(out.window) == 0
    np.testing.assert_allclose(out.matrix, [[3]])


@pytest.mark.parametrize(
    "name,expect",
    [("main", [-1, 0, 1]), ("s1_identity", [-1, 1]), ("s2_identity", [-1, 0, 1])],
)
def test_minimal_neighborhood(name, expect):
    nb = minimal_neighborhood(example_circuit(name, 7), cell=3)
    assert nb.sorted_forward() == expect
    assert nb.sorted_backward() == sorted(-k for k in expect)
    assert nb.reversible


def test_neighborhood_of_trivial_circuit():
    lat = Lattice.of(5, (2, 2))
    nb = minimal_neighborhood(Circuit(lat, [AdvectionLayer((0, 0)), ScatteringLayer(np.eye(4))]))
    assert nb.sorted_forward() == [0]


@pytest.mark.parametrize("name", NAMES)
def test_neighborhood_translation_covariant(name):
    circuit = example_circuit(name, 7)
    assert minimal_neighborhood(circuit, cell=0) == minimal_neighborhood(circuit, cell=4)


@pytest.mark.parametrize("name", NAMES)
def test_generators_give_same_neighborhood_as_full_basis(name):
    circuit = example_circuit(name, 7)
    for direction in (FORWARD, BACKWARD):
        full = set()
        for img in cell_algebra_images(circuit, 3, direction):
            full |= support_offsets(img, 3)
        nb = minimal_neighborhood(circuit, cell=3)
        assert full == set(nb.forward if direction == FORWARD else nb.backward)


@pytest.mark.parametrize("name", NAMES)
def test_structural_reversibility(dense5, name):
    circuit, u = dense5[name]
    nb = minimal_neighborhood(circuit, cell=2)
    assert supports_within(circuit, nb.forward, cell=2)
    assert not supports_within(circuit, [0], cell=2)
    # every matrix unit, both directions, against the dense oracle
    for direction, allowed in ((FORWARD, nb.forward), (BACKWARD, {-k for k in nb.forward})):
        for img in cell_algebra_images(circuit, 2, direction):
            assert support_offsets(img, 2) <= set(allowed)


def test_support_cap():
    lat = Lattice.of(9, (2, 2))
    circuit = qlga(lat, (0, -1), S)
    for _ in range(3):
        circuit = Circuit(lat, circuit.layers * 2)
    op = cell_operator(lat, 4, np.kron(Z, Z))
    with pytest.raises(SupportCapExceeded):
        conjugate_through(op, circuit, cap=4)


def test_rejects_mismatched_lattices():
    op = cell_operator(Lattice.of(4, (2, 2)), 0, np.eye(4))
    with pytest.raises(ValueError):
        conjugate_through(op, example_circuit("main", 5))
    with pytest.raises(ValueError):
        conjugate_through(op, example_circuit("main", 4), direction="sideways")


def test_local_operator_shape_check():
    with pytest.raises(ValueError):
        LocalOperator(Lattice.of(4, (2, 2)), Window(((0, 1),)), np.eye(4))


def test_backward_inverts_forward():
    circuit = example_circuit("main", 7)
    rng = np.random.default_rng(3)
    op = cell_operator(circuit.lattice, 3, random_operator(rng, 4))
    there = conjugate_through(op, circuit, FORWARD)
    back = conjugate_through(there, circuit, BACKWARD)
    assert back.window == op.window
    np.testing.assert_allclose(back.matrix, op.matrix, atol=1e-10)


def test_identity_scattering_leaves_single_sites():
    lat = Lattice.of(5, (2, 2))
    circuit = qlga(lat, (1, -1), I4)
    op = LocalOperator(lat, Window(((2, 1),)), Z)
    out = conjugate_through(op, circuit)
    assert len(out.window) == 1
