import numpy as np
import pytest
from numpy.testing import assert_allclose

from lrbounds.dynamics import (
    PAULI,
    DenseEvolution,
    DenseModelSpec,
    build_dense_hamiltonian,
    dump_state,
    exact_qrt,
    ising_dephasing_qrt,
    oracle,
    quenched_state,
    site_operator,
)
from lrbounds.lattice import CouplingModel


def test_two_site_xy_block():
    H = build_dense_hamiltonian(DenseModelSpec("xy", CouplingModel(3.0, 2)))
    # the hopping term only exchanges |up down> and |down up>
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 1.0
    assert_allclose(H, expected, atol=1e-15)


def test_site_operator_bit_order():
    # site 0 is the least significant bit
    Z0 = site_operator(PAULI["z"], 0, 3).toarray()
    assert_allclose(np.diag(Z0).real, [1, -1, 1, -1, 1, -1, 1, -1])
    Z2 = site_operator(PAULI["z"], 2, 3).toarray()
    assert_allclose(np.diag(Z2).real, [1, 1, 1, 1, -1, -1, -1, -1])


@pytest.mark.parametrize("kind, b_z", [("xy", 0.0), ("tfim", 0.4)])
def test_hermitian_and_diagonalized(kind, b_z):
    spec = DenseModelSpec(kind, CouplingModel(2.0, 6, "periodic"), b_z=b_z)
    oracle = DenseEvolution(spec)
    assert_allclose(oracle.hamiltonian, oracle.hamiltonian.conj().T, atol=1e-14)
    assert oracle.residual() < 1e-10


def test_xy_conserves_magnetization():
    n = 5
    H = build_dense_hamiltonian(DenseModelSpec("xy", CouplingModel(1.5, n)))
    Sz = sum(site_operator(PAULI["z"], i, n) for i in range(n)).toarray()
    assert_allclose(H @ Sz - Sz @ H, 0.0, atol=1e-13)


def test_global_phase_drops_out():
    spec = DenseModelSpec("tfim", CouplingModel(3.0, 6), b_z=0.5)
    times = [0.0, 0.4, 1.2]
    plain = exact_qrt(spec, [0, 1, 3], times)
    shifted = exact_qrt(spec, [0, 1, 3], times, quench_phase=0.7)
    assert_allclose(plain, shifted, atol=1e-13)
    assert plain.shape == (3, 3)
    assert exact_qrt(spec, 1, times).shape == (3,)


@pytest.mark.parametrize("alpha", [1.5, 3.0])
@pytest.mark.parametrize("r", [1, 2, 5])
def test_ising_closed_form(alpha, r):
    model = CouplingModel(alpha, 7)
    spec = DenseModelSpec("tfim", model, b_z=0.0)
    times = np.linspace(0.0, 3.0, 7)
    assert_allclose(
        exact_qrt(spec, r, times, observable="y"),
        ising_dephasing_qrt(model, r, times),
        atol=1e-10,
    )
    assert_allclose(exact_qrt(spec, r, times), ising_dephasing_qrt(model, r, times, "x"), atol=1e-10)
    assert_allclose(exact_qrt(spec, 0, times), 0.5, atol=1e-10)


def test_ising_closed_form_domain():
    model = CouplingModel(3.0, 5)
    with pytest.raises(RuntimeError, match="closed form"):
        ising_dephasing_qrt(model, 0, [0.1], "y")
    with pytest.raises(RuntimeError, match="closed form"):
        ising_dephasing_qrt(model, 1, [0.1], "z")


def test_dump_state(tmp_path):
    spec = DenseModelSpec("tfim", CouplingModel(2.0, 5), b_z=0.5)
    state = quenched_state(spec, 0.9)
    assert_allclose(np.linalg.norm(state), 1.0, rtol=1e-12)

    path = tmp_path / "state.bin"
    dump_state(path, state)
    assert path.stat().st_size == 2**5 * 16
    assert_allclose(np.fromfile(path, dtype="<c16"), state, rtol=0, atol=0)


def test_spec_validation():
    with pytest.raises(RuntimeError, match="Unrecognized model"):
        DenseModelSpec("heisenberg", CouplingModel(3.0, 4))
    with pytest.raises(RuntimeError, match="finite chain"):
        DenseModelSpec("xy", CouplingModel.infinite(3.0))
    with pytest.raises(RuntimeError, match="budget"):
        DenseModelSpec("tfim", CouplingModel(3.0, 13))
    with pytest.raises(RuntimeError, match="no field"):
        DenseModelSpec("xy", CouplingModel(3.0, 4), b_z=0.2)
    with pytest.raises(RuntimeError, match="Unrecognized observable"):
        exact_qrt(DenseModelSpec("xy", CouplingModel(3.0, 4)), 1, [0.0], observable="w")


def test_large_problem_warns(monkeypatch):
    monkeypatch.setattr(oracle, "SLOW_DENSE_DIM", 16)
    with pytest.warns(UserWarning, match="long time"):
        DenseEvolution(DenseModelSpec("xy", CouplingModel(3.0, 4)))
