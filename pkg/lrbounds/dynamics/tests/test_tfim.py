import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from lrbounds.dynamics import (
    PAULI,
    DenseModelSpec,
    KrylovConfig,
    TFIMScenario,
    apply_hamiltonian,
    apply_quench,
    build_dense_hamiltonian,
    exact_qrt,
    krylov_evolve,
    polarized_state,
    qrt_tfim,
    sigma_x_expectation,
    site_operator,
    tfim_operator,
)
from lrbounds.lattice import CouplingModel


def _dense(operator):
    return np.column_stack([operator.matvec(col) for col in np.eye(operator.shape[1])])


def test_two_sites_by_hand():
    b_z = 0.3
    scenario = TFIMScenario(CouplingModel(3.0, 2), b_z=b_z)
    H = np.column_stack([apply_hamiltonian(col, scenario) for col in np.eye(4, dtype=complex)])
    expected = np.array(
        [
            [2 * b_z, 0, 0, 1],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [1, 0, 0, -2 * b_z],
        ]
    )
    assert_allclose(H, expected, atol=1e-15)


def test_operator_is_hermitian():
    operator = tfim_operator(TFIMScenario(CouplingModel(2.0, 6, "periodic"), b_z=0.7))
    H = _dense(operator)
    assert_allclose(H, H.conj().T, atol=1e-14)
    assert operator.adjoint() is operator


@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_matches_kronecker_construction(boundary):
    model = CouplingModel(1.5, 8, boundary)
    scenario = TFIMScenario(model, b_z=0.5)
    dense = build_dense_hamiltonian(DenseModelSpec("tfim", model, b_z=0.5))
    assert_allclose(_dense(tfim_operator(scenario)), dense, atol=1e-12)


def test_states_and_quench():
    n = 5
    down = polarized_state(n)
    assert down[2**n - 1] == 1.0 and np.count_nonzero(down) == 1

    quench = linalg.expm(1j * np.pi / 4 * PAULI["y"])
    for site in [0, 2, 4]:
        quenched = apply_quench(down, site, n)
        assert_allclose(quenched, site_operator(quench, site, n) @ down, atol=1e-14)
        assert_allclose(sigma_x_expectation(quenched, site, n), 1.0)
        assert sigma_x_expectation(quenched, (site + 1) % n, n) == 0.0


def test_apply_hamiltonian_shape():
    scenario = TFIMScenario(CouplingModel(3.0, 4))
    with pytest.raises(RuntimeError, match="does not match"):
        apply_hamiltonian(np.ones(8), scenario)


def test_energy_conserved():
    scenario = TFIMScenario(CouplingModel(2.0, 8), b_z=0.5)
    operator = tfim_operator(scenario)
    psi = apply_quench(polarized_state(8), 3, 8)
    energy = np.vdot(psi, operator.matvec(psi)).real
    for _ in range(4):
        psi = krylov_evolve(psi, 0.4, KrylovConfig(), operator)
        assert_allclose(np.vdot(psi, operator.matvec(psi)).real, energy, rtol=1e-9)
    assert_allclose(np.linalg.norm(psi), 1.0, rtol=1e-10)


@pytest.mark.parametrize("alpha", [1.5, 3.0, np.inf])
def test_matches_dense_oracle(alpha):
    model = CouplingModel(alpha, 8)
    times = np.linspace(0.0, 1.5, 4)
    result = qrt_tfim(TFIMScenario(model, b_z=0.5, times=times))
    expected = exact_qrt(DenseModelSpec("tfim", model, b_z=0.5), list(result.r_values), times)
    assert_allclose(result.q, expected, atol=1e-8)
    assert result.unquenched_max <= 1e-12
    assert result.norm_drift <= 1e-10


def test_initial_signal_and_shape():
    result = qrt_tfim(TFIMScenario(CouplingModel(3.0, 9, "periodic"), times=[0.0, 0.1]))
    assert result.q.shape == (2, 5)
    assert result.r_values.tolist() == [0, 1, 2, 3, 4]
    assert_allclose(result.q[0], [0.5, 0, 0, 0, 0], atol=1e-15)


def test_pure_ising_chain():
    # without field every sigma^x is conserved
    result = qrt_tfim(TFIMScenario(CouplingModel(2.0, 7), b_z=0.0, times=[0.0, 1.0, 2.5]))
    assert_allclose(result.q[:, 0], 0.5, atol=1e-10)
    assert_allclose(result.q[:, 1:], 0.0, atol=1e-10)


def test_off_center_quench():
    model = CouplingModel(3.0, 6)
    times = [0.0, 0.8]
    result = qrt_tfim(TFIMScenario(model, times=times, quench_site=2))
    assert result.r_values.tolist() == [0, 1, 2, 3]
    expected = exact_qrt(DenseModelSpec("tfim", model, b_z=0.5), [0, 1, 2, 3], times, quench_site=2)
    assert_allclose(result.q, expected, atol=1e-8)


def test_limits():
    with pytest.raises(RuntimeError, match="limit of 4 sites"):
        TFIMScenario(CouplingModel(3.0, 6), max_sites=4)
    with pytest.raises(RuntimeError, match="finite chain"):
        TFIMScenario(CouplingModel.infinite(3.0))
    with pytest.raises(RuntimeError, match="finite"):
        TFIMScenario(CouplingModel(3.0, 4), b_z=np.nan)

    scenario = TFIMScenario(CouplingModel(3.0, 20), memory_budget=2**20)
    assert scenario.required_memory(KrylovConfig(m=30)) == 35 * 2**20 * 16
    with pytest.raises(RuntimeError, match="budget"):
        qrt_tfim(scenario)
