import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import jv

from lrbounds.dynamics import (
    DenseModelSpec,
    FreeParticlePropagator,
    XYScenario,
    build_hopping_matrix,
    dispersion_vmax,
    evolve_propagator,
    exact_qrt,
    light_cone_radius,
    peak_distance,
    qrt_xy,
    qrt_xy_grid,
)
from lrbounds.lattice import CouplingModel, coupling_matrix


def _ring(alpha, n_sites=101):
    return CouplingModel(alpha, n_sites, "periodic")


def test_initial_signal():
    scenario = XYScenario(_ring(3.0, 21), times=[0.0])
    q = qrt_xy_grid(scenario)
    assert q.shape == (1, 11)
    assert_allclose(q[0, 0], 0.5)
    assert_allclose(q[0, 1:], 0.0)


@pytest.mark.parametrize("alpha", [1.5, 3.0, math.inf])
def test_unitarity(alpha):
    scenario = XYScenario(_ring(alpha, 40))
    row = evolve_propagator(build_hopping_matrix(scenario), 2.3, 0, alpha=alpha)
    assert_allclose(row.norm, 1.0, rtol=1e-12)
    assert row.n_sites == 40 and row.source == 0


def test_nearest_neighbor_bessel():
    # on a long ring the amplitudes are (-i)^r J_r(2t)
    scenario = XYScenario(_ring(math.inf, 201), times=[0.5, 1.0, 2.0])
    propagator = FreeParticlePropagator(build_hopping_matrix(scenario))
    r = np.arange(15)
    for t in scenario.times:
        amps = propagator.amplitudes(t, 0)
        assert_allclose(np.abs(amps[r]), np.abs(jv(r, 2 * t)), atol=1e-12)

    q = qrt_xy(scenario, list(r))
    assert_allclose(q[:, 1::2], 0.0, atol=1e-12)
    expected = 0.5 * np.abs(jv(r[::2][None, :], 2 * scenario.times[:, None]))
    assert_allclose(q[:, ::2], expected, atol=1e-12)


def test_ring_reflection_symmetry():
    scenario = XYScenario(_ring(2.0, 30))
    amps = FreeParticlePropagator(build_hopping_matrix(scenario)).amplitudes(1.7, 0)
    assert_allclose(amps[1:], amps[1:][::-1], atol=1e-12)


def test_quench_site_is_translation_invariant():
    model = _ring(3.0, 25)
    times = [0.3, 1.1]
    at_zero = qrt_xy_grid(XYScenario(model, times=times))
    at_seven = qrt_xy_grid(XYScenario(model, times=times, quench_site=7))
    assert_allclose(at_zero, at_seven, atol=1e-12)


@pytest.mark.parametrize("alpha", [1.5, 3.0, math.inf])
@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_matches_dense_oracle(alpha, boundary):
    model = CouplingModel(alpha, 8, boundary)
    times = np.linspace(0.0, 2.0, 5)
    scenario = XYScenario(model, times=times)
    r_values = list(range(scenario.max_distance() + 1))

    reduced = qrt_xy(scenario, r_values)
    dense = exact_qrt(DenseModelSpec("xy", model), r_values, times)
    assert_allclose(reduced, dense, atol=1e-10)


@pytest.mark.parametrize("alpha", [1.5, 3.0, math.inf])
def test_sigma_y_signal_against_dense_oracle(alpha):
    # sigma^x and sigma^y read the real and imaginary parts of one amplitude
    model = _ring(alpha, 8)
    times = np.linspace(0.0, 2.0, 5)
    r_values = list(range(5))
    spec = DenseModelSpec("xy", model)
    q_x = exact_qrt(spec, r_values, times)
    q_y = exact_qrt(spec, r_values, times, observable="y")

    propagator = FreeParticlePropagator(build_hopping_matrix(XYScenario(model, times=times)))
    weight = np.array([np.abs(propagator.amplitudes(t, 0)[r_values]) ** 2 / 4 for t in times])
    assert_allclose(q_x**2 + q_y**2, weight, atol=1e-10)
    assert_allclose(q_y[0], 0.0, atol=1e-12)
    if math.isinf(alpha):
        # on a bipartite ring the amplitude at distance r carries the phase (-i)^r
        assert_allclose(q_y[:, 0::2], 0.0, atol=1e-10)
        assert_allclose(q_x[:, 1::2], 0.0, atol=1e-10)
    else:
        assert np.max(q_y[1:]) > 1e-3


def test_scalar_distance():
    scenario = XYScenario(CouplingModel(3.0, 10), times=[0.0, 0.5, 1.0])
    q = qrt_xy(scenario, 3)
    assert q.shape == (3,)
    assert_allclose(q, qrt_xy_grid(scenario)[:, 3])


def test_signal_peaks_on_light_cone():
    # nearest-neighbor wave front travels at v_max = 2
    scenario = XYScenario(_ring(math.inf), times=[5.0])
    q = qrt_xy_grid(scenario)[0]
    r = np.arange(q.size)
    assert abs(peak_distance(r, q) - 10) <= 2


def test_scenario_validation():
    with pytest.raises(RuntimeError, match="finite chain"):
        XYScenario(CouplingModel.infinite(3.0))
    with pytest.raises(RuntimeError, match="sorted"):
        XYScenario(_ring(3.0, 10), times=[1.0, 0.5])
    with pytest.raises(RuntimeError, match="non-negative"):
        XYScenario(_ring(3.0, 10), times=[-1.0])
    with pytest.raises(RuntimeError, match="out of range"):
        XYScenario(_ring(3.0, 10), quench_site=10)
    with pytest.raises(RuntimeError, match="symmetric"):
        FreeParticlePropagator(np.triu(np.ones((4, 4))))


class TestDispersion:
    def test_nearest_neighbor(self):
        dispersion = dispersion_vmax(CouplingModel.infinite(math.inf))
        assert_allclose(dispersion.v_max, 2.0, rtol=1e-6)
        assert abs(dispersion.k_at_v_max - np.pi / 2) <= dispersion.grid_spacing
        assert dispersion.tail_bound == 0.0
        assert_allclose(light_cone_radius(CouplingModel.infinite(math.inf), 5.0), 10.0, rtol=1e-6)

    def test_periodic_chain_uses_its_momenta(self):
        dispersion = dispersion_vmax(_ring(math.inf, 64))
        assert dispersion.momenta.size == 64
        assert dispersion.tail_bound == 0.0
        assert_allclose(dispersion.energies, 2 * np.cos(dispersion.momenta), atol=1e-12)
        assert_allclose(dispersion.v_max, 2.0, rtol=1e-4)

    def test_band_of_finite_alpha(self):
        dispersion = dispersion_vmax(CouplingModel.infinite(4.0), n_sites=4001)
        d = np.arange(1, 2001)
        k = dispersion.momenta[[0, 100, 1000]]
        expected = 2 * np.cos(np.outer(k, d)) @ d**-4.0
        assert_allclose(dispersion.energies[[0, 100, 1000]], expected, atol=1e-12)
        assert 0 < dispersion.tail_bound < 1e-9

    def test_velocity_grows_with_grid_for_slow_decay(self):
        with pytest.warns(UserWarning, match="diverges"):
            coarse = dispersion_vmax(CouplingModel.infinite(1.5), n_sites=1001)
        with pytest.warns(UserWarning, match="diverges"):
            fine = dispersion_vmax(CouplingModel.infinite(1.5), n_sites=16001)
        assert fine.v_max > 2 * coarse.v_max

    def test_fast_decay_converges(self):
        coarse = dispersion_vmax(CouplingModel.infinite(3.0), n_sites=4001)
        fine = dispersion_vmax(CouplingModel.infinite(3.0), n_sites=16001)
        assert_allclose(fine.v_max, coarse.v_max, rtol=1e-3)
        assert fine.v_max > 2.0

    @pytest.mark.parametrize("alpha", [1.5, 3.0, math.inf])
    def test_ring_band_matches_hopping_spectrum(self, alpha):
        ring = _ring(alpha, 41)
        dispersion = dispersion_vmax(ring)
        spectrum = np.linalg.eigvalsh(coupling_matrix(ring, include_self=False))
        assert_allclose(np.sort(dispersion.energies), spectrum, atol=1e-12)

    def test_default_grid_of_the_infinite_chain(self):
        # the default grid has 2^16 + 1 momenta
        dispersion = dispersion_vmax(CouplingModel.infinite(3.0))
        assert dispersion.momenta.size == 2**16 + 1
        assert np.all(np.isfinite(dispersion.energies))
        assert 2.0 < dispersion.v_max < 4.0
        assert 0 < dispersion.tail_bound < 1e-8
