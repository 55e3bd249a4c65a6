"""Post-quench signal of the long-range XY chain from its single-excitation sector.

Starting from the fully polarized state ``|down ... down>``, the quench
``U = exp(i pi sigma^y_0 / 4)`` produces ``(|vac> + |1_0>) / sqrt(2)``, where
``|1_k>`` has a single up spin on site ``k``. The XY Hamiltonian conserves the
number of up spins, annihilates ``|vac>`` and acts on the one-excitation states
as the hopping matrix ``H_1`` with entries ``J_kl``. Hence::

    |psi(t)> = (|vac> + sum_k c_k(t) |1_k>) / sqrt(2),    c(t) = exp(-i H_1 t) e_0

and since ``sigma^x_r`` swaps ``|vac>`` and ``|1_r>``, the quenched expectation
is ``Re c_r(t)`` while the unquenched one vanishes. The signal is therefore
``Q_r(t) = |Re c_r(t)| / 2``.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from ..config import Boundary
from ..lattice import (
    CouplingModel,
    coupling_matrix,
    coupling_row,
    max_distance_from,
    site_at_distance,
)
from ..typing import Site, TimeGrid
from .utils import check_times

logger = logging.getLogger()

__all__ = [
    "XYScenario",
    "PropagatorRow",
    "FreeParticlePropagator",
    "Dispersion",
    "build_hopping_matrix",
    "evolve_propagator",
    "qrt_xy",
    "qrt_xy_grid",
    "dispersion_vmax",
    "light_cone_radius",
]

# ring size used for the dispersion of the infinite chain
_ANALYTIC_RING_SITES = 2**16 + 1


@dataclass(frozen=True)
class XYScenario:
    """Local quench of the long-range XY chain.

    Parameters
    ----------
    model : CouplingModel
        Couplings on a finite chain; periodic by default in the command line.
    times : sequence of float
        Sorted, non-negative measurement times.
    quench_site : int
        The site the quench acts on. Default is 0.
    """

    model: CouplingModel
    times: TimeGrid = field(default=(0.0,))
    quench_site: Site = 0

    def __post_init__(self):
        if not self.model.is_finite:
            raise RuntimeError("The XY simulator needs a finite chain.")
        self.model._check_site(self.quench_site)
        object.__setattr__(self, "times", check_times(self.times))

    @property
    def n_sites(self) -> int:
        """Number of sites."""
        return self.model.n_sites  # type: ignore

    @property
    def boundary(self) -> Boundary:
        """Boundary condition of the chain."""
        return self.model.boundary

    def max_distance(self) -> int:
        """Largest distance reported: ``N // 2`` on rings, the far end on open chains."""
        return max_distance_from(self.quench_site, self.model)

    def target_site(self, r: int) -> Site:
        """Site at distance ``r`` from the quench site."""
        return site_at_distance(self.quench_site, r, self.model)


class PropagatorRow(NamedTuple):
    """Single-particle amplitudes ``c_k(t)`` after starting on ``source``."""

    amplitudes: np.ndarray
    t: float
    source: Site
    n_sites: int
    alpha: float

    @property
    def norm(self) -> float:
        """``sum_k |c_k|^2``, which equals 1 by unitarity."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def build_hopping_matrix(scenario: XYScenario) -> np.ndarray:
    """Single-excitation Hamiltonian of the XY chain.

    Parameters
    ----------
    scenario : XYScenario
        The quench scenario.

    Returns
    -------
    H_1 : np.ndarray of shape (n_sites, n_sites)
        Real symmetric hopping matrix with ``H_kl = J_kl`` off the diagonal and
        zeros on it; the term ``(sigma^x sigma^x + sigma^y sigma^y) / 2`` equals
        ``sigma^+ sigma^- + sigma^- sigma^+`` and moves the excitation with unit
        weight.
    """
    return coupling_matrix(scenario.model, include_self=False)


class FreeParticlePropagator:
    """Propagator ``exp(-i H t)`` of a real symmetric hopping matrix.

    The matrix is diagonalized once; amplitudes at any time are obtained by
    applying phases in the eigenbasis.

    Parameters
    ----------
    matrix : np.ndarray of shape (n, n)
        Real symmetric hopping matrix.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise RuntimeError(f"The hopping matrix must be square, got shape {matrix.shape}.")
        if not np.allclose(matrix, matrix.T, rtol=0, atol=1e-14):
            raise RuntimeError("The hopping matrix must be symmetric.")
        self.energies, self.modes = linalg.eigh(matrix)

    @property
    def n_sites(self) -> int:
        """Number of sites."""
        return self.modes.shape[0]

    def amplitudes(self, t: float, source: Site) -> np.ndarray:
        """Column ``source`` of ``exp(-i H t)``."""
        if t < 0:
            raise RuntimeError(f"Evolution time must be non-negative, got t={t}.")
        phases = np.exp(-1j * self.energies * t)
        return self.modes @ (phases * self.modes[source, :])


def evolve_propagator(
    matrix: np.ndarray, t: float, source: Site, alpha: float = np.nan
) -> PropagatorRow:
    """Evolve a particle that starts on ``source`` for a time ``t``.

    Parameters
    ----------
    matrix : np.ndarray of shape (n, n)
        Real symmetric hopping matrix, see :func:`build_hopping_matrix`.
    t : float
        The time, non-negative.
    source : int
        The starting site.
    alpha : float
        Coupling exponent recorded in the metadata.

    Returns
    -------
    row : PropagatorRow
        The amplitudes ``c(t) = exp(-i H t) e_source``.
    """
    propagator = FreeParticlePropagator(matrix)
    return PropagatorRow(
        amplitudes=propagator.amplitudes(t, source),
        t=float(t),
        source=source,
        n_sites=propagator.n_sites,
        alpha=float(alpha),
    )


def qrt_xy_grid(scenario: XYScenario, r_values: Optional[Sequence[int]] = None) -> np.ndarray:
    """Signal ``Q_r(t)`` of the XY quench for many distances and all scenario times.

    Parameters
    ----------
    scenario : XYScenario
        The quench scenario.
    r_values : sequence of int, optional
        Distances from the quench site. Defaults to ``0, ..., max_distance``.

    Returns
    -------
    q : np.ndarray of shape (n_times, n_distances)
        ``|Re c_r(t)| / 2`` for every time and distance.
    """
    if r_values is None:
        r_values = range(scenario.max_distance() + 1)
    targets = [scenario.target_site(int(r)) for r in r_values]

    propagator = FreeParticlePropagator(build_hopping_matrix(scenario))
    q = np.empty((len(scenario.times), len(targets)))
    for idx, t in enumerate(scenario.times):
        amps = propagator.amplitudes(t, scenario.quench_site)
        q[idx] = 0.5 * np.abs(amps[targets].real)
    logger.info(
        f"XY alpha={scenario.model.alpha} N={scenario.n_sites}: "
        f"{len(scenario.times)} times x {len(targets)} distances"
    )
    return q


def qrt_xy(scenario: XYScenario, r: Union[int, Sequence[int]]) -> np.ndarray:
    """Signal ``Q_r(t)`` of the XY quench at the scenario times.

    Parameters
    ----------
    scenario : XYScenario
        The quench scenario.
    r : int | sequence of int
        Distance(s) from the quench site.

    Returns
    -------
    q : np.ndarray
        Shape (n_times,) for a single distance, (n_times, n_distances) otherwise.
    """
    if np.ndim(r) == 0:
        return qrt_xy_grid(scenario, [int(r)])[:, 0]  # type: ignore
    return qrt_xy_grid(scenario, r)  # type: ignore


class Dispersion(NamedTuple):
    """Single-particle band ``E(k)`` and its largest group velocity."""

    momenta: np.ndarray
    energies: np.ndarray
    v_max: float
    k_at_v_max: float
    grid_spacing: float
    tail_bound: float


def _ring_dispersion(alpha: float, n_sites: int) -> np.ndarray:
    ring = CouplingModel(alpha=alpha, n_sites=n_sites, boundary=Boundary.PERIODIC)
    first_row = coupling_row(0, ring, include_self=False)
    # circulant eigenvalues, ordered by momentum 2 pi m / N
    return np.fft.fft(first_row).real


def dispersion_vmax(model: CouplingModel, n_sites: Optional[int] = None) -> Dispersion:
    """Band structure ``E(k) = 2 sum_d cos(k d) / d^alpha`` and maximum group velocity.

    Parameters
    ----------
    model : CouplingModel
        The couplings. On a periodic chain the band is evaluated on its ``N``
        allowed momenta. Otherwise the infinite-chain band is evaluated on the
        momenta of a ring of ``n_sites`` sites (default ``2^16 + 1``), whose
        couplings truncate the distance sum at ``(n_sites - 1) / 2``.
    n_sites : int, optional
        Grid size for the infinite-chain band.

    Returns
    -------
    dispersion : Dispersion
        Momenta, energies, ``v_max = max_k |dE/dk|``, the momentum where it is
        attained, the grid spacing, and a bound on the truncated tail of the
        distance sum (0 on a periodic chain, where the band is exact).

    Notes
    -----
    Group velocities come from centered differences at steps ``h`` and ``2h``
    combined by Richardson extrapolation. For ``alpha <= 2`` the velocity
    diverges as ``k -> 0``, so the reported ``v_max`` depends on the grid and
    grows as it is refined.
    """
    if model.boundary == Boundary.PERIODIC:
        size = model.n_sites
        tail = 0.0
    else:
        size = int(n_sites) if n_sites is not None else _ANALYTIC_RING_SITES
        if size % 2 == 0:
            size += 1
        half = (size - 1) // 2
        tail = 0.0 if model.is_nearest_neighbor else 2.0 * half ** (1.0 - model.alpha) / (
            model.alpha - 1.0
        )
    if size < 5:
        raise RuntimeError(f"The momentum grid needs at least 5 points, got {size}.")
    if not model.is_nearest_neighbor and model.alpha <= 2:
        warnings.warn(
            f"The group velocity diverges at k -> 0 for alpha={model.alpha} <= 2; the "
            f"reported v_max is a finite-grid value with spacing 2 pi / {size}."
        )

    energies = _ring_dispersion(model.alpha, size)  # type: ignore
    momenta = 2.0 * np.pi * np.arange(size) / size
    h = 2.0 * np.pi / size

    def centered(step: int) -> np.ndarray:
        return (np.roll(energies, -step) - np.roll(energies, step)) / (2.0 * step * h)

    velocity = (4.0 * centered(1) - centered(2)) / 3.0
    best = int(np.argmax(np.abs(velocity)))
    return Dispersion(
        momenta=momenta,
        energies=energies,
        v_max=float(np.abs(velocity[best])),
        k_at_v_max=float(momenta[best]),
        grid_spacing=h,
        tail_bound=tail,
    )


def light_cone_radius(model: CouplingModel, t: float, n_sites: Optional[int] = None) -> float:
    """Light-cone radius ``v_max t`` of the single-excitation particle."""
    return dispersion_vmax(model, n_sites=n_sites).v_max * t
