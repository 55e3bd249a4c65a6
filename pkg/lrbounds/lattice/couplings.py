import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np

from ..config import ZETA_REL_TOL, Boundary, LambdaMode
from ..typing import Alpha, Site

logger = logging.getLogger()

__all__ = [
    "CouplingModel",
    "Lambda",
    "distance",
    "coupling",
    "coupling_matrix",
    "coupling_row",
    "distance_matrix",
    "max_distance_from",
    "site_at_distance",
    "lattice_graph",
    "unit_shell",
    "zeta_bracket",
    "zeta",
    "lambda_constant",
]


@dataclass(frozen=True)
class CouplingModel:
    """Power-law couplings ``J_ij = 1 / r_ij^alpha`` on a one-dimensional chain.

    Parameters
    ----------
    alpha : float
        The decay exponent. Must be larger than 1 so that the summed coupling
        converges. ``math.inf`` (see :data:`lrbounds.config.NEAREST_NEIGHBOR`)
        selects nearest-neighbor couplings.
    n_sites : int, optional
        Number of sites. ``None`` (default) denotes the infinite chain.
    boundary : str | Boundary
        One of 'open', 'periodic' or 'infinite'. Ignored and set to 'infinite'
        when ``n_sites`` is None. Default is 'open'.

    Notes
    -----
    The self-coupling is ``J_ii = 1``, so that the summed coupling
    ``lambda = sum_k J_ik`` includes a unit self term. Periodic chains use the
    minimal-image distance, with a single shortest path per pair and no sum
    over images.
    """

    alpha: Alpha
    n_sites: Optional[int] = None
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        alpha = float(self.alpha)
        if math.isnan(alpha) or alpha <= 1:
            raise RuntimeError(
                f"The coupling exponent alpha={self.alpha} is not supported. The summed "
                f"coupling diverges for alpha <= 1; use alpha > 1 or 'inf' for "
                f"nearest-neighbor couplings."
            )
        object.__setattr__(self, "alpha", alpha)

        if self.boundary not in Boundary:
            raise RuntimeError(
                f"Unrecognized boundary {self.boundary}. Use one of "
                f"{[boundary.value for boundary in Boundary]}."
            )
        boundary = Boundary(self.boundary)

        if self.n_sites is None or boundary == Boundary.INFINITE:
            if self.n_sites is not None:
                raise RuntimeError(
                    f"An infinite chain cannot have n_sites={self.n_sites}. Pass "
                    f"n_sites=None or choose an open or periodic boundary."
                )
            boundary = Boundary.INFINITE
        else:
            if int(self.n_sites) != self.n_sites or self.n_sites < 1:
                raise RuntimeError(
                    f"The chain length must be a positive integer, got {self.n_sites}."
                )
            if boundary == Boundary.PERIODIC and self.n_sites < 3:
                raise RuntimeError(
                    f"A periodic chain needs at least 3 sites, got {self.n_sites}."
                )
            object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "boundary", boundary)

    @classmethod
    def infinite(cls, alpha: Alpha) -> "CouplingModel":
        """Couplings on the infinite chain."""
        return cls(alpha=alpha, n_sites=None, boundary=Boundary.INFINITE)

    @property
    def is_nearest_neighbor(self) -> bool:
        """Whether the couplings are nearest-neighbor only (alpha is infinite)."""
        return math.isinf(self.alpha)

    @property
    def is_finite(self) -> bool:
        """Whether the chain has a finite number of sites."""
        return self.boundary != Boundary.INFINITE

    def with_sites(self, n_sites: int, boundary: Boundary = Boundary.OPEN) -> "CouplingModel":
        """Same exponent on a chain of ``n_sites`` sites."""
        return CouplingModel(alpha=self.alpha, n_sites=n_sites, boundary=boundary)

    def _check_site(self, site: Site) -> None:
        if self.is_finite and not 0 <= site < self.n_sites:  # type: ignore
            raise RuntimeError(
                f"Site {site} is out of range for a chain of {self.n_sites} sites. "
                f"Valid sites are 0, ..., {self.n_sites - 1}."  # type: ignore
            )


@dataclass(frozen=True)
class Lambda:
    """The summed coupling ``lambda = sum_k J_ik``, including ``J_ii = 1``.

    Attributes
    ----------
    value : float
        The summed coupling. At least 1.
    derivation : LambdaMode
        Whether ``value`` holds on the infinite chain or is a finite-chain row maximum.
    """

    value: float
    derivation: LambdaMode

    def __float__(self) -> float:
        return self.value


def distance(i: Site, j: Site, model: CouplingModel) -> int:
    """Lattice distance between two sites.

    Parameters
    ----------
    i : int
        The first site.
    j : int
        The second site.
    model : CouplingModel
        The model whose geometry is used.

    Returns
    -------
    r_ij : int
        ``|i - j|`` on open and infinite chains, and the minimal image
        ``min(|i - j|, N - |i - j|)`` on periodic chains.
    """
    model._check_site(i)
    model._check_site(j)
    r = abs(int(i) - int(j))
    if model.boundary == Boundary.PERIODIC:
        r = min(r, model.n_sites - r)  # type: ignore
    return r


def _coupling_at(r, alpha: Alpha):
    """Coupling at distance(s) ``r``, with the unit self term at ``r = 0``."""
    r = np.asarray(r)
    if math.isinf(alpha):
        return (r <= 1).astype(float)
    safe_r = np.maximum(r, 1).astype(float)
    return np.where(r == 0, 1.0, safe_r ** (-alpha))


def coupling(i: Site, j: Site, model: CouplingModel) -> float:
    """Coupling ``J_ij`` between two sites.

    Parameters
    ----------
    i : int
        The first site.
    j : int
        The second site.
    model : CouplingModel
        The coupling model.

    Returns
    -------
    J_ij : float
        ``1`` when ``i == j`` and ``r_ij^-alpha`` otherwise. For nearest-neighbor
        couplings, 1 at unit distance and 0 beyond.
    """
    return float(_coupling_at(distance(i, j, model), model.alpha))


def distance_matrix(model: CouplingModel) -> np.ndarray:
    """Matrix of pairwise distances of a finite chain."""
    if not model.is_finite:
        raise RuntimeError(
            "Pairwise matrices need a finite chain. Construct the model with n_sites."
        )
    sites = np.arange(model.n_sites)  # type: ignore
    dist = np.abs(np.subtract.outer(sites, sites))
    if model.boundary == Boundary.PERIODIC:
        dist = np.minimum(dist, model.n_sites - dist)
    return dist


def coupling_matrix(model: CouplingModel, include_self: bool = True) -> np.ndarray:
    """Full coupling matrix of a finite chain.

    Parameters
    ----------
    model : CouplingModel
        The coupling model on a finite chain.
    include_self : bool
        Whether the diagonal holds the unit self-couplings (default) or zeros.

    Returns
    -------
    J : np.ndarray of shape (n_sites, n_sites)
        The symmetric coupling matrix.
    """
    J = _coupling_at(distance_matrix(model), model.alpha)
    if not include_self:
        np.fill_diagonal(J, 0.0)
    return J


def coupling_row(site: Site, model: CouplingModel, include_self: bool = True) -> np.ndarray:
    """Couplings ``J_site,k`` of one site to every site of a finite chain.

    Equal to ``coupling_matrix(model, include_self)[site]`` without forming the
    ``N x N`` matrix.
    """
    model._check_site(site)
    if not model.is_finite:
        raise RuntimeError("Coupling rows need a finite chain. Construct the model with n_sites.")
    dist = np.abs(np.arange(model.n_sites) - int(site))  # type: ignore
    if model.boundary == Boundary.PERIODIC:
        dist = np.minimum(dist, model.n_sites - dist)
    row = _coupling_at(dist, model.alpha)
    if not include_self:
        row[site] = 0.0
    return row


def max_distance_from(site: Site, model: CouplingModel) -> int:
    """Largest distance reported from ``site``.

    On a ring this is ``N // 2``, beyond which pairs repeat by reflection; on an
    open chain it is the distance to the far end, ``N - 1 - site``.
    """
    model._check_site(site)
    if not model.is_finite:
        raise RuntimeError("Distances from a site are only enumerated on finite chains.")
    if model.boundary == Boundary.PERIODIC:
        return model.n_sites // 2  # type: ignore
    return model.n_sites - 1 - site  # type: ignore


def site_at_distance(site: Site, r: int, model: CouplingModel) -> Site:
    """The site ``r`` steps to the right of ``site``, wrapping around on rings."""
    r_max = max_distance_from(site, model)
    if not 0 <= r <= r_max:
        raise RuntimeError(
            f"Distance {r} is out of range; this chain reports distances 0, ..., {r_max} "
            f"from site {site}."
        )
    return (site + r) % model.n_sites  # type: ignore


def lattice_graph(model: CouplingModel) -> nx.Graph:
    """Nearest-neighbor graph of a finite chain.

    Open chains are path graphs and periodic chains are cycle graphs; the
    graph neighbors of a site are exactly the sites at unit distance.
    """
    if not model.is_finite:
        raise RuntimeError("Only finite chains have a lattice graph.")
    if model.boundary == Boundary.PERIODIC:
        return nx.cycle_graph(model.n_sites)
    return nx.path_graph(model.n_sites)


def unit_shell(G: nx.Graph, site: Site) -> List[Site]:
    """Sites within unit distance of ``site``, including the site itself."""
    return sorted([site, *G.neighbors(site)])


def zeta_bracket(alpha: Alpha, rel_tol: float = ZETA_REL_TOL) -> Tuple[float, float]:
    """Two-sided bracket on the Riemann zeta function for real ``alpha > 1``.

    The partial sum up to ``m`` is completed with integral bounds on the tail.
    Because ``n^-alpha`` is convex and decreasing, the midpoint rule bounds the
    tail from above and the trapezoid rule from below::

        int_{m+1}^inf x^-a dx + (m+1)^-a / 2  <=  sum_{n>m} n^-a  <=  int_{m+1/2}^inf x^-a dx

    ``m`` is increased until the bracket is narrower than ``rel_tol`` relative.

    Parameters
    ----------
    alpha : float
        The exponent, larger than 1.
    rel_tol : float
        Target relative width of the bracket. Default is 1e-12.

    Returns
    -------
    lower, upper : float
        Bounds with ``lower <= zeta(alpha) <= upper``.
    """
    if math.isnan(alpha) or alpha <= 1:
        raise RuntimeError(f"zeta(alpha) diverges for alpha={alpha} <= 1.")
    if math.isinf(alpha):
        return 1.0, 1.0

    def tail_integral(a: float) -> float:
        return a ** (1.0 - alpha) / (alpha - 1.0)

    n_terms = 256
    while True:
        # smallest terms first
        terms = np.arange(n_terms, 0, -1, dtype=float) ** (-alpha)
        partial = float(np.sum(terms))
        lower = partial + tail_integral(n_terms + 1.0) + 0.5 * (n_terms + 1.0) ** (-alpha)
        upper = partial + tail_integral(n_terms + 0.5)
        if upper - lower <= rel_tol * lower:
            logger.debug(f"zeta({alpha}) bracketed with {n_terms} terms")
            return lower, upper
        if n_terms > 2**26:
            raise RuntimeError(
                f"Could not bracket zeta({alpha}) to relative width {rel_tol}; the "
                f"bracket is [{lower}, {upper}] after {n_terms} terms."
            )
        n_terms *= 4


def zeta(alpha: Alpha, rel_tol: float = ZETA_REL_TOL) -> float:
    """Riemann zeta function for real ``alpha > 1`` (midpoint of :func:`zeta_bracket`)."""
    lower, upper = zeta_bracket(alpha, rel_tol=rel_tol)
    return 0.5 * (lower + upper)


def lambda_constant(
    model: CouplingModel, mode: LambdaMode = LambdaMode.INFINITE_LATTICE
) -> Lambda:
    """Summed coupling ``lambda = sum_k J_ik`` entering every bound.

    Parameters
    ----------
    model : CouplingModel
        The coupling model.
    mode : str | LambdaMode
        'infinite-lattice' (default) returns ``1 + 2 zeta(alpha)``, which
        dominates every finite-chain row sum and keeps bounds valid for any
        chain length. 'finite-row-max' returns the largest row sum of the
        coupling matrix and requires a finite chain.

    Returns
    -------
    lam : Lambda
        The summed coupling and how it was derived.
    """
    if mode not in LambdaMode:
        raise RuntimeError(
            f"Unrecognized lambda mode {mode}. Use one of "
            f"{[mode.value for mode in LambdaMode]}."
        )
    mode = LambdaMode(mode)

    if mode == LambdaMode.INFINITE_LATTICE:
        if model.is_nearest_neighbor:
            value = 3.0
        else:
            value = 1.0 + 2.0 * zeta(model.alpha)
    else:
        if not model.is_finite:
            raise RuntimeError(
                "The finite-row-max lambda needs a finite chain; use the "
                "infinite-lattice mode for the infinite chain."
            )
        value = float(coupling_matrix(model).sum(axis=1).max())
    return Lambda(value=value, derivation=mode)

