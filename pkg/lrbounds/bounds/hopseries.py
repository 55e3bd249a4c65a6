import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..config import LambdaMode
from ..lattice import (
    CouplingModel,
    Lambda,
    coupling_matrix,
    distance_matrix,
    lambda_constant,
    lattice_graph,
    unit_shell,
)
from ..typing import Alpha, Site

logger = logging.getLogger()

__all__ = [
    "HopSeriesQuery",
    "PairCheck",
    "VerificationReport",
    "hopping_sums",
    "exact_Jn",
    "window_model",
    "windowed_Jn",
    "hk_Jn_bound",
    "new_Jn_bound",
    "trivial_Jn_bound",
    "verify_reproducibility",
    "verify_hopping_bounds",
]

LambdaLike = Union[Lambda, float]

# slack for floating point round-off when comparing two sides of an inequality
_REL_SLACK = 1e-12


@dataclass(frozen=True)
class HopSeriesQuery:
    """An n-th order hopping sum ``J_n(i, j)`` on a finite chain."""

    i: Site
    j: Site
    n: int
    model: CouplingModel

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise RuntimeError(f"The hopping order must be a positive integer, got n={self.n}.")
        if not self.model.is_finite:
            raise RuntimeError(
                "Exact hopping sums need a finite chain; the infinite sum must be "
                "truncated. Choose a window with window_model(alpha, r, n)."
            )
        self.model._check_site(self.i)
        self.model._check_site(self.j)


@dataclass
class PairCheck:
    """One evaluated inequality ``lhs <= rhs`` for a pair of sites."""

    i: int
    j: int
    n: int
    inequality: str
    lhs: float
    rhs: float
    ratio: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.rhs > 0:
            self.ratio = self.lhs / self.rhs
        else:
            self.ratio = 0.0 if self.lhs == 0 else math.inf
        self.passed = bool(self.lhs <= self.rhs * (1.0 + _REL_SLACK))

    def to_dict(self) -> Dict:
        """JSON-compatible representation, with the outcome under the key 'pass'."""
        record = asdict(self)
        record["pass"] = record.pop("passed")
        return record


@dataclass
class VerificationReport:
    """Per-pair outcomes of a verification sweep.

    Every evaluated inequality is recorded, failures included.
    """

    alpha: Alpha
    n_sites: int
    lam: float
    checks: List[PairCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Whether all recorded inequalities hold."""
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[PairCheck]:
        """The checks that did not hold, in evaluation order."""
        return [check for check in self.checks if not check.passed]

    def extend(self, other: "VerificationReport") -> None:
        """Append the checks of another report."""
        self.checks.extend(other.checks)

    def to_dict(self) -> Dict:
        """JSON-compatible representation."""
        return {
            "alpha": "inf" if math.isinf(self.alpha) else self.alpha,
            "n_sites": self.n_sites,
            "lambda": self.lam,
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failures": len(self.failures),
            "checks": [check.to_dict() for check in self.checks],
        }


def _as_float(lam: LambdaLike) -> float:
    return float(lam)


def hopping_sums(source: Site, n: int, model: CouplingModel) -> np.ndarray:
    """All n-th order hopping sums ``J_n(source, j)`` on a finite chain.

    Parameters
    ----------
    source : int
        The starting site ``i``.
    n : int
        The hopping order, at least 1.
    model : CouplingModel
        Couplings on a finite chain.

    Returns
    -------
    J_n : np.ndarray of shape (n_sites,)
        Entry ``j`` is ``(M^n)_{source, j}`` where ``M`` is the coupling matrix
        including the unit diagonal.

    Notes
    -----
    The internal sums are unrestricted: paths may revisit sites and may stop on
    either endpoint, exactly as in the definition of ``J_n``. The vector is
    obtained by ``n`` matrix-vector products seeded at ``source``, at a cost of
    ``O(n N^2)`` without storing a matrix power.
    """
    HopSeriesQuery(source, source, n, model)
    M = coupling_matrix(model)
    vec = np.zeros(model.n_sites)  # type: ignore
    vec[source] = 1.0
    for _ in range(n):
        vec = M @ vec
    return vec


def exact_Jn(query: HopSeriesQuery) -> float:
    """Exact n-th order hopping sum ``J_n(i, j)`` on a finite chain.

    Parameters
    ----------
    query : HopSeriesQuery
        The pair of sites, the order, and the finite-chain couplings.

    Returns
    -------
    J_n : float
        ``sum_{k_1..k_{n-1}} J_{i k_1} J_{k_1 k_2} ... J_{k_{n-1} j}``.

    Notes
    -----
    On a finite window every term of the infinite-chain sum is either kept or
    dropped, so the result never exceeds the infinite-chain value. Inequalities
    that hold for the infinite chain therefore remain falsifiable on windows.
    """
    return float(hopping_sums(query.i, query.n, query.model)[query.j])


def window_model(alpha: Alpha, r: int, n: int) -> Tuple[CouplingModel, Site, Site]:
    """Open chain of at least ``4 (r + n)`` sites with a pair at distance ``r`` centered.

    Returns
    -------
    model : CouplingModel
        The windowed couplings.
    i, j : int
        The two sites, placed symmetrically about the center of the window.
    """
    n_sites = 4 * (r + n) + 1
    i = (n_sites - 1 - r) // 2
    return CouplingModel(alpha=alpha, n_sites=n_sites), i, i + r


def _centered_Jn(alpha: Alpha, r: int, n: int, n_sites: int) -> float:
    i = (n_sites - 1 - r) // 2
    return exact_Jn(HopSeriesQuery(i, i + r, n, CouplingModel(alpha=alpha, n_sites=n_sites)))


def windowed_Jn(
    alpha: Alpha,
    r: int,
    n: int,
    n_sites: Optional[int] = None,
    rtol: float = 0.01,
    max_doublings: int = 4,
) -> float:
    """Hopping sum ``J_n`` at distance ``r`` on a finite window, doubled until converged.

    The sum is evaluated on a window of ``n_sites`` sites (default
    ``4 (r + n) + 1``) with the pair centered, then the window is doubled
    until the relative change drops to ``rtol`` or below. The value on the
    last window is returned.

    Parameters
    ----------
    alpha : float
        The decay exponent.
    r : int
        Distance between the two sites.
    n : int
        The hopping order.
    n_sites : int, optional
        Size of the first window.
    rtol : float
        Largest accepted relative change between two successive windows.
        Default is 1%.
    max_doublings : int
        How many times the window may be doubled. Default is 4.

    Returns
    -------
    J_n : float
        The hopping sum on the converged window.

    Raises
    ------
    RuntimeError
        If the relative change still exceeds ``rtol`` after ``max_doublings``
        doublings.
    """
    if int(max_doublings) != max_doublings or max_doublings < 1:
        raise RuntimeError(f"max_doublings must be a positive integer, got {max_doublings}.")
    if n_sites is None:
        n_sites = window_model(alpha, r, n)[0].n_sites
    elif n_sites < r + 1:
        raise RuntimeError(f"A window of {n_sites} sites cannot hold a pair at distance {r}.")

    value = _centered_Jn(alpha, r, n, n_sites)  # type: ignore
    change = math.inf
    for _ in range(max_doublings):
        n_sites = 2 * n_sites  # type: ignore
        big = _centered_Jn(alpha, r, n, n_sites)
        change = abs(big - value) / big if big > 0 else 0.0
        value = big
        if change <= rtol:
            logger.debug(f"J_{n} at r={r}, alpha={alpha} converged on {n_sites} sites")
            return value
    raise RuntimeError(
        f"J_{n} at r={r}, alpha={alpha} did not converge to rtol={rtol}: it still changed "
        f"by {change:.2%} when doubling the window to {n_sites} sites. Raise max_doublings "
        f"or start from a larger window."
    )


def hk_Jn_bound(n: int, r: float, lam: LambdaLike, alpha: Alpha) -> float:
    """Bound ``(2 lambda 2^alpha)^(n-1) / r^alpha`` from iterating the reproducibility condition.

    Parameters
    ----------
    n : int
        The hopping order, at least 1.
    r : float
        The distance, at least 1.
    lam : Lambda | float
        The summed coupling.
    alpha : float
        The finite coupling exponent.

    Returns
    -------
    bound : float
        An upper bound on ``J_n(i, j)`` for ``r_ij = r``.
    """
    if math.isinf(alpha):
        raise RuntimeError(
            "The reproducibility bound involves 2^alpha and is undefined for "
            "nearest-neighbor couplings; use trivial_Jn_bound instead."
        )
    _check_order_distance(n, r)
    return (2.0 * _as_float(lam) * 2.0**alpha) ** (n - 1) * r ** (-alpha)


def new_Jn_bound(n: int, r: int, lam: LambdaLike, alpha: Alpha) -> float:
    """Bound ``(12 lambda)^(n-1) (r - n + 1)^-alpha`` with nearest-neighbor hops separated.

    Parameters
    ----------
    n : int
        The hopping order, ``1 <= n <= r``.
    r : int
        The distance.
    lam : Lambda | float
        The summed coupling.
    alpha : float
        The coupling exponent; ``math.inf`` for nearest-neighbor couplings.

    Returns
    -------
    bound : float
        An upper bound on ``J_n(i, j)`` for ``r_ij = r``.

    Notes
    -----
    The bound is only valid when ``n <= r``; beyond that ``r - n + 1`` is no
    longer a distance and the estimate fails.
    """
    _check_order_distance(n, r)
    if n > r:
        raise RuntimeError(
            f"The bound (12 lambda)^(n-1) (r-n+1)^-alpha only holds for n <= r, got "
            f"n={n} and r={r}. Use trivial_Jn_bound for higher orders."
        )
    remaining = r - n + 1
    if math.isinf(alpha):
        decay = 1.0 if remaining == 1 else 0.0
    else:
        decay = remaining ** (-alpha)
    return (12.0 * _as_float(lam)) ** (n - 1) * decay


def trivial_Jn_bound(n: int, lam: LambdaLike) -> float:
    """Bound ``lambda^(n-1)`` valid at any distance."""
    if int(n) != n or n < 1:
        raise RuntimeError(f"The hopping order must be a positive integer, got n={n}.")
    return _as_float(lam) ** (n - 1)


def _check_order_distance(n: int, r: float) -> None:
    if int(n) != n or n < 1:
        raise RuntimeError(f"The hopping order must be a positive integer, got n={n}.")
    if r < 1:
        raise RuntimeError(f"Bounds on J_n need distinct sites (r >= 1), got r={r}.")


def verify_reproducibility(
    model: CouplingModel,
    max_r: int,
    lambda_mode: LambdaMode = LambdaMode.INFINITE_LATTICE,
) -> VerificationReport:
    """Evaluate both reproducibility conditions for every pair up to distance ``max_r``.

    For every ordered pair ``(i, j)`` of the chain with ``1 <= r_ij <= max_r``
    the two sides of::

        sum_k J_ik J_kj <= 2 lambda 2^alpha J_ij                   (finite alpha)
        sum_k J_ik J_kj <= 4 lambda sum_{r_ik <= 1} J_ik J_kj

    are computed numerically and recorded with their ratio. Pairs next to the
    edges of an open chain are included.

    Parameters
    ----------
    model : CouplingModel
        Couplings on a finite chain. Truncating the infinite chain only lowers
        the left-hand sides.
    max_r : int
        The largest distance checked.
    lambda_mode : str | LambdaMode
        Which lambda enters the right-hand sides. Default is 'infinite-lattice'.

    Returns
    -------
    report : VerificationReport
        One check per ordered pair and inequality, named 'hk-reproducibility'
        and 'nn-reproducibility'. An open chain of ``N`` sites has
        ``2 (N - r)`` ordered pairs at distance ``r``. Failures are reported,
        never dropped.
    """
    if not model.is_finite:
        raise RuntimeError("Reproducibility is verified on a finite window of the chain.")
    if max_r + 2 >= model.n_sites:  # type: ignore
        raise RuntimeError(
            f"A window of {model.n_sites} sites is too small for distances up to {max_r}."
        )
    lam = lambda_constant(model, lambda_mode).value
    M = coupling_matrix(model)
    G = lattice_graph(model)

    # indicator of k in the unit shell of i: the site itself and its graph neighbors
    shell = np.zeros_like(M)
    for site in G:
        shell[site, unit_shell(G, site)] = 1.0
    lhs = M @ M
    nn_rhs = 4.0 * lam * ((shell * M) @ M)
    if not model.is_nearest_neighbor:
        hk_rhs = 2.0 * lam * 2.0**model.alpha * M

    dist = distance_matrix(model)
    report = VerificationReport(alpha=model.alpha, n_sites=model.n_sites, lam=lam)  # type: ignore
    for i, j in np.argwhere((dist >= 1) & (dist <= max_r)):
        i, j = int(i), int(j)
        if not model.is_nearest_neighbor:
            report.checks.append(
                PairCheck(i, j, 2, "hk-reproducibility", float(lhs[i, j]), float(hk_rhs[i, j]))
            )
        report.checks.append(
            PairCheck(i, j, 2, "nn-reproducibility", float(lhs[i, j]), float(nn_rhs[i, j]))
        )

    n_failed = len(report.failures)
    logger.info(
        f"reproducibility alpha={model.alpha}: {len(report.checks)} checks, {n_failed} failed"
    )
    return report


def verify_hopping_bounds(
    model: CouplingModel,
    max_r: int,
    max_n: int,
    lambda_mode: LambdaMode = LambdaMode.INFINITE_LATTICE,
) -> VerificationReport:
    """Compare exact hopping sums with every analytic bound on them.

    From the center site ``c`` of the window, ``J_n(c, c + r)`` is computed for
    all ``1 <= n <= max_n`` and ``1 <= r <= max_r`` and checked against
    :func:`hk_Jn_bound` (finite alpha), :func:`new_Jn_bound` (``n <= r``) and
    :func:`trivial_Jn_bound`.

    Parameters
    ----------
    model : CouplingModel
        Couplings on a finite open chain.
    max_r : int
        The largest distance.
    max_n : int
        The largest hopping order.
    lambda_mode : str | LambdaMode
        Which lambda enters the bounds. Default is 'infinite-lattice'.

    Returns
    -------
    report : VerificationReport
        One check per (n, r, bound), named 'hk-bound', 'new-bound' and
        'trivial-bound'.
    """
    if not model.is_finite:
        raise RuntimeError("Hopping sums are verified on a finite window of the chain.")
    center = (model.n_sites - 1) // 2  # type: ignore
    if center + max_r >= model.n_sites:  # type: ignore
        raise RuntimeError(
            f"A window of {model.n_sites} sites is too small for distances up to {max_r}."
        )
    lam = lambda_constant(model, lambda_mode).value
    M = coupling_matrix(model)

    report = VerificationReport(alpha=model.alpha, n_sites=model.n_sites, lam=lam)  # type: ignore
    vec = np.zeros(model.n_sites)  # type: ignore
    vec[center] = 1.0
    for n in range(1, max_n + 1):
        vec = M @ vec
        for r in range(1, max_r + 1):
            j = center + r
            lhs = float(vec[j])
            if not model.is_nearest_neighbor:
                rhs = hk_Jn_bound(n, r, lam, model.alpha)
                report.checks.append(PairCheck(center, j, n, "hk-bound", lhs, rhs))
            if n <= r:
                rhs = new_Jn_bound(n, r, lam, model.alpha)
                report.checks.append(PairCheck(center, j, n, "new-bound", lhs, rhs))
            rhs = trivial_Jn_bound(n, lam)
            report.checks.append(PairCheck(center, j, n, "trivial-bound", lhs, rhs))
    return report

