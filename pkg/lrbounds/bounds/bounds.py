import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.special import gammaln, logsumexp

from ..config import (
    COMPLIANCE_ATOL,
    CONTOUR_RTOL,
    EXP_OVERFLOW_GUARD,
    MU_GRID_BOUNDS,
    MU_GRID_SIZE,
    MU_REFINE_TOL,
    LambdaMode,
    MuMode,
)
from ..lattice import CouplingModel, lambda_constant
from ..typing import Alpha
from .hopseries import PairCheck, VerificationReport

logger = logging.getLogger()

__all__ = [
    "BoundConstants",
    "MuPolicy",
    "HybridBound",
    "ceil_mu_r",
    "short_range_term",
    "long_range_term",
    "short_range_log_term",
    "long_range_log_term",
    "hybrid_bound",
    "hk_bound",
    "log10_hk_bound",
    "causal_contour",
    "hk_contour",
    "crossover_rc",
    "long_range_log_partial_sum",
    "short_range_log_partial_sum",
    "bound_compliance",
    "verify_partial_sums",
]

_LN10 = math.log(10.0)


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the hybrid and Hastings-Koma bounds for one exponent.

    Attributes
    ----------
    alpha : float
        The coupling exponent (``math.inf`` for nearest-neighbor couplings).
    lam : float
        The summed coupling ``lambda``.
    c1, v1 : float
        Prefactor ``1 / lambda`` and velocity ``2 e lambda^2`` of the
        short-range (exponentially decaying) term.
    c2, v2 : float
        Prefactor ``1 / (12 lambda)`` and velocity ``24 lambda^2`` of the
        long-range (algebraically decaying) term.
    hk_c, hk_v : float | None
        Prefactor ``1 / (2 lambda 2^alpha)`` and velocity ``4 lambda^2 2^alpha``
        of the Hastings-Koma bound. None for nearest-neighbor couplings.
    equal_velocities : bool
        Whether ``v1`` was raised to ``v2``.
    """

    alpha: Alpha
    lam: float
    c1: float
    v1: float
    c2: float
    v2: float
    hk_c: Optional[float] = None
    hk_v: Optional[float] = None
    equal_velocities: bool = False

    @classmethod
    def from_model(
        cls,
        model: CouplingModel,
        lambda_mode: LambdaMode = LambdaMode.INFINITE_LATTICE,
        equal_velocities: bool = False,
    ) -> "BoundConstants":
        """Derive the constants from the summed coupling of a model.

        Parameters
        ----------
        model : CouplingModel
            The coupling model.
        lambda_mode : str | LambdaMode
            Which lambda to use. The default 'infinite-lattice' value keeps the
            bounds valid for any chain length.
        equal_velocities : bool
            If True, the short-range velocity is raised to ``v2``. This loosens
            the short-range term, so the bound stays valid, and makes the
            balance between the two terms independent of time. Default False.

        Returns
        -------
        constants : BoundConstants
        """
        lam = lambda_constant(model, lambda_mode).value
        v2 = 24.0 * lam**2
        v1 = v2 if equal_velocities else 2.0 * lam**2 * math.e
        hk_c = hk_v = None
        if not model.is_nearest_neighbor:
            hk_c = 1.0 / (2.0 * lam * 2.0**model.alpha)
            hk_v = 4.0 * lam**2 * 2.0**model.alpha
        return cls(
            alpha=model.alpha,
            lam=lam,
            c1=1.0 / lam,
            v1=v1,
            c2=1.0 / (12.0 * lam),
            v2=v2,
            hk_c=hk_c,
            hk_v=hk_v,
            equal_velocities=equal_velocities,
        )

    @classmethod
    def from_alpha(cls, alpha: Alpha, equal_velocities: bool = False) -> "BoundConstants":
        """Constants for the infinite chain with exponent ``alpha``."""
        return cls.from_model(CouplingModel.infinite(alpha), equal_velocities=equal_velocities)

    @property
    def is_nearest_neighbor(self) -> bool:
        """Whether the long-range term vanishes identically."""
        return math.isinf(self.alpha)


@dataclass(frozen=True)
class MuPolicy:
    """How the splitting parameter ``mu`` of the hybrid bound is chosen.

    Use :meth:`fixed` for a single ``mu`` in (0, 1) and :meth:`optimized` to
    minimize the bound at every (r, t).
    """

    mode: MuMode
    mu: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MuMode:
            raise RuntimeError(
                f"Unrecognized mu policy {self.mode}. Use one of {[m.value for m in MuMode]}."
            )
        object.__setattr__(self, "mode", MuMode(self.mode))
        if self.mode == MuMode.FIXED:
            if self.mu is None or not 0.0 < self.mu < 1.0:
                raise RuntimeError(f"A fixed mu must lie strictly inside (0, 1), got {self.mu}.")

    @classmethod
    def fixed(cls, mu: float) -> "MuPolicy":
        """Hold ``mu`` fixed."""
        return cls(MuMode.FIXED, float(mu))

    @classmethod
    def optimized(cls) -> "MuPolicy":
        """Optimize ``mu`` at every point."""
        return cls(MuMode.OPTIMIZED)


class HybridBound(NamedTuple):
    """Value of the hybrid bound at one (r, t).

    ``value`` is capped at 1; ``log10_raw`` is the uncapped value's logarithm,
    which stays finite where the raw exponentials overflow.
    """

    value: float
    mu_used: float
    term_short: float
    term_long: float
    log10_raw: float


def ceil_mu_r(mu: float, r: float) -> int:
    """Smallest integer ``>= mu r``, exact when ``mu r`` is an integer."""
    # rounding removes representation noise such as 0.1 * 30 = 3.0000000000000004
    return int(math.ceil(round(mu * r, 9)))


def _log_expm1(x):
    """``log(e^x - 1)`` for ``x >= 0``, without overflow."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.expm1(np.minimum(x, 50.0)))
        large = x + np.log1p(-np.exp(-np.maximum(x, 50.0)))
    return np.where(x > 50.0, large, small)


def _safe_exp(log_value: float) -> float:
    if log_value > EXP_OVERFLOW_GUARD:
        return math.inf
    return math.exp(log_value)


def _check_point(r: float, t: float, mu: Optional[float] = None) -> None:
    if r < 1:
        raise RuntimeError(f"Bounds are stated for distances r >= 1, got r={r}.")
    if t < 0:
        raise RuntimeError(f"Bounds are stated for times t >= 0, got t={t}.")
    if mu is not None and not 0.0 < mu < 1.0:
        raise RuntimeError(f"mu must lie strictly inside (0, 1), got {mu}.")


def short_range_log_term(r: float, t: float, mu, constants: BoundConstants):
    """Natural log of the short-range term; ``mu`` may be an array."""
    mu = np.asarray(mu, dtype=float)
    log_value = math.log(constants.c1) + _log_expm1(constants.v1 * t) - mu * r
    return log_value if log_value.ndim else float(log_value)


def long_range_log_term(r: float, t: float, mu, constants: BoundConstants):
    """Natural log of the long-range term; ``mu`` may be an array."""
    mu = np.asarray(mu, dtype=float)
    if constants.is_nearest_neighbor:
        log_value = np.full(mu.shape, -np.inf)
    else:
        log_value = (
            math.log(constants.c2)
            + _log_expm1(constants.v2 * t)
            - constants.alpha * np.log((1.0 - mu) * r)
        )
    return log_value if log_value.ndim else float(log_value)


def short_range_term(r: float, t: float, mu: float, constants: BoundConstants) -> float:
    """Short-range term ``c1 (e^{v1 t} - 1) e^{-mu r}`` of the hybrid bound.

    Parameters
    ----------
    r : float
        The distance, at least 1.
    t : float
        The time, non-negative.
    mu : float
        The splitting parameter in (0, 1).
    constants : BoundConstants
        The bound constants.

    Returns
    -------
    term : float
        The uncapped term; ``inf`` when it overflows.
    """
    _check_point(r, t, mu)
    return _safe_exp(short_range_log_term(r, t, mu, constants))


def long_range_term(r: float, t: float, mu: float, constants: BoundConstants) -> float:
    """Long-range term ``c2 (e^{v2 t} - 1) / [(1 - mu) r]^alpha`` of the hybrid bound.

    Vanishes identically for nearest-neighbor couplings.

    Parameters
    ----------
    r : float
        The distance, at least 1.
    t : float
        The time, non-negative.
    mu : float
        The splitting parameter in (0, 1).
    constants : BoundConstants
        The bound constants.

    Returns
    -------
    term : float
        The uncapped term; ``inf`` when it overflows.
    """
    _check_point(r, t, mu)
    return _safe_exp(long_range_log_term(r, t, mu, constants))


def _log_hybrid(r: float, t: float, mu, constants: BoundConstants):
    return np.logaddexp(
        short_range_log_term(r, t, mu, constants), long_range_log_term(r, t, mu, constants)
    )


def _optimal_mu(r: float, t: float, constants: BoundConstants) -> Tuple[float, float]:
    """Minimize the log of the hybrid bound over mu; returns ``(mu, log_bound)``."""
    grid = np.linspace(MU_GRID_BOUNDS[0], MU_GRID_BOUNDS[1], MU_GRID_SIZE)
    values = _log_hybrid(r, t, grid, constants)
    best = int(np.argmin(values))
    mu, log_bound = float(grid[best]), float(values[best])

    # refine only inside a strict bracket; edge minima stay on the grid edge
    if 0 < best < MU_GRID_SIZE - 1 and values[best] < min(values[best - 1], values[best + 1]):
        res = minimize_scalar(
            lambda x: float(_log_hybrid(r, t, x, constants)),
            bracket=(grid[best - 1], grid[best], grid[best + 1]),
            method="golden",
            tol=MU_REFINE_TOL,
        )
        if MU_GRID_BOUNDS[0] <= res.x <= MU_GRID_BOUNDS[1] and res.fun <= log_bound:
            mu, log_bound = float(res.x), float(res.fun)
    return mu, log_bound


def hybrid_bound(
    r: float, t: float, policy: MuPolicy, constants: BoundConstants
) -> HybridBound:
    """Hybrid bound on the quench signal at distance ``r`` and time ``t``.

    The bound is the sum of :func:`short_range_term` and
    :func:`long_range_term`. With an optimized policy, ``mu`` is chosen by a
    64-point grid on [0.01, 0.99] followed by golden-section refinement to
    1e-6.

    Parameters
    ----------
    r : float
        The distance, at least 1.
    t : float
        The time, non-negative.
    policy : MuPolicy
        Fixed or optimized ``mu``.
    constants : BoundConstants
        The bound constants.

    Returns
    -------
    bound : HybridBound
        The bound capped at 1, the ``mu`` used, both uncapped terms, and the
        base-10 logarithm of the uncapped bound.
    """
    _check_point(r, t)
    if policy.mode == MuMode.FIXED:
        mu = policy.mu
        log_bound = float(_log_hybrid(r, t, mu, constants))
    elif t == 0:
        mu, log_bound = 0.5, -math.inf
    else:
        mu, log_bound = _optimal_mu(r, t, constants)

    return HybridBound(
        value=min(1.0, _safe_exp(log_bound)),
        mu_used=float(mu),  # type: ignore
        term_short=_safe_exp(short_range_log_term(r, t, mu, constants)),
        term_long=_safe_exp(long_range_log_term(r, t, mu, constants)),
        log10_raw=log_bound / _LN10,
    )


def _log_hk(r: float, t: float, constants: BoundConstants) -> float:
    if constants.is_nearest_neighbor:
        raise RuntimeError(
            "The Hastings-Koma bound requires a finite alpha; its velocity grows as "
            "2^alpha and diverges for nearest-neighbor couplings."
        )
    return float(
        math.log(constants.hk_c)  # type: ignore
        + _log_expm1(constants.hk_v * t)  # type: ignore
        - constants.alpha * math.log(r)
    )


def hk_bound(r: float, t: float, constants: BoundConstants) -> float:
    """Hastings-Koma bound ``c (e^{v t} - 1) / r^alpha``, capped at 1.

    Parameters
    ----------
    r : float
        The distance, at least 1.
    t : float
        The time, non-negative.
    constants : BoundConstants
        The bound constants of a finite alpha.

    Returns
    -------
    bound : float
        The capped bound.
    """
    _check_point(r, t)
    return min(1.0, _safe_exp(_log_hk(r, t, constants)))


def log10_hk_bound(r: float, t: float, constants: BoundConstants) -> float:
    """Base-10 logarithm of the uncapped Hastings-Koma bound."""
    _check_point(r, t)
    return _log_hk(r, t, constants) / _LN10


def _solve_contour(log_bound, epsilon: float) -> float:
    """Time at which a continuous, increasing log-bound reaches ``log(epsilon)``."""
    target = math.log(epsilon)

    def excess(t: float) -> float:
        if t <= 0:
            return -1.0
        return log_bound(t) - target

    upper = 1.0
    while excess(upper) < 0:
        upper *= 2.0
        if upper > 1e12:
            raise RuntimeError(f"The bound never reaches epsilon={epsilon}.")
    return float(bisect(excess, 0.0, upper, xtol=1e-300, rtol=CONTOUR_RTOL, maxiter=2000))


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise RuntimeError(f"The contour level must lie strictly inside (0, 1), got {epsilon}.")


def causal_contour(
    epsilon: float,
    r_values: Sequence[float],
    policy: MuPolicy,
    constants: BoundConstants,
) -> List[Tuple[float, float]]:
    """Boundary of the causal region where the hybrid bound equals ``epsilon``.

    For every distance the bound is continuous, zero at ``t = 0`` and strictly
    increasing in ``t``, so the crossing time is found by bracketing (doubling
    the upper end until the uncapped bound exceeds ``epsilon``) and bisection
    to a relative tolerance of 1e-9 in ``t``.

    Parameters
    ----------
    epsilon : float
        The level, in (0, 1).
    r_values : sequence of float
        Distances, each at least 1.
    policy : MuPolicy
        Fixed or optimized ``mu``.
    constants : BoundConstants
        The bound constants.

    Returns
    -------
    contour : list of (r, t)
        The crossing time ``t*`` for each distance.
    """
    _check_epsilon(epsilon)
    contour = []
    for r in r_values:
        _check_point(r, 0.0)
        if policy.mode == MuMode.FIXED:

            def log_bound(t, r=r):
                return float(_log_hybrid(r, t, policy.mu, constants))

        else:

            def log_bound(t, r=r):
                return _optimal_mu(r, t, constants)[1]

        contour.append((float(r), _solve_contour(log_bound, epsilon)))
    logger.info(f"causal contour alpha={constants.alpha}: {len(contour)} points")
    return contour


def hk_contour(
    epsilon: float, r_values: Sequence[float], constants: BoundConstants
) -> List[Tuple[float, float]]:
    """Boundary of the causal region where the Hastings-Koma bound equals ``epsilon``."""
    _check_epsilon(epsilon)
    contour = []
    for r in r_values:
        _check_point(r, 0.0)
        t_star = _solve_contour(lambda t, r=r: _log_hk(r, t, constants), epsilon)
        contour.append((float(r), t_star))
    return contour


def crossover_rc(t: float, mu: float, constants: BoundConstants) -> float:
    """Distance beyond which the long-range term dominates the short-range one.

    The log-ratio of the two terms, ``const + mu r - alpha log r``, is convex in
    ``r`` with its minimum at ``alpha / mu``. The crossover is the root above
    that minimum, found by doubling the upper end and bisection on real ``r``.

    Parameters
    ----------
    t : float
        The time, positive.
    mu : float
        The splitting parameter in (0, 1).
    constants : BoundConstants
        The bound constants.

    Returns
    -------
    r_c : float
        The crossover distance; 1.0 when the long-range term dominates at every
        ``r >= 1``, and ``inf`` for nearest-neighbor couplings.
    """
    if t <= 0:
        raise RuntimeError(f"The crossover is defined for t > 0, got t={t}.")
    _check_point(1.0, t, mu)
    if constants.is_nearest_neighbor:
        return math.inf

    def log_ratio(r: float) -> float:
        return long_range_log_term(r, t, mu, constants) - short_range_log_term(
            r, t, mu, constants
        )

    lower = max(1.0, constants.alpha / mu)
    if log_ratio(lower) >= 0:
        return 1.0
    upper = 2.0 * lower
    while log_ratio(upper) < 0:
        lower, upper = upper, 2.0 * upper
    return float(bisect(log_ratio, lower, upper, xtol=1e-300, rtol=1e-14, maxiter=2000))


def long_range_log_partial_sum(r: int, t: float, mu: float, constants: BoundConstants) -> float:
    """Log of the low-order series terms bounded through ``new_Jn_bound``.

    Returns ``log sum_{n=1}^{ceil(mu r) - 1} (2 lambda t)^n / n! (12 lambda)^(n-1)
    (r - n + 1)^-alpha``, which never exceeds :func:`long_range_log_term`.
    """
    _check_point(r, t, mu)
    n_max = ceil_mu_r(mu, r) - 1
    if n_max < 1 or t == 0 or constants.is_nearest_neighbor:
        return -math.inf
    n = np.arange(1, n_max + 1, dtype=float)
    lam = constants.lam
    log_terms = (
        n * math.log(2.0 * lam * t)
        - gammaln(n + 1.0)
        + (n - 1.0) * math.log(12.0 * lam)
        - constants.alpha * np.log(r - n + 1.0)
    )
    return float(logsumexp(log_terms))


def short_range_log_partial_sum(
    r: int, t: float, mu: float, constants: BoundConstants, n_cut: int
) -> float:
    """Log of the high-order series terms bounded through ``trivial_Jn_bound``.

    Returns ``log sum_{n=ceil(mu r)}^{n_cut} (2 lambda t)^n / n! lambda^(n-1)``,
    which never exceeds :func:`short_range_log_term` for any ``n_cut``.
    """
    _check_point(r, t, mu)
    n_min = max(1, ceil_mu_r(mu, r))
    if n_cut < n_min or t == 0:
        return -math.inf
    n = np.arange(n_min, n_cut + 1, dtype=float)
    lam = constants.lam
    log_terms = n * math.log(2.0 * lam * t) - gammaln(n + 1.0) + (n - 1.0) * math.log(lam)
    return float(logsumexp(log_terms))


def bound_compliance(
    r: Sequence[float],
    t: Sequence[float],
    q: Sequence[float],
    constants: BoundConstants,
    policy: MuPolicy,
) -> Dict[str, np.ndarray]:
    """Compare measured signals with the hybrid and Hastings-Koma bounds.

    Parameters
    ----------
    r, t, q : sequence of float
        Distances, times and measured signals, one entry per row.
    constants : BoundConstants
        The bound constants.
    policy : MuPolicy
        Fixed or optimized ``mu`` for the hybrid bound.

    Returns
    -------
    columns : dict of str to np.ndarray
        'hybrid_bound', 'mu', 'hk_bound' (NaN for nearest-neighbor couplings)
        and 'compliant', which is True where the signal lies below every bound up
        to the round-off floor :data:`lrbounds.config.COMPLIANCE_ATOL`.
        Rows with ``r < 1`` are compliant by convention.
    """
    r, t, q = (np.asarray(x, dtype=float) for x in (r, t, q))
    hybrid = np.full(r.shape, np.nan)
    mu_used = np.full(r.shape, np.nan)
    hk = np.full(r.shape, np.nan)
    compliant = np.ones(r.shape, dtype=bool)

    for idx in range(r.size):
        if r[idx] < 1:
            continue
        bound = hybrid_bound(r[idx], t[idx], policy, constants)
        hybrid[idx], mu_used[idx] = bound.value, bound.mu_used
        ok = q[idx] <= bound.value + COMPLIANCE_ATOL
        if not constants.is_nearest_neighbor:
            hk[idx] = hk_bound(r[idx], t[idx], constants)
            ok = ok and q[idx] <= hk[idx] + COMPLIANCE_ATOL
        compliant[idx] = ok

    n_bad = int(np.count_nonzero(~compliant))
    if n_bad:
        logger.warning(f"{n_bad} of {r.size} rows exceed a bound at alpha={constants.alpha}")
    return {"hybrid_bound": hybrid, "mu": mu_used, "hk_bound": hk, "compliant": compliant}


def verify_partial_sums(
    constants: BoundConstants,
    mus: Sequence[float],
    max_r: int,
    times: Sequence[float],
    extra_orders: int = 200,
) -> VerificationReport:
    """Check that the truncated series never exceed the closed-form terms.

    For every ``mu``, ``1 <= r <= max_r`` and time, the low-order partial sum
    is compared with :func:`long_range_term` (finite alpha) and the high-order
    partial sum, truncated ``extra_orders`` orders past ``ceil(mu r)``, with
    :func:`short_range_term`.

    Parameters
    ----------
    constants : BoundConstants
        The bound constants.
    mus : sequence of float
        Splitting parameters in (0, 1).
    max_r : int
        The largest distance.
    times : sequence of float
        Non-negative times.
    extra_orders : int
        Orders kept beyond ``ceil(mu r)`` in the high-order sum. Default is 200.

    Returns
    -------
    report : VerificationReport
        One check per point, named 'long-partial-sum' and 'short-partial-sum',
        with ``i = 0``, ``j = r`` and ``n`` the last order summed.
    """
    report = VerificationReport(alpha=constants.alpha, n_sites=0, lam=constants.lam)
    for mu in mus:
        for r in range(1, max_r + 1):
            n_split = ceil_mu_r(mu, r)
            for t in times:
                if not constants.is_nearest_neighbor:
                    lhs = _safe_exp(long_range_log_partial_sum(r, t, mu, constants))
                    rhs = _safe_exp(long_range_log_term(r, t, mu, constants))
                    report.checks.append(
                        PairCheck(0, r, n_split - 1, "long-partial-sum", lhs, rhs)
                    )
                n_cut = n_split + extra_orders
                lhs = _safe_exp(short_range_log_partial_sum(r, t, mu, constants, n_cut))
                rhs = _safe_exp(short_range_log_term(r, t, mu, constants))
                report.checks.append(PairCheck(0, r, n_cut, "short-partial-sum", lhs, rhs))
    logger.info(
        f"partial sums alpha={constants.alpha}: {len(report.checks)} checks, "
        f"{len(report.failures)} failed"
    )
    return report
