import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

logger = logging.getLogger()

__all__ = ["PowerLawFit", "spatial_decay_exponent", "time_growth_exponent", "peak_distance"]


class PowerLawFit(NamedTuple):
    """Least-squares line through ``(log x, log y)``."""

    exponent: float
    prefactor: float
    stderr: float
    n_points: int


def _loglog_fit(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> PowerLawFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise RuntimeError(f"Abscissa {x.shape} and signal {y.shape} shapes differ.")
    mask = (x >= lo) & (x <= hi) & (x > 0) & (y > 0)
    if mask.sum() < 2:
        raise RuntimeError(
            f"Need at least two positive points in [{lo}, {hi}] to fit a power law, "
            f"got {int(mask.sum())}."
        )
    fit = stats.linregress(np.log(x[mask]), np.log(y[mask]))
    return PowerLawFit(
        exponent=float(fit.slope),
        prefactor=float(np.exp(fit.intercept)),
        stderr=float(fit.stderr),
        n_points=int(mask.sum()),
    )


def spatial_decay_exponent(
    r: np.ndarray, q: np.ndarray, r_min: float = 1.0, r_max: Optional[float] = None
) -> PowerLawFit:
    """Fit ``Q_r ~ A r^s`` at fixed time over ``r_min <= r <= r_max``.

    Parameters
    ----------
    r : np.ndarray
        Distances.
    q : np.ndarray
        Signal at those distances.
    r_min, r_max : float
        Fit window. ``r_max`` defaults to the largest distance.

    Returns
    -------
    fit : PowerLawFit
        The log-log slope ``s`` (negative for a decaying signal) and prefactor.
        Points with vanishing signal are skipped.
    """
    r_max = float(np.max(r)) if r_max is None else r_max
    return _loglog_fit(r, q, r_min, r_max)


def time_growth_exponent(
    t: np.ndarray, q: np.ndarray, t_min: float = 0.0, t_max: Optional[float] = None
) -> PowerLawFit:
    """Fit ``Q_r(t) ~ A t^p`` at fixed distance; see :func:`spatial_decay_exponent`."""
    t_max = float(np.max(t)) if t_max is None else t_max
    return _loglog_fit(t, q, t_min, t_max)


def peak_distance(r: np.ndarray, q: np.ndarray, r_min: float = 1.0) -> int:
    """Distance at which the signal is largest, ignoring ``r < r_min``."""
    r = np.asarray(r)
    q = np.asarray(q)
    mask = r >= r_min
    return int(r[mask][np.argmax(q[mask])])
