import numpy as np

from ..typing import TimeGrid


def check_times(times: TimeGrid) -> np.ndarray:
    """Validate a time grid and return it as a float array.

    Parameters
    ----------
    times : sequence of float
        Measurement times.

    Returns
    -------
    times : np.ndarray
        The same times, as a one-dimensional array.

    Raises
    ------
    RuntimeError
        If any time is negative or the grid is not sorted ascending.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or times.size == 0:
        raise RuntimeError("Times must form a non-empty one-dimensional grid.")
    if np.any(~np.isfinite(times)) or np.any(times < 0):
        raise RuntimeError(f"Times must be finite and non-negative, got {times}.")
    if np.any(np.diff(times) < 0):
        raise RuntimeError("Times must be sorted in ascending order.")
    return times
