import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from ..config import (
    DEFAULT_KRYLOV_DIM,
    DEFAULT_KRYLOV_DT,
    DEFAULT_KRYLOV_TOL,
    MAX_KRYLOV_HALVINGS,
)

logger = logging.getLogger()

__all__ = ["KrylovConfig", "lanczos_expm", "krylov_evolve"]


@dataclass(frozen=True)
class KrylovConfig:
    """Parameters of the Lanczos propagator.

    Parameters
    ----------
    m : int
        Largest Krylov subspace dimension per step. Default is 30.
    dt : float
        Largest time step. Default is 0.05.
    tol : float
        Tolerance on the per-step error indicator. Default is 1e-10.
    """

    m: int = DEFAULT_KRYLOV_DIM
    dt: float = DEFAULT_KRYLOV_DT
    tol: float = DEFAULT_KRYLOV_TOL

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise RuntimeError(f"The Krylov dimension must be an integer >= 2, got m={self.m}.")
        if not self.dt > 0:
            raise RuntimeError(f"The Krylov step must be positive, got dt={self.dt}.")
        if not self.tol > 0:
            raise RuntimeError(f"The Krylov tolerance must be positive, got tol={self.tol}.")
        object.__setattr__(self, "m", int(self.m))


def _tridiagonal_propagator(alphas: List[float], betas: List[float], tau: float) -> np.ndarray:
    """First column of ``exp(-i tau T)`` for the Lanczos matrix ``T``."""
    if len(alphas) == 1:
        return np.array([np.exp(-1j * alphas[0] * tau)])
    energies, vecs = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas))
    return vecs @ (np.exp(-1j * energies * tau) * vecs[0, :])


def lanczos_expm(
    hamiltonian: LinearOperator, state: np.ndarray, tau: float, m: int, tol: float
) -> Tuple[np.ndarray, float, int]:
    """Approximate ``exp(-i tau H) state`` in a Krylov subspace.

    The Lanczos recursion is run with full reorthogonalization (two classical
    Gram-Schmidt passes against the whole basis). After each new vector the
    error indicator ``||state|| beta_j |e_j^T exp(-i tau T_j) e_1|`` is
    evaluated, and the recursion stops as soon as it drops below ``tol``, on an
    invariant subspace, or at dimension ``m``.

    Parameters
    ----------
    hamiltonian : LinearOperator
        Hermitian operator.
    state : np.ndarray
        Vector to propagate.
    tau : float
        Time step.
    m : int
        Largest subspace dimension.
    tol : float
        Target for the error indicator.

    Returns
    -------
    propagated : np.ndarray
        The approximation of ``exp(-i tau H) state``.
    error : float
        The error indicator of the returned approximation.
    dim : int
        Subspace dimension used.
    """
    norm = float(np.linalg.norm(state))
    if norm == 0.0 or tau == 0.0:
        return state.astype(complex), 0.0, 0

    basis = [state.astype(complex) / norm]
    alphas: List[float] = []
    betas: List[float] = []
    while True:
        j = len(basis) - 1
        w = np.asarray(hamiltonian.matvec(basis[j])).reshape(-1)
        alphas.append(float(np.vdot(basis[j], w).real))
        for _ in range(2):
            for vec in basis:
                w -= np.vdot(vec, w) * vec
        beta = float(np.linalg.norm(w))

        coeffs = _tridiagonal_propagator(alphas, betas, tau)
        # invariant subspace reached; the projection is exact
        if beta <= 1e-13 * max(1.0, abs(alphas[-1])):
            error = 0.0
        else:
            error = norm * beta * abs(coeffs[-1])
        if error <= tol or len(basis) == m:
            propagated = np.zeros_like(basis[0])
            for coeff, vec in zip(coeffs, basis):
                propagated += coeff * vec
            return norm * propagated, error, len(basis)

        betas.append(beta)
        basis.append(w / beta)


def krylov_evolve(
    state: np.ndarray,
    t_step: float,
    config: KrylovConfig,
    hamiltonian: LinearOperator,
) -> np.ndarray:
    """Evolve a state by ``exp(-i t_step H)`` with Lanczos substeps.

    The interval is covered by substeps of at most ``config.dt``. A substep whose
    error indicator exceeds ``config.tol`` is halved and retried.

    Parameters
    ----------
    state : np.ndarray
        Normalized state vector.
    t_step : float
        Total evolution time, non-negative.
    config : KrylovConfig
        Krylov dimension, largest substep and tolerance.
    hamiltonian : LinearOperator
        Hermitian operator acting on ``state``.

    Returns
    -------
    state : np.ndarray
        The evolved state.

    Raises
    ------
    RuntimeError
        If a substep still fails the tolerance after the allowed number of
        halvings.
    """
    if t_step < 0:
        raise RuntimeError(f"Krylov evolution needs a non-negative time step, got {t_step}.")
    hamiltonian = aslinearoperator(hamiltonian)
    if hamiltonian.shape[1] != state.size:
        raise RuntimeError(
            f"State of length {state.size} does not match an operator of shape "
            f"{hamiltonian.shape}."
        )
    psi = np.asarray(state, dtype=complex)

    elapsed = 0.0
    n_substeps = 0
    while t_step - elapsed > 1e-15 * max(1.0, t_step):
        tau = min(config.dt, t_step - elapsed)
        for halvings in range(MAX_KRYLOV_HALVINGS + 1):
            candidate, error, dim = lanczos_expm(hamiltonian, psi, tau, config.m, config.tol)
            if error <= config.tol:
                break
            if halvings == MAX_KRYLOV_HALVINGS:
                raise RuntimeError(
                    f"Krylov step did not converge after {MAX_KRYLOV_HALVINGS} halvings: "
                    f"step {tau}, error indicator {error:.3e}, tolerance {config.tol:.1e}, "
                    f"subspace dimension {config.m}. Increase m or reduce dt."
                )
            tau /= 2.0
            logger.info(f"Krylov step halved to {tau} (indicator {error:.3e})")
        logger.debug(f"Krylov substep tau={tau} dim={dim} indicator={error:.3e}")
        psi = candidate
        elapsed += tau
        n_substeps += 1
    logger.debug(f"Evolved over t={t_step} in {n_substeps} substeps")
    return psi
