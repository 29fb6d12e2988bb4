"""
Dense complex linear algebra for Galerkin propagators.

Exponentials of skew-Hermitian matrices go through the eigendecomposition of
the Hermitian matrix ``iM``. The decomposition is kept in a :class:`SkewEig`
so the same generator can be exponentiated for many durations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

SKEW_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_RTOL = 1e-8


def skew_defect(M: np.ndarray) -> float:
    """Largest entry of ``M + M^H``."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M + M.conj().T)))


@dataclass(frozen=True)
class SkewEig:
    """``M = V diag(-i theta) V^H`` with ``theta`` real."""

    theta: np.ndarray
    V: np.ndarray

    def expm(self, t: float) -> np.ndarray:
        return (self.V * np.exp(-1j * self.theta * t)) @ self.V.conj().T


def skew_eig(M: np.ndarray, tol: float = SKEW_TOL) -> SkewEig:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if skew_defect(M) > tol * scale:
        raise DomainError(f"matrix is not skew-Hermitian (defect {skew_defect(M):.3e})")
    H = 1j * M
    H = 0.5 * (H + H.conj().T)
    try:
        theta, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return SkewEig(theta, V)


def expm_skew(M: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Return the unitary ``exp(t M)`` for skew-Hermitian ``M``."""
    M = np.asarray(M, dtype=complex)
    if t == 0:
        return np.eye(M.shape[0], dtype=complex)
    return skew_eig(M).expm(t)


def op_norm(M: np.ndarray, rtol: float = NORM_RTOL, max_iter: int = 20000) -> float:
    """Largest singular value by power iteration on the smaller Gram matrix.

    The start vector is fixed, so repeated calls give identical results.
    Iteration stops once the eigen-residual of the Gram matrix is below
    ``rtol`` times its Rayleigh quotient.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        return float(np.max(np.abs(M))) if M.size else 0.0
    if M.size == 0 or not np.any(M):
        return 0.0
    if not np.all(np.isfinite(M)):
        raise NumericalError("non-finite matrix entries")
    G = M.conj().T @ M if M.shape[1] <= M.shape[0] else M @ M.conj().T
    n = G.shape[0]
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    residual = np.inf
    for _ in range(max_iter):
        w = G @ v
        rho = float(np.real(np.vdot(v, w)))
        residual = float(np.linalg.norm(w - rho * v))
        if rho <= 0:
            # start vector orthogonal to the range; restart along the largest column
            v = G[:, int(np.argmax(np.linalg.norm(G, axis=0)))].copy()
            v /= np.linalg.norm(v)
            continue
        if residual <= rtol * rho:
            return float(np.sqrt(rho))
        v = w / np.linalg.norm(w)
    raise NumericalError(
        f"power iteration did not converge in {max_iter} iterations", residual=residual
    )


def apply(M: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Apply ``M`` to column states. A 1-D ``M`` is treated as a diagonal."""
    M = np.asarray(M)
    states = np.asarray(states)
    if states.shape[0] != M.shape[-1]:
        raise DomainError(f"dimension mismatch: {M.shape} vs {states.shape}")
    if M.ndim == 1:
        return M.reshape((-1,) + (1,) * (states.ndim - 1)) * states
    return M @ states
