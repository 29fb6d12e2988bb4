"""
Truncation-error certificates for the two Galerkin systems.

Oscillator bounds involve factorials of order ``2N``; they are evaluated as
logarithms with :func:`math.lgamma` and only exponentiated at the end.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

_LOG_MAX = math.log(np.finfo(float).max)


def _exp(log_value: float) -> float:
    return math.inf if log_value > _LOG_MAX else math.exp(log_value)


def log_oscillator_tail_coefficient(n: int, K: float) -> float:
    if n < 3:
        raise DomainError(f"n must be at least 3, got {n}")
    if K < 0:
        raise DomainError("K must be nonnegative")
    if K == 0:
        return -math.inf
    return (
        (n - 2) * math.log(2 * K)
        - math.lgamma(n - 1)
        + 0.5 * (math.lgamma(2 * n - 2) - math.lgamma(n - 1))
    )


def oscillator_tail_coefficient(n: int, K: float) -> float:
    """Bound on ``|<phi_{n+1}, U_t phi_j>|``, ``j = 1, 2, 3``, under ``||u||_L1 <= K``.

    ``(2K)^(n-2) / (n-2)! * sqrt((2n-3)! / (n-2)!)``. Values above 1 are
    vacuous but legal. Returns ``inf`` if the result overflows a float.
    """
    return _exp(log_oscillator_tail_coefficient(n, K))


def log_oscillator_truncation_bound(N: int, K: float) -> float:
    if N < 4:
        raise DomainError(f"N must be at least 4, got {N}")
    if K < 0:
        raise DomainError("K must be nonnegative")
    if K == 0:
        return -math.inf
    return (
        (N - 1) * math.log(2.0)
        + (N - 1) * math.log(K)
        - math.lgamma(N - 1)
        + 0.5 * (math.lgamma(2 * N - 2) - math.lgamma(N - 2))
    )


def oscillator_truncation_bound(N: int, K: float) -> float:
    """Bound on ``||pi_N U_t phi_j - X_N(t, s) phi_j||`` for the oscillator.

    ``2^(N-1) K^(N-1) / (N-2)! * sqrt((2N-3)! / (N-3)!)``. It dominates
    ``K sqrt(N) * oscillator_tail_coefficient(N, K)`` by the factor
    ``2 sqrt((N-2)/N)``.
    """
    return _exp(log_oscillator_truncation_bound(N, K))


def minimal_oscillator_dimension(K: float, eps: float) -> int:
    """Smallest ``N >= 4`` with ``oscillator_truncation_bound(N, K) <= eps``.

    The bound is log-concave in ``N``, so once it exceeds ``eps`` at ``N = 4``
    the admissible set is a half-line; doubling brackets it and bisection on
    the logarithm finds its start.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    target = math.log(eps)
    if log_oscillator_truncation_bound(4, K) <= target:
        return 4
    lo, hi = 4, 8
    while log_oscillator_truncation_bound(hi, K) > target:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_oscillator_truncation_bound(mid, K) <= target:
            hi = mid
        else:
            lo = mid
    return hi


_WELL_TAIL = {
    1: (1.0, 2),
    2: (2.0**0.25, 3),
    3: (math.sqrt(2.0), 4),
}


def well_tail_bound(j: int, N: int) -> float:
    """Analytic bound on ``||(Id - pi_N) B phi_j||`` for the well, ``j = 1, 2, 3``.

    Square roots of ``1/(N-2)^5``, ``sqrt(2)/(N-3)^5`` and ``2/(N-4)^5``.
    """
    if j not in _WELL_TAIL:
        raise DomainError(f"tail bound available for j = 1, 2, 3 only, got {j}")
    if N < 5:
        raise DomainError(f"N must be at least 5, got {N}")
    c, shift = _WELL_TAIL[j]
    return c * (N - shift) ** -2.5


def well_tail_exact(j: int, N: int, cap: int = 100_000) -> float:
    """``sqrt(sum_{N < k <= cap} |b_jk|^2)`` from the exact coupling elements.

    A lower bound on ``||(Id - pi_N) B phi_j||`` that increases to it as
    ``cap`` grows (remainder of order ``cap**-5``).
    """
    if cap <= N:
        raise DomainError("cap must exceed N")
    k = np.arange(N + 1, cap + 1, dtype=float)
    k = k[(k - j) % 2 == 1]
    terms = (2.0 * j * k / (j * j - k * k) ** 2) ** 2
    return math.sqrt(math.fsum(terms[::-1]))


def well_projected_tail_bound(N: int, form: str = "third_column") -> float:
    """Bound used for ``||pi_3 B (Id - pi_N)||`` in the well certificate.

    ``form="third_column"`` takes the third column bound ``sqrt(2)/(N-4)^(5/2)``
    alone. ``form="columns"`` uses the
    Frobenius bound over all three columns, which is a genuine operator-norm
    bound whenever the column bounds hold.
    """
    if form == "third_column":
        return well_tail_bound(3, N)
    if form == "columns":
        return math.sqrt(sum(well_tail_bound(j, N) ** 2 for j in (1, 2, 3)))
    raise DomainError(f"unknown tail form {form!r}")


def minimal_well_dimension(K: float, eps: float, form: str = "third_column") -> int:
    """Smallest ``N >= 5`` with ``K * well_projected_tail_bound(N) <= eps / 2``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    N = 5
    while K * well_projected_tail_bound(N, form) > eps / 2:
        N += 1
    return N


@dataclass
class ErrorCertificate:
    """``total = K * (tail_term + commutator_term)``."""

    K: float
    N: int | None
    tail_term: float
    commutator_term: float
    total: float
    provenance: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ErrorCertificate":
        cert = cls(**data)
        expected = cert.K * (cert.tail_term + cert.commutator_term)
        if expected != cert.total:
            raise ValueError(
                f"certificate total {cert.total!r} disagrees with its parts ({expected!r})"
            )
        return cert

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def total_error_bound(
    K: float,
    tail: float,
    comm_sup: float,
    b_norm: float,
    N: int | None = None,
    provenance: str = "",
) -> ErrorCertificate:
    """Assemble ``K * (tail + 2 ||B|| sup_t ||pi_3 X - X pi_3||)``."""
    for name, value in (("K", K), ("tail", tail), ("comm_sup", comm_sup), ("b_norm", b_norm)):
        if not value >= 0:
            raise DomainError(f"{name} must be nonnegative, got {value}")
    commutator_term = 0.0 if comm_sup == 0 else 2.0 * b_norm * comm_sup
    total = K * (tail + commutator_term)
    return ErrorCertificate(float(K), N, float(tail), float(commutator_term), float(total), provenance)
