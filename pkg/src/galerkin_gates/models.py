"""
Concrete bilinear quantum systems in their eigenbasis.

Two systems are available:

* the perturbed harmonic oscillator, whose drift has eigenvalues
  ``lambda_n = (n - 1/2) + eta / (n - 1/2)`` and whose coupling is the
  tri-diagonal position operator; and
* the particle in a box on ``(0, pi)``, with eigenvalues ``k**2 / 2`` and the
  dense, parity-selective dipole coupling.

Levels are indexed from 1 throughout. The coupling elements returned here are
entries of the skew-Hermitian operator ``B`` (so the drift generator is
``-i diag(lambda)`` and the full generator is ``A + u B``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, NumericalError


class ModelKind(str, enum.Enum):
    PERTURBED_OSCILLATOR = "oscillator"
    POTENTIAL_WELL = "well"


class Perturbation(str, enum.Enum):
    """How the oscillator perturbation ``eta`` enters the spectrum.

    ``INVERSE_EIGENVALUE`` adds ``eta / lambda_n`` (the operator ``eta A^{-1}``).
    ``INVERSE_LEVEL`` adds ``eta / n`` instead; it is the reading under which
    the pulse periods 4*pi and 12*pi/5 are resonant with the first two gaps.
    """

    INVERSE_EIGENVALUE = "inverse_eigenvalue"
    INVERSE_LEVEL = "inverse_level"


@dataclass(frozen=True)
class QuantumModel:
    """Spectrum and coupling generator for one of the two systems.

    Parameters
    ----------
    kind : ModelKind
    eta : float
        Oscillator perturbation strength; ignored for the well.
    eigenvalue_scale : float
        Multiplier applied to every eigenvalue.
    coupling_scale : float
        Multiplier applied to every coupling element. With
        ``eigenvalue_scale = coupling_scale = 2`` the well generator is doubled,
        which is a pure time rescaling of the model.
    perturbation : Perturbation
        Oscillator only, see :class:`Perturbation`.
    """

    kind: ModelKind
    eta: float = 0.0
    eigenvalue_scale: float = 1.0
    coupling_scale: float = 1.0
    perturbation: Perturbation = Perturbation.INVERSE_EIGENVALUE

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "perturbation", Perturbation(self.perturbation))
        if self.eta < 0:
            raise DomainError(f"eta must be nonnegative, got {self.eta}")
        if self.eigenvalue_scale <= 0 or self.coupling_scale <= 0:
            raise DomainError("eigenvalue_scale and coupling_scale must be positive")

    @classmethod
    def oscillator(cls, eta: float = 1.0, **kwargs) -> "QuantumModel":
        return cls(ModelKind.PERTURBED_OSCILLATOR, eta=eta, **kwargs)

    @classmethod
    def well(cls, **kwargs) -> "QuantumModel":
        return cls(ModelKind.POTENTIAL_WELL, **kwargs)

    @property
    def b_norm_bound(self) -> float:
        """Upper bound on the operator norm of ``B`` (``inf`` if unbounded).

        Multiplication by ``x`` on ``(0, pi)`` has norm ``pi``.
        """
        if self.kind is ModelKind.POTENTIAL_WELL:
            return math.pi * self.coupling_scale
        return math.inf


def _check_index(n) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"levels are indexed from 1, got {n}")


def _spectrum(model: QuantumModel, n):
    if model.kind is ModelKind.POTENTIAL_WELL:
        lam = n**2 / 2.0
    else:
        base = n - 0.5
        if model.perturbation is Perturbation.INVERSE_EIGENVALUE:
            lam = base + model.eta / base
        else:
            lam = base + model.eta / n
    return lam * model.eigenvalue_scale


def eigenvalues(model: QuantumModel, N: int) -> np.ndarray:
    """Return ``lambda_1, ..., lambda_N`` as a float array."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    return _spectrum(model, np.arange(1, N + 1, dtype=float))


def eigenvalue(model: QuantumModel, n: int) -> float:
    _check_index(n)
    return float(_spectrum(model, float(n)))


def coupling(model: QuantumModel, j: int, k: int) -> complex:
    """Matrix element ``<phi_j, B phi_k>``."""
    _check_index(j)
    _check_index(k)
    j, k = int(j), int(k)
    s = model.coupling_scale
    if model.kind is ModelKind.PERTURBED_OSCILLATOR:
        if j == k - 1:
            return -1j * math.sqrt(k - 1) * s
        if j == k + 1:
            return -1j * math.sqrt(k) * s
        return 0j
    if (j - k) % 2 == 0:
        return 0j
    sign = -1.0 if (j + k) % 2 else 1.0
    return 1j * sign * 2.0 * j * k / (j * j - k * k) ** 2 * s


def coupling_matrix(model: QuantumModel, N: int) -> np.ndarray:
    """Dense ``N x N`` compression of ``B`` (skew-Hermitian by construction)."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    s = model.coupling_scale
    B = np.zeros((N, N), dtype=complex)
    if model.kind is ModelKind.PERTURBED_OSCILLATOR:
        off = -1j * np.sqrt(np.arange(1, N, dtype=float)) * s
        idx = np.arange(N - 1)
        B[idx, idx + 1] = off
        B[idx + 1, idx] = off
        return B
    j = np.arange(1, N + 1, dtype=float)[:, None]
    k = np.arange(1, N + 1, dtype=float)[None, :]
    odd = (j - k) % 2 == 1
    denom = np.where(odd, (j * j - k * k) ** 2, 1.0)
    sign = np.where((j + k) % 2 == 1, -1.0, 1.0)
    B[odd] = 1j * (sign * 2.0 * j * k / denom)[odd] * s
    return B


@dataclass
class ChainReport:
    chain: list[tuple[int, int]]
    depth: int
    couples_all: bool
    resonance_violations: list[tuple[tuple[int, int], tuple[int, int], float]] = field(
        default_factory=list
    )

    @property
    def non_resonant(self) -> bool:
        return not self.resonance_violations


def check_chain(model: QuantumModel, chain, depth: int, tol: float = 1e-9) -> ChainReport:
    """Check connectedness and non-resonance of ``chain`` on levels ``1..depth``.

    A chain link only counts if its coupling element is nonzero. A violation is
    a coupled pair ``(t1, t2)``, ``t1 < t2 <= depth``, other than the link
    itself, whose gap matches the link's gap within ``tol``.
    """
    if depth < 2:
        raise DomainError(f"depth must be at least 2, got {depth}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    chain = [(int(a), int(b)) for a, b in chain]
    links = [
        (a, b)
        for a, b in chain
        if 1 <= a <= depth and 1 <= b <= depth and a != b and coupling(model, a, b) != 0
    ]
    if links:
        rows = [a - 1 for a, _ in links]
        cols = [b - 1 for _, b in links]
        graph = csr_matrix((np.ones(len(links)), (rows, cols)), shape=(depth, depth))
        n_comp, _ = connected_components(graph, directed=False)
        couples_all = n_comp == 1
    else:
        couples_all = False

    lam = eigenvalues(model, depth)
    B = coupling_matrix(model, depth)
    t1, t2 = np.nonzero(np.triu(B != 0, k=1))
    pair_gaps = np.abs(lam[t1] - lam[t2])

    violations = []
    for a, b in links:
        gap = abs(lam[a - 1] - lam[b - 1])
        lo, hi = min(a, b), max(a, b)
        hits = np.nonzero(np.abs(pair_gaps - gap) <= tol)[0]
        for h in hits:
            p, q = int(t1[h]) + 1, int(t2[h]) + 1
            if (p, q) == (lo, hi):
                continue
            violations.append(((a, b), (p, q), float(gap)))
    return ChainReport(chain, depth, couples_all, violations)


def nearest_neighbour_chain(depth: int) -> list[tuple[int, int]]:
    """The chain ``{(n, n+1)}`` restricted to levels ``<= depth``."""
    return [(n, n + 1) for n in range(1, depth)]


def estimate_weak_coupling_constant(
    model: QuantumModel, k: float, N: int, coupling_override: np.ndarray | None = None
) -> float:
    """Estimate the weak-coupling constant on the ``N``-level truncation.

    Computes the largest ``|Re <|A|^k psi, B psi>| / <|A|^k psi, psi>`` over
    nonzero ``psi``. Since ``B`` is skew-Hermitian the numerator is the
    Hermitian form ``psi^H [D, B] psi / 2`` with ``D = diag(lambda^k)``, so the
    maximum is the spectral radius of ``D^{-1/2} [D, B] D^{-1/2} / 2``.

    ``coupling_override`` replaces the coupling matrix (used in tests).
    """
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    d = np.abs(eigenvalues(model, N)) ** k
    B = coupling_matrix(model, N) if coupling_override is None else np.asarray(coupling_override)
    half_comm = 0.5 * (d[:, None] * B - B * d[None, :])
    scale = 1.0 / np.sqrt(d)
    S = scale[:, None] * half_comm * scale[None, :]
    S = 0.5 * (S + S.conj().T)
    if not np.all(np.isfinite(S)):
        raise NumericalError("non-finite entries in the weak-coupling form")
    return float(np.max(np.abs(np.linalg.eigvalsh(S))))
