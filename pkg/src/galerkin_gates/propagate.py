"""
Galerkin compressions and exact propagation under piecewise-constant controls.

For a control with steps ``(d_i, u_i)`` the propagator of the truncated system
is the ordered product ``exp(d_n (A + u_n B)) ... exp(d_1 (A + u_1 B))``; no
time stepping error is introduced beyond the control's own discretization.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import algebra, models
from .controls import PiecewiseConstantControl
from .errors import DomainError, NumericalError

# bytes of cached unitaries kept per system
_CACHE_BYTES = 64_000_000


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    """The compressed pair ``(A^(N), B^(N))``.

    ``a_diag`` holds the purely imaginary diagonal ``-i lambda_k`` of the
    drift; ``b_mat`` the dense skew-Hermitian coupling. Step exponentials are
    memoized by ``(amplitude, duration)`` and eigendecompositions by
    ``amplitude``.
    """

    model: models.QuantumModel
    N: int
    a_diag: np.ndarray
    b_mat: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        size = max(8, min(4096, _CACHE_BYTES // (16 * self.N * self.N)))
        self._cache["eig"] = functools.lru_cache(maxsize=size)(self._eig)
        self._cache["step"] = functools.lru_cache(maxsize=size)(self._step)

    @property
    def eigenvalues(self) -> np.ndarray:
        return -self.a_diag.imag

    def generator(self, amplitude: float) -> np.ndarray:
        M = amplitude * self.b_mat
        M[np.diag_indices(self.N)] += self.a_diag
        return M

    def _eig(self, amplitude: float) -> algebra.SkewEig:
        return algebra.skew_eig(self.generator(amplitude))

    def _step(self, amplitude: float, duration: float) -> np.ndarray:
        if amplitude == 0:
            return np.exp(self.a_diag * duration)
        return self._cache["eig"](amplitude).expm(duration)

    def step_unitary(self, amplitude: float, duration: float) -> np.ndarray:
        """``exp(duration (A + amplitude B))``; 1-D (diagonal) when ``amplitude == 0``."""
        return self._cache["step"](float(amplitude), float(duration))

    def partial_unitary(self, amplitude: float, duration: float) -> np.ndarray:
        """Like :meth:`step_unitary` but without memoizing the result."""
        if amplitude == 0:
            return np.exp(self.a_diag * duration)
        return self._cache["eig"](float(amplitude)).expm(duration)

    def cache_info(self):
        return self._cache["step"].cache_info()


def compress(model: models.QuantumModel, N: int) -> GalerkinSystem:
    if N < 2:
        raise DomainError(f"Galerkin dimension must be at least 2, got {N}")
    a_diag = -1j * models.eigenvalues(model, N)
    return GalerkinSystem(model, int(N), a_diag, models.coupling_matrix(model, N))


@dataclass
class Trajectory:
    """Sampled solution of the Galerkin system.

    ``states[i, s]`` is the coefficient vector of the ``i``-th initial state at
    ``sample_times[s]``. ``commutator`` tracks ``||pi_m X - X pi_m||`` at every
    breakpoint and sample point, with ``m = commutator_block``.
    """

    sample_times: np.ndarray
    states: np.ndarray
    final_propagator: np.ndarray
    commutator_times: np.ndarray
    commutator: np.ndarray
    commutator_block: int
    labels: list = field(default_factory=list)

    @property
    def commutator_sup(self) -> float:
        return float(np.max(self.commutator)) if self.commutator.size else 0.0

    @property
    def N(self) -> int:
        return self.final_propagator.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=-1)


def _block_commutator_norm(X: np.ndarray, m: int) -> float:
    # pi X - X pi = [[0, X12], [-X21, 0]]; its norm is the larger block norm
    if m >= X.shape[0]:
        return 0.0
    return max(np.linalg.norm(X[m:, :m], 2), np.linalg.norm(X[:m, m:], 2))


def _initial_matrix(N: int, initial):
    cols, labels = [], []
    for i, item in enumerate(initial):
        if np.isscalar(item):
            j = int(item)
            if not 1 <= j <= N:
                raise DomainError(f"initial level {j} outside 1..{N}")
            v = np.zeros(N, dtype=complex)
            v[j - 1] = 1.0
            labels.append(f"phi{j}")
        else:
            v = np.asarray(item, dtype=complex).reshape(-1)
            if v.size != N:
                raise DomainError(f"initial vector has length {v.size}, expected {N}")
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise DomainError("initial vectors must have unit norm")
            labels.append(f"psi{i + 1}")
        cols.append(v)
    return np.stack(cols, axis=1), labels


def propagate(
    sys: GalerkinSystem,
    u: PiecewiseConstantControl,
    initial=(1, 2, 3),
    sample_every: float | None = None,
    commutator_block: int = 3,
) -> Trajectory:
    """Propagate the identity and ``initial`` states through ``u``.

    With ``sample_every=None`` states are recorded at every control
    breakpoint. Otherwise steps are split on the grid ``k * sample_every`` and
    states are recorded there (plus at ``t = 0`` and the final time); the
    commutator deviation is evaluated on breakpoints and grid points alike.
    """
    if sample_every is not None and not sample_every > 0:
        raise DomainError("sample_every must be positive")
    N = sys.N
    m = min(commutator_block, N)
    psi0, labels = _initial_matrix(N, initial)
    X = np.eye(N, dtype=complex)

    times, snaps = [0.0], [psi0.copy()]
    ctimes, comms = [0.0], [0.0]

    def apply_step(U):
        nonlocal X
        X = U[:, None] * X if U.ndim == 1 else U @ X

    t = 0.0
    next_grid = sample_every
    ends = u.breakpoints[1:]
    for d, a, t_end in zip(u.durations, u.amplitudes, ends):
        if not np.isfinite(a):
            raise NumericalError(f"non-finite control amplitude at t={t}")
        split = False
        if sample_every is not None:
            while next_grid < t_end - 1e-12 * max(1.0, t_end):
                apply_step(sys.partial_unitary(a, next_grid - t))
                split = True
                t = next_grid
                times.append(t)
                snaps.append(X @ psi0)
                ctimes.append(t)
                comms.append(_block_commutator_norm(X, m))
                next_grid = sample_every * (round(t / sample_every) + 1)
        apply_step(sys.partial_unitary(a, t_end - t) if split else sys.step_unitary(a, d))
        t = t_end
        ctimes.append(t)
        comms.append(_block_commutator_norm(X, m))
        if sample_every is None:
            times.append(t)
            snaps.append(X @ psi0)
        elif abs(t - next_grid) <= 1e-12 * max(1.0, t):
            times.append(t)
            snaps.append(X @ psi0)
            next_grid = sample_every * (round(t / sample_every) + 1)
    if sample_every is not None and times[-1] != t:
        times.append(t)
        snaps.append(X @ psi0)

    states = np.transpose(np.stack(snaps, axis=0), (2, 0, 1))
    if not np.all(np.isfinite(X)):
        raise NumericalError("propagator has non-finite entries")
    return Trajectory(
        sample_times=np.asarray(times),
        states=states,
        final_propagator=X,
        commutator_times=np.asarray(ctimes),
        commutator=np.asarray(comms),
        commutator_block=m,
        labels=labels,
    )


def commutator_deviation(propagators, m: int = 3) -> float:
    """``sup ||pi_m X - X pi_m||`` over one or several propagators.

    Evaluated with :func:`algebra.op_norm` on the full commutator. The bound
    for two-time propagators ``X(t, s)`` is twice this value, see
    :func:`two_sided_deviation`.
    """
    if isinstance(propagators, Trajectory):
        propagators = [propagators.final_propagator]
    elif isinstance(propagators, np.ndarray) and propagators.ndim == 2:
        propagators = [propagators]
    sup = 0.0
    for X in propagators:
        X = np.asarray(X)
        if m > X.shape[0]:
            raise DomainError(f"block size {m} exceeds dimension {X.shape[0]}")
        P = np.zeros(X.shape[0])
        P[:m] = 1.0
        C = P[:, None] * X - X * P[None, :]
        sup = max(sup, algebra.op_norm(C))
    return sup


def two_sided_deviation(sup: float) -> float:
    """Deviation bound for ``X(t, s)`` from the bound ``sup`` on ``X(t, 0)``."""
    return 2.0 * sup


@dataclass
class GateFidelities:
    moduli: np.ndarray
    permutation: tuple
    transitions: list

    @property
    def values(self) -> list[float]:
        return [f for _, _, f in self.transitions]


def gate_fidelities(traj, target_permutation) -> GateFidelities:
    """Moduli ``|<phi_sigma(j), X(T) phi_j>|`` for a permutation of ``1..m``.

    ``target_permutation[j - 1]`` is ``sigma(j)``. ``traj`` may be a
    :class:`Trajectory` or a propagator matrix.
    """
    X = traj.final_propagator if isinstance(traj, Trajectory) else np.asarray(traj)
    sigma = tuple(int(s) for s in target_permutation)
    m = len(sigma)
    if sorted(sigma) != list(range(1, m + 1)):
        raise DomainError(f"{sigma} is not a permutation of 1..{m}")
    if m > X.shape[0]:
        raise DomainError(f"permutation size {m} exceeds dimension {X.shape[0]}")
    moduli = np.abs(X[:m, :m])
    transitions = [(j, sigma[j - 1], float(moduli[sigma[j - 1] - 1, j - 1])) for j in range(1, m + 1)]
    return GateFidelities(moduli, sigma, transitions)
