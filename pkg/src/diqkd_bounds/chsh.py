"""Key-rate bounds for CHSH-based DIQKD from the Pironio-type attack.

Eve's attack is the Bell-diagonal state

    rho_AB = (1+C)/2 |Phi+><Phi+| + (1-C)/2 |Phi-><Phi-|,   C = sqrt((S/2)^2 - 1),

with test observables ``A0 = Z, A1 = X, B0/B1 = (Z +/- C X)/sqrt(1+C^2)`` and
a noisy key measurement for Bob that outputs the ``Z`` outcome with
probability ``1 - 2Q`` and a uniform bit otherwise. Measuring a purification
of this state on the key inputs gives a ccq state whose conditional mutual
information ``I(A;B|E)`` upper-bounds the DI key capacity ``K_DI(S, Q)``; the
Devetak-Winter quantity ``H(A|E) - H(A|B)`` on the same state is the matching
achievable rate.

Every closed-form expression here has a numerical twin built from the
primitives in :mod:`diqkd_bounds.qip`, and the tests check that they agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .qip import (
    Ket,
    Operator,
    Povm,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    measure_subsystems,
    partial_trace,
)

SQRT2 = math.sqrt(2.0)
S_MIN = 2.0
S_MAX = 2.0 * SQRT2

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0]) / SQRT2
PHI_MINUS = np.array([1.0, 0.0, 0.0, -1.0]) / SQRT2

KEY_INPUTS = (0, 2)
_PARAM_TOL = 1e-9


def depolarizing_qber(S: float) -> float:
    """QBER of the honest depolarized implementation, ``Q = (1 - S/(2 sqrt 2)) / 2``."""
    return 0.5 * (1.0 - S / S_MAX)


def winning_probability(S: float) -> float:
    return 0.5 + S / 8.0


@dataclass(frozen=True)
class AttackParams:
    """CHSH violation ``S`` in ``[2, 2 sqrt 2]`` and QBER ``Q`` in ``[0, 1/2]``."""

    S: float
    Q: float

    def __post_init__(self):
        if not S_MIN - _PARAM_TOL <= self.S <= S_MAX + _PARAM_TOL:
            raise ValueError(f"S = {self.S} outside [2, 2*sqrt(2)]")
        if not -_PARAM_TOL <= self.Q <= 0.5 + _PARAM_TOL:
            raise ValueError(f"Q = {self.Q} outside [0, 1/2]")
        # snap round-off at the interval ends
        object.__setattr__(self, "S", min(max(float(self.S), S_MIN), S_MAX))
        object.__setattr__(self, "Q", min(max(float(self.Q), 0.0), 0.5))

    @property
    def C(self) -> float:
        return min(1.0, math.sqrt(max(0.0, (self.S / 2.0) ** 2 - 1.0)))

    @classmethod
    def depolarizing(cls, S: float) -> "AttackParams":
        return cls(S, depolarizing_qber(S))


@dataclass(frozen=True, eq=False)
class AttackMeasurements:
    """Alice's POVMs for ``x in {0, 1}`` and Bob's for ``y in {0, 1, 2}``."""

    alice: tuple[Povm, ...]
    bob: tuple[Povm, ...]


@dataclass(frozen=True, eq=False)
class AttackTuple:
    """Purified attack state on ``A x B x E`` together with all measurements."""

    params: AttackParams
    state: Ket
    alice: tuple[Povm, ...]
    bob: tuple[Povm, ...]
    key_inputs: tuple[int, int] = KEY_INPUTS


@dataclass(frozen=True)
class KeyRatePoint:
    """All rates at one ``(S, Q)`` point, in bits per key round."""

    S: float
    Q: float
    lower: float
    entropy_rate: float
    upper_thm1: float
    upper_appB: float


# ---------------------------------------------------------------------------
# construction


def build_attack_state(p: AttackParams) -> Operator:
    C = p.C
    rho = (1 + C) / 2 * np.outer(PHI_PLUS, PHI_PLUS) + (1 - C) / 2 * np.outer(PHI_MINUS, PHI_MINUS)
    return Operator(rho, [2, 2])


def attack_purification(p: AttackParams) -> Ket:
    """``sqrt((1+C)/2) |Phi+>|0> + sqrt((1-C)/2) |Phi->|1>`` on ``A x B x E``."""
    C = p.C
    e0, e1 = np.eye(2)
    vec = (math.sqrt((1 + C) / 2) * np.kron(PHI_PLUS, e0)
           + math.sqrt((1 - C) / 2) * np.kron(PHI_MINUS, e1))
    return Ket(vec, [2, 2, 2])


def bob_key_povm(Q: float) -> Povm:
    """``(1 - 2Q)|b><b| + Q I``: a Z measurement whose outcome is replaced by a
    fair coin with probability ``2Q``."""
    return Povm([(1 - 2 * Q) * np.diag([1.0, 0.0]) + Q * np.eye(2),
                 (1 - 2 * Q) * np.diag([0.0, 1.0]) + Q * np.eye(2)])


def build_measurements(p: AttackParams) -> AttackMeasurements:
    C = p.C
    norm = math.sqrt(1 + C * C)
    b0 = (PAULI_Z + C * PAULI_X) / norm
    b1 = (PAULI_Z - C * PAULI_X) / norm
    alice = (Povm.from_observable(PAULI_Z), Povm.from_observable(PAULI_X))
    bob = (Povm.from_observable(b0), Povm.from_observable(b1), bob_key_povm(p.Q))
    return AttackMeasurements(alice, bob)


def build_attack_tuple(p: AttackParams) -> AttackTuple:
    m = build_measurements(p)
    return AttackTuple(p, attack_purification(p), m.alice, m.bob)


# ---------------------------------------------------------------------------
# observed statistics


def chsh_value(state: Operator, alice: Sequence[Povm], bob: Sequence[Povm]) -> float:
    """``<A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>`` with ``E = M_0 - M_1``.

    Subsystems beyond the first two (e.g. Eve's) are traced out.
    """
    if isinstance(state, Ket):
        state = state.density()
    if state.n_parties > 2:
        state = partial_trace(state, [0, 1])
    if tuple(state.dims) != (2, 2):
        raise ValueError(f"CHSH value needs two qubits, got dims {state.dims}")
    obs_a = [alice[x].observable() for x in (0, 1)]
    obs_b = [bob[y].observable() for y in (0, 1)]
    sign = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}
    total = sum(s * np.trace(np.kron(obs_a[x], obs_b[y]) @ state.mat)
                for (x, y), s in sign.items())
    return float(np.real(total))


def measured_state(t: AttackTuple, x: int, y: int) -> Operator:
    """ccq state from measuring Alice with input ``x`` and Bob with input ``y``."""
    return measure_subsystems(t.state, [(0, t.alice[x]), (1, t.bob[y])])


def qber(t: AttackTuple) -> float:
    """``Pr[A != B]`` on the key inputs."""
    ccq = partial_trace(measured_state(t, *t.key_inputs), [0, 1])
    probs = np.real(np.diag(ccq.mat)).reshape(2, 2)
    return float(probs[0, 1] + probs[1, 0])


def key_ccq_state(p: AttackParams) -> Operator:
    """Closed-form ccq state of the key round on ``A x B x E`` (all qubits)."""
    C, Q = p.C, p.Q
    off = math.sqrt(max(0.0, 1 - C * C))
    eve = {0: 0.5 * np.array([[1 + C, off], [off, 1 - C]]),
           1: 0.5 * np.array([[1 + C, -off], [-off, 1 - C]])}
    rho = np.zeros((8, 8))
    for a in (0, 1):
        for b in (0, 1):
            weight = (1 - Q) / 2 if a == b else Q / 2
            reg = np.zeros((4, 4))
            reg[2 * a + b, 2 * a + b] = 1.0
            rho += weight * np.kron(reg, eve[a])
    return Operator(rho, [2, 2, 2])


# ---------------------------------------------------------------------------
# bounds


def theorem1_bound(S: float, Q: float) -> float:
    """``1 + h(a) - h(Q) - h((1 + C)/2)`` with ``a = (1 + sqrt(1 + Q(1-Q)(S^2 - 8)))/2``."""
    p = AttackParams(S, Q)
    radicand = 1 + p.Q * (1 - p.Q) * (p.S ** 2 - 8)
    if radicand < -_PARAM_TOL:
        raise ArithmeticError(f"negative radicand {radicand} for S={S}, Q={Q}")
    a = 0.5 * (1 + math.sqrt(max(radicand, 0.0)))
    return 1 + binary_entropy(a) - binary_entropy(p.Q) - binary_entropy((1 + p.C) / 2)


def corollary1_bound(S: float) -> float:
    """Closed-form upper bound on the depolarizing line, evaluated through its own
    closed form ``a_S = 1/2 + sqrt(-32 + 16 S^2 - S^4) / (8 sqrt 2)``.

    Substituting ``Q(1-Q) = (1 - S^2/8)/4`` into ``a_{S,Q}`` gives the factor
    ``1/(8 sqrt 2)``; with ``1/(4 sqrt 2)`` the argument of ``h`` leaves ``[0, 1]``.
    """
    p = AttackParams.depolarizing(S)
    radicand = -32 + 16 * p.S ** 2 - p.S ** 4
    a = 0.5 + math.sqrt(max(radicand, 0.0)) / (8 * SQRT2)
    return 1 + binary_entropy(a) - binary_entropy(p.Q) - binary_entropy((1 + p.C) / 2)


def conditional_mutual_information_bound(p: AttackParams) -> float:
    """Numerical ``I(A;B|E)`` on the closed-form ccq key state."""
    return conditional_mutual_information(key_ccq_state(p), [0], [1], [2])


def entropy_rate(p: AttackParams) -> float:
    """``H(A|E)`` on the ccq key state."""
    return conditional_entropy(key_ccq_state(p), [0], [2])


def lower_bound_dw(p: AttackParams) -> float:
    """Devetak-Winter rate ``H(A|E) - H(A|B)`` on the ccq key state (unclamped)."""
    rho = key_ccq_state(p)
    return conditional_entropy(rho, [0], [2]) - conditional_entropy(rho, [0], [1])


def appendixB_branches(S: float, Q: float | None = None) -> dict[tuple[int, int], float]:
    """``I(A;B|E)`` of the measured purification for every input pair.

    ``Q`` defaults to the depolarizing relation; it only affects ``y = 2``.
    """
    p = AttackParams(S, depolarizing_qber(S) if Q is None else Q)
    t = build_attack_tuple(p)
    return {(x, y): conditional_mutual_information(measured_state(t, x, y), [0], [1], [2])
            for x in range(len(t.alice)) for y in range(len(t.bob))}


def appendixB_bound(S: float, Q: float | None = None) -> float:
    """Upper bound on the quantum intrinsic non-locality: the largest
    per-input-pair conditional mutual information."""
    return max(appendixB_branches(S, Q).values())


def appendixB_crossover(tol: float = 1e-6) -> float:
    """``S`` where the ``(1, 1)`` branch and the key-input branch intersect."""
    def diff(S):
        br = appendixB_branches(S)
        return br[(1, 1)] - br[KEY_INPUTS]
    return bisect(diff, 2.3, 2.8, tol)


def noise_threshold(tol: float = 1e-10) -> tuple[float, float]:
    """Root ``(S*, Q*)`` of the Devetak-Winter rate on the depolarizing line."""
    S = bisect(lambda s: lower_bound_dw(AttackParams.depolarizing(s)), 2.2, S_MAX, tol)
    return S, depolarizing_qber(S)


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Plain bisection on a sign change of ``f`` over ``[lo, hi]``."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def root_scalar(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Brent's method; used as a cross-check on :func:`bisect`."""
    return brentq(f, lo, hi, xtol=1e-14)


# ---------------------------------------------------------------------------
# sweeps


def key_rate_point(S: float, Q: float, appendix_b: bool = True) -> KeyRatePoint:
    p = AttackParams(S, Q)
    rho = key_ccq_state(p)
    h_ae = conditional_entropy(rho, [0], [2])
    h_ab = conditional_entropy(rho, [0], [1])
    upper_b = appendixB_bound(p.S, p.Q) if appendix_b else float("nan")
    return KeyRatePoint(p.S, p.Q, h_ae - h_ab, h_ae, theorem1_bound(p.S, p.Q), upper_b)


def s_grid(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("grid resolution must be at least 2")
    grid = np.linspace(S_MIN, S_MAX, n)
    grid[-1] = S_MAX
    return grid


def q_grid(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("grid resolution must be at least 2")
    return np.linspace(0.0, 0.5, n)


def sweep_curve(n: int = 200) -> list[KeyRatePoint]:
    """Rates along the depolarizing line ``Q = (1 - S/(2 sqrt 2))/2``."""
    return [key_rate_point(S, depolarizing_qber(S)) for S in s_grid(n)]


def sweep_surface(n_s: int = 100, n_q: int = 100, appendix_b: bool = False) -> list[KeyRatePoint]:
    """Row-major ``(S, Q)`` grid: ``S`` is the slow index."""
    return [key_rate_point(S, Q, appendix_b) for S in s_grid(n_s) for Q in q_grid(n_q)]


def sweep(n_s: int, n_q: int | None = None) -> list[KeyRatePoint]:
    """1D depolarizing-line sweep when ``n_q`` is None, else the 2D surface."""
    return sweep_curve(n_s) if n_q is None else sweep_surface(n_s, n_q)
