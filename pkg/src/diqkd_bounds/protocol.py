"""Correlation tables and a Monte Carlo run of the standard CHSH DIQKD protocol.

Only the data-generation stage and the parameter-estimation step are
simulated. One-way error correction and privacy amplification are replaced
by asymptotic accounting: a run that does not abort yields
``key_rounds * max(0, rate)`` bits, with the Devetak-Winter rate evaluated at
the observed ``(S, Q)``.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64). Output for
a given seed is stable for a fixed numpy version; fixtures were frozen with
numpy 2.2.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .chsh import (
    S_MAX,
    S_MIN,
    AttackParams,
    build_attack_tuple,
    lower_bound_dw,
)
from .qip import Ket, Operator, Povm, measure_subsystems

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Correlation:
    """Table ``p(a, b | x, y)`` stored with axes ``(x, y, a, b)``.

    Inputs with fewer outcomes than the largest alphabet are zero padded.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 4:
            raise ValueError(f"correlation table needs 4 axes (x, y, a, b), got {t.ndim}")
        if t.min(initial=0.0) < -NORMALIZATION_TOL:
            raise ValueError("correlation has negative entries")
        sums = t.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise ValueError("p(a,b|x,y) is not normalized for every (x, y)")
        t = np.clip(t, 0.0, None)
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.table.shape

    def __call__(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.table[x, y, a, b])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "a", "b", "p"])
        for (x, y, a, b), p in np.ndenumerate(self.table):
            w.writerow([x, y, a, b, f"{p:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path: str | Path) -> "Correlation":
        """Read a table with columns ``x, y, a, b, p``; missing cells are zero."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"x", "y", "a", "b", "p"} <= set(reader.fieldnames):
                raise ValueError("correlation file needs columns x,y,a,b,p")
            rows = []
            for line, row in enumerate(reader, start=2):
                try:
                    rows.append((int(row["x"]), int(row["y"]), int(row["a"]),
                                 int(row["b"]), float(row["p"])))
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"malformed correlation row at line {line}: {row}") from exc
        if not rows:
            raise ValueError("correlation file has no rows")
        idx = np.array([r[:4] for r in rows])
        if idx.min() < 0:
            raise ValueError("negative index in correlation file")
        t = np.zeros(tuple(idx.max(axis=0) + 1))
        for x, y, a, b, p in rows:
            t[x, y, a, b] += p
        return cls(t)


@dataclass(frozen=True, eq=False)
class StateTuple:
    """A state with per-party POVM families; Alice is subsystem 0, Bob 1."""

    state: Operator | Ket
    alice: tuple[Povm, ...]
    bob: tuple[Povm, ...]


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    omega_exp: float | None = 0.75
    test_prob: float = 0.5
    key_inputs: tuple[int, int] = (0, 2)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.test_prob <= 1.0:
            raise ValueError("test_prob must lie in [0, 1]")
        if self.omega_exp is not None and not 0.0 <= self.omega_exp <= 1.0:
            raise ValueError("omega_exp must lie in [0, 1]")


@dataclass(frozen=True)
class SimReport:
    n: int
    test_rounds: int
    key_rounds: int
    wins: int
    key_errors: int
    observed_omega: float
    observed_qber: float
    omega_defined: bool
    qber_defined: bool
    abort: bool
    key_rate: float
    asymptotic_key_bits: float
    seed: int

    @property
    def observed_S(self) -> float:
        return 8.0 * self.observed_omega - 4.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        d = self.to_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(d.keys())
        w.writerow(_fmt(v) for v in d.values())
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


# ---------------------------------------------------------------------------
# correlations


def correlation_from_tuple(t) -> Correlation:
    """Born-rule table ``Tr[(M_{a|x} x M_{b|y} x I) rho]`` for every input pair.

    ``t`` is anything with ``state``, ``alice`` and ``bob`` attributes
    (:class:`StateTuple`, :class:`~diqkd_bounds.chsh.AttackTuple`).
    """
    n_a = max(m.n_outcomes for m in t.alice)
    n_b = max(m.n_outcomes for m in t.bob)
    table = np.zeros((len(t.alice), len(t.bob), n_a, n_b))
    for x, ma in enumerate(t.alice):
        for y, mb in enumerate(t.bob):
            measured = measure_subsystems(t.state, [(0, ma), (1, mb)])
            d = measured.dims
            diag = np.real(np.diag(measured.mat)).reshape(d)
            probs = diag.sum(axis=tuple(range(2, len(d)))) if len(d) > 2 else diag
            table[x, y, :ma.n_outcomes, :mb.n_outcomes] = probs
    return Correlation(table)


def _check_chsh_alphabet(p: Correlation) -> None:
    nx, ny, na, nb = p.shape
    if nx < 2 or ny < 2:
        raise ValueError("CHSH needs inputs x, y in {0, 1}")
    extra = p.table[:2, :2, 2:, :].sum() + p.table[:2, :2, :, 2:].sum()
    if extra > NORMALIZATION_TOL:
        raise ValueError("CHSH needs binary outcomes on inputs x, y in {0, 1}")


def omega_of_p(p: Correlation) -> float:
    """CHSH winning probability with uniform inputs, win iff ``a xor b = x y``."""
    _check_chsh_alphabet(p)
    total = 0.0
    for x in (0, 1):
        for y in (0, 1):
            for a in (0, 1):
                total += p.table[x, y, a, a ^ (x * y)]
    return total / 4.0


def s_of_p(p: Correlation) -> float:
    return 8.0 * omega_of_p(p) - 4.0


def q_of_p(p: Correlation, key_inputs: tuple[int, int] = (0, 2)) -> float:
    """``Pr[a != b | x_hat, y_hat]``."""
    x, y = key_inputs
    nx, ny, _, _ = p.shape
    if not (0 <= x < nx and 0 <= y < ny):
        raise ValueError(f"key inputs {key_inputs} outside table of shape {p.shape}")
    cell = p.table[x, y]
    return float(cell.sum() - np.trace(cell))


def no_signalling_check(p: Correlation) -> float:
    """Largest change of a marginal under the other party's input choice."""
    alice = p.table.sum(axis=3)  # (x, y, a)
    bob = p.table.sum(axis=2)    # (x, y, b)
    margin_a = np.max(alice.max(axis=1) - alice.min(axis=1), initial=0.0)
    margin_b = np.max(bob.max(axis=0) - bob.min(axis=0), initial=0.0)
    return float(max(margin_a, margin_b))


def attack_correlation(S: float, Q: float) -> Correlation:
    return correlation_from_tuple(build_attack_tuple(AttackParams(S, Q)))


def depolarizing_correlation(nu: float) -> Correlation:
    """``(1 - nu)|Phi+><Phi+| + nu I/4`` with optimal CHSH measurements and a
    ``Z`` key measurement for Bob: ``S = 2 sqrt 2 (1 - nu)``, ``Q = nu/2``."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1] for a physical CHSH table")
    phi = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)
    rho = (1 - nu) * np.outer(phi, phi) + nu * np.eye(4) / 4
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    alice = (Povm.from_observable(z), Povm.from_observable(x))
    bob = (Povm.from_observable((z + x) / math.sqrt(2)),
           Povm.from_observable((z - x) / math.sqrt(2)),
           Povm.from_observable(z))
    return correlation_from_tuple(StateTuple(Operator(rho, [2, 2]), alice, bob))


def classical_correlation() -> Correlation:
    """Deterministic ``a = b = 0`` for all inputs (``omega = 3/4``), with key input ``y = 2``."""
    t = np.zeros((2, 3, 2, 2))
    t[:, :, 0, 0] = 1.0
    return Correlation(t)


def pr_box() -> Correlation:
    t = np.zeros((2, 2, 2, 2))
    for x in (0, 1):
        for y in (0, 1):
            for a in (0, 1):
                t[x, y, a, a ^ (x * y)] = 0.5
    return Correlation(t)


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True, eq=False)
class Rounds:
    """Per-round record: test flag, inputs and outputs."""

    test: np.ndarray
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray


def _sample_outcomes(p: Correlation, x: np.ndarray, y: np.ndarray,
                     u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    _, _, na, nb = p.shape
    cdf = np.cumsum(p.table.reshape(p.shape[0], p.shape[1], na * nb), axis=2)
    cdf[..., -1] = 1.0
    rows = cdf[x, y]  # (rounds, na*nb)
    flat = (u[:, None] >= rows).sum(axis=1)
    flat = np.minimum(flat, na * nb - 1)
    return flat // nb, flat % nb


def sample_rounds(p: Correlation, cfg: ProtocolConfig) -> Rounds:
    """Draw ``cfg.n`` IID rounds.

    A round is a test round with probability ``test_prob``; test rounds use
    uniform ``x, y in {0, 1}``, key rounds use ``cfg.key_inputs``. Random
    numbers are drawn in a fixed order (test flags, inputs, outcomes) so a
    seed fixes the whole record.
    """
    xk, yk = cfg.key_inputs
    if not (0 <= xk < p.shape[0] and 0 <= yk < p.shape[1]):
        raise ValueError(f"key inputs {cfg.key_inputs} outside table of shape {p.shape}")
    rng = np.random.default_rng(cfg.seed)
    test = rng.random(cfg.n) < cfg.test_prob
    x_test = rng.integers(0, 2, size=cfg.n)
    y_test = rng.integers(0, 2, size=cfg.n)
    x = np.where(test, x_test, xk)
    y = np.where(test, y_test, yk)
    a, b = _sample_outcomes(p, x, y, rng.random(cfg.n))
    return Rounds(test, x, y, a, b)


def run_protocol(p: Correlation, cfg: ProtocolConfig,
                 rate_fn: Callable[[AttackParams], float] = lower_bound_dw) -> SimReport:
    """Data generation, parameter estimation and key-length accounting.

    The run aborts iff the observed winning fraction is below
    ``cfg.omega_exp``. With no test rounds the estimate is undefined
    (``omega_defined`` is False) and an abort rule cannot be passed.
    """
    if cfg.test_prob > 0:
        _check_chsh_alphabet(p)
    r = sample_rounds(p, cfg)
    test_rounds = int(r.test.sum())
    key_rounds = cfg.n - test_rounds
    win = (r.a ^ r.b) == (r.x * r.y)
    wins = int(win[r.test].sum())
    errors = int((r.a != r.b)[~r.test].sum())
    omega_defined = test_rounds > 0
    qber_defined = key_rounds > 0
    omega = wins / test_rounds if omega_defined else float("nan")
    qber = errors / key_rounds if qber_defined else float("nan")
    if cfg.omega_exp is None:
        abort = False
    else:
        abort = (not omega_defined) or omega < cfg.omega_exp
    report = SimReport(cfg.n, test_rounds, key_rounds, wins, errors, omega, qber,
                       omega_defined, qber_defined, abort, 0.0, 0.0, cfg.seed)
    rate = observed_rate(report, rate_fn)
    bits = asymptotic_key_bits(report, rate_fn)
    return SimReport(**{**asdict(report), "key_rate": rate, "asymptotic_key_bits": bits})


def observed_rate(report: SimReport,
                  rate_fn: Callable[[AttackParams], float] = lower_bound_dw) -> float:
    """``max(0, rate_fn)`` at the observed ``(S, Q)``, clipped into the valid box.

    Returns 0 when either estimate is undefined or the run aborted.
    """
    if report.abort or not (report.omega_defined and report.qber_defined):
        return 0.0
    S = min(max(report.observed_S, S_MIN), S_MAX)
    Q = min(max(report.observed_qber, 0.0), 0.5)
    return max(0.0, rate_fn(AttackParams(S, Q)))


def asymptotic_key_bits(report: SimReport,
                        rate_fn: Callable[[AttackParams], float] = lower_bound_dw) -> float:
    """``key_rounds * max(0, rate)``; an aborted run yields 0."""
    if report.abort:
        return 0.0
    return report.key_rounds * observed_rate(report, rate_fn)


def omega_sigma(omega: float, expected_test_rounds: float) -> float:
    return math.sqrt(omega * (1 - omega) / expected_test_rounds)


def run_many(p: Correlation, cfg: ProtocolConfig, seeds: Sequence[int]) -> list[SimReport]:
    """Independent runs that differ only in the seed."""
    return [run_protocol(p, ProtocolConfig(cfg.n, cfg.omega_exp, cfg.test_prob,
                                           cfg.key_inputs, s)) for s in seeds]
