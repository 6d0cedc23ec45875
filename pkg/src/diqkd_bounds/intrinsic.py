"""Numerical upper bounds on the intrinsic information ``I(A;B down E)``.

The infimum over channels ``E -> E'`` is approached by a derivative-free local
search over Stinespring dilations: a unitary on ``E' x env`` is generated by
exponentiating an anti-Hermitian matrix, and its first ``dim E`` columns form
the isometry whose slices over ``env`` are the Kraus operators.

The search can only ever return an upper bound on the true infimum. The
identity channel is always part of the candidate set, so the reported value
never exceeds ``I(A;B|E)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .qip import Channel, Operator, apply_channel, conditional_mutual_information

#: Improvements smaller than this are treated as optimizer noise.
IMPROVEMENT_THRESHOLD = 1e-4


@dataclass(frozen=True)
class SquashSearchConfig:
    e_out_dim: int = 2
    env_dim: int = 2
    restarts: int = 16
    max_evals: int = 2000
    seed: int = 0
    tol: float = 1e-9
    init_scale: float = 1.0

    def __post_init__(self):
        for name in ("e_out_dim", "env_dim", "restarts", "max_evals"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def check_feasible(self, in_dim: int) -> None:
        if self.e_out_dim * self.env_dim < in_dim:
            raise ValueError(
                f"e_out_dim * env_dim = {self.e_out_dim * self.env_dim} < input "
                f"dimension {in_dim}: no isometry exists")


@dataclass(frozen=True, eq=False)
class SquashResult:
    """Outcome of a squashing search.

    ``search_value`` is the best value among the parametrized channels alone;
    ``best_value`` also includes the identity channel.
    """

    best_value: float
    best_channel: Channel
    identity_value: float
    search_value: float
    search_channel: Channel
    evaluations: int

    @property
    def improvement(self) -> float:
        return self.identity_value - self.best_value

    @property
    def significant(self) -> bool:
        return self.improvement > IMPROVEMENT_THRESHOLD


def n_params(e_out_dim: int, env_dim: int) -> int:
    return (e_out_dim * env_dim) ** 2


def _generator(theta: np.ndarray, d: int) -> np.ndarray:
    """Anti-Hermitian ``d x d`` matrix from ``d^2`` real parameters."""
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = theta[:d]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = theta[d:d + m] + 1j * theta[d + m:d + 2 * m]
    h = h + np.triu(h, 1).conj().T
    return 1j * h


def channel_from_params(theta, in_dim: int, e_out_dim: int, env_dim: int) -> Channel:
    """Channel ``C^in_dim -> C^e_out_dim`` with ``env_dim`` Kraus operators."""
    d = e_out_dim * env_dim
    if d < in_dim:
        raise ValueError(f"e_out_dim * env_dim = {d} < in_dim = {in_dim}")
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != n_params(e_out_dim, env_dim):
        raise ValueError(f"expected {n_params(e_out_dim, env_dim)} parameters, got {theta.size}")
    u = expm(_generator(theta, d))
    v = u[:, :in_dim].reshape(e_out_dim, env_dim, in_dim)
    return Channel([v[:, k, :] for k in range(env_dim)])


def squashed_cmi(rho: Operator, channel: Channel, parties=(0, 1, 2)) -> float:
    a, b, e = parties
    return conditional_mutual_information(apply_channel(rho, channel, e), [a], [b], [e])


def intrinsic_upper(rho: Operator, cfg: SquashSearchConfig = SquashSearchConfig(),
                    parties=(0, 1, 2)) -> SquashResult:
    """Best ``I(A;B|E')`` found over channels on subsystem ``parties[2]``.

    Restart 0 starts from ``theta = 0``; restart ``r > 0`` draws its start
    from ``numpy.random.default_rng([seed, r])``, so results depend only on
    ``(seed, cfg)``. Each restart is a Nelder-Mead run with at most
    ``cfg.max_evals`` objective evaluations.
    """
    a, b, e = parties
    in_dim = rho.dims[e]
    cfg.check_feasible(in_dim)
    identity = Channel.identity(in_dim)
    identity_value = squashed_cmi(rho, identity, parties)

    k = n_params(cfg.e_out_dim, cfg.env_dim)
    evaluations = 0
    best = (np.inf, None)

    def objective(theta):
        nonlocal evaluations, best
        try:
            ch = channel_from_params(theta, in_dim, cfg.e_out_dim, cfg.env_dim)
        except ValueError:
            # Kraus completeness failed numerically: reject the candidate
            return np.inf
        value = squashed_cmi(rho, ch, parties)
        evaluations += 1
        if value < best[0]:
            best = (value, ch)
        return value

    for r in range(cfg.restarts):
        if r == 0:
            x0 = np.zeros(k)
        else:
            x0 = np.random.default_rng([cfg.seed, r]).normal(scale=cfg.init_scale, size=k)
        minimize(objective, x0, method="Nelder-Mead",
                 options={"maxfev": cfg.max_evals, "xatol": 1e-8, "fatol": cfg.tol,
                          "adaptive": k > 10})

    if best[1] is None:
        raise RuntimeError("squashing search produced no valid evaluation")
    search_value, search_channel = best
    if search_value < identity_value:
        best_value, best_channel = search_value, search_channel
    else:
        best_value, best_channel = identity_value, identity
    return SquashResult(best_value, best_channel, identity_value,
                        search_value, search_channel, evaluations)
