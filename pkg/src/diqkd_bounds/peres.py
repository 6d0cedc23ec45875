"""One-way DIQKD rates of the Vertesi-Brunner bound entangled two-qutrit state.

The state is PPT (hence undistillable) yet violates a Bell inequality. Here
we evaluate the Devetak-Winter rates it supports when either party's test
measurement is used as the key measurement:

* Alice-to-Bob: ``H(A|E) - H(A|B)`` on the cqq state ``rho^x_{A B E}``
  for each of Alice's three inputs ``x``,
* Bob-to-Alice: ``H(B|E) - H(B|A)`` on the qcq state ``rho^y_{A B E}``
  for each of Bob's two inputs ``y``,

where ``E`` holds the spectral purification of ``rho``. All five rates are
non-positive.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .qip import (
    Ket,
    Operator,
    Povm,
    conditional_entropy,
    eigenvalues_hermitian,
    marginal_entropy,
    measure_subsystems,
    partial_trace,
    partial_transpose,
    purify,
    shannon_entropy,
    von_neumann_entropy,
)

LAMBDAS = (Fraction(3257, 6884), Fraction(450, 1721), Fraction(450, 1721), Fraction(27, 6884))
A_SQUARED = Fraction(131, 2)
DEFAULT_Q = Fraction(1, 5)

RATE_TOL = 1e-9
PPT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class VBState:
    rho: Operator
    lambdas: tuple[Fraction, ...]
    psis: tuple[Ket, ...]
    a: float

    def purification(self) -> Ket:
        """``sum_i sqrt(lambda_i) |psi_i>|i>_E`` on ``3 x 3 x 4``."""
        vec = sum(math.sqrt(lam) * np.kron(psi.vec, np.eye(len(self.psis))[i])
                  for i, (lam, psi) in enumerate(zip(self.lambdas, self.psis)))
        return Ket(vec, [3, 3, len(self.psis)])


@dataclass(frozen=True, eq=False)
class VBMeasurements:
    """Alice: three binary POVMs. Bob: ``y = 0`` has three outcomes, ``y = 1`` two."""

    alice: tuple[Povm, ...]
    bob: tuple[Povm, ...]
    q: Fraction


@dataclass(frozen=True)
class EvidenceReport:
    ppt_min_eig: float
    alice_rates: tuple[float, ...]
    bob_rates: tuple[float, ...]
    alice_rates_check: tuple[float, ...]
    bob_rates_check: tuple[float, ...]
    q: str

    @property
    def max_alice(self) -> float:
        return max(self.alice_rates)

    @property
    def max_bob(self) -> float:
        return max(self.bob_rates)

    @property
    def path_discrepancy(self) -> float:
        pairs = zip(self.alice_rates + self.bob_rates,
                    self.alice_rates_check + self.bob_rates_check)
        return max(abs(u - v) for u, v in pairs)

    def no_key(self, tol: float = RATE_TOL, ppt_tol: float = PPT_TOL) -> bool:
        """True when both one-way rates are non-positive and the state is PPT."""
        return self.max_alice <= tol and self.max_bob <= tol and self.ppt_min_eig >= -ppt_tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(max_alice=self.max_alice, max_bob=self.max_bob)
        return d

    def rows(self) -> list[tuple[str, str, float, float]]:
        """``(quantity, input, value, second-path value)`` rows."""
        out = [("ppt_min_eig", "", self.ppt_min_eig, self.ppt_min_eig)]
        out += [("alice_rate", str(x), v, c)
                for x, (v, c) in enumerate(zip(self.alice_rates, self.alice_rates_check))]
        out += [("bob_rate", str(y), v, c)
                for y, (v, c) in enumerate(zip(self.bob_rates, self.bob_rates_check))]
        out += [("max_alice", "", self.max_alice, max(self.alice_rates_check)),
                ("max_bob", "", self.max_bob, max(self.bob_rates_check))]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "input", "value", "check"])
        for name, inp, v, c in self.rows():
            w.writerow([name, inp, f"{v:.12g}", f"{c:.12g}"])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"Vertesi-Brunner state, Alice q = {self.q}",
                 f"minimum eigenvalue of partial transpose: {self.ppt_min_eig:.12g}"]
        for x, v in enumerate(self.alice_rates):
            lines.append(f"H(A|E) - H(A|B), x = {x}: {v:.12g}")
        for y, v in enumerate(self.bob_rates):
            lines.append(f"H(B|E) - H(B|A), y = {y}: {v:.12g}")
        lines.append(f"max over x: {self.max_alice:.12g}")
        lines.append(f"max over y: {self.max_bob:.12g}")
        lines.append(f"no one-way key: {'yes' if self.no_key() else 'no'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _basis(i: int, j: int) -> np.ndarray:
    v = np.zeros(9)
    v[3 * i + j] = 1.0
    return v


def build_vb_state() -> VBState:
    a = math.sqrt(A_SQUARED)
    psis = (
        (_basis(0, 0) + _basis(1, 1)) / math.sqrt(2),
        a / 12 * (_basis(0, 1) + _basis(1, 0)) + _basis(0, 2) / 60 - 3 / 10 * _basis(2, 1),
        a / 12 * (_basis(0, 0) - _basis(1, 1)) + _basis(1, 2) / 60 + 3 / 10 * _basis(2, 0),
        (-_basis(0, 1) + _basis(1, 0) + _basis(2, 2)) / math.sqrt(3),
    )
    kets = tuple(Ket(v, [3, 3], tol=1e-12) for v in psis)
    # lambdas are converted to floats exactly once, here
    rho = sum(float(lam) * np.outer(k.vec, k.vec.conj()) for lam, k in zip(LAMBDAS, kets))
    return VBState(Operator(rho, [3, 3]), LAMBDAS, kets, a)


def alice_vectors(q: Fraction = DEFAULT_Q) -> tuple[np.ndarray, ...]:
    if not 0 <= q <= Fraction(1, 2):
        raise ValueError(f"q = {q} outside [0, 1/2]")
    q = float(q)
    s = math.sqrt(1 - 4 * q * q)
    return (np.array([-q, math.sqrt(3) * q, s]),
            np.array([2 * q, 0.0, s]),
            np.array([-q, -math.sqrt(3) * q, s]))


def bob_vectors() -> tuple[np.ndarray, np.ndarray]:
    return (np.array([0.0, math.sqrt(2 / 3), 1 / math.sqrt(3)]),
            np.array([-1 / math.sqrt(2), -1 / math.sqrt(6), 1 / math.sqrt(3)]))


def build_vb_measurements(q: Fraction = DEFAULT_Q) -> VBMeasurements:
    """Alice ``M_{0|x} = |A_x><A_x|``; Bob ``M_{b|0} = |B_0^b><B_0^b|`` and ``M_{0|1} = |2><2|``.

    Remaining elements are the complements to the identity.
    """
    eye = np.eye(3)
    alice = []
    for v in alice_vectors(q):
        p = np.outer(v, v)
        alice.append(Povm([p, eye - p], tol=1e-12))
    b0, b1 = (np.outer(v, v) for v in bob_vectors())
    p2 = np.diag([0.0, 0.0, 1.0])
    bob = (Povm([b0, b1, eye - b0 - b1], tol=1e-12), Povm([p2, eye - p2], tol=1e-12))
    return VBMeasurements(tuple(alice), bob, Fraction(q))


def ppt_check(rho: Operator, party: int = 1) -> float:
    """Smallest eigenvalue of the partial transpose; ``>= -1e-10`` certifies PPT."""
    return float(eigenvalues_hermitian(partial_transpose(rho, party))[-1])


def one_way_rate(rho_ab: Operator, povm: Povm, party: int) -> float:
    """Devetak-Winter rate ``H(X|E) - H(X|other)`` with ``X`` the outcome of
    ``povm`` on subsystem ``party`` of a purification of ``rho_ab``."""
    if rho_ab.n_parties != 2:
        raise ValueError(f"expected a bipartite state, got dims {rho_ab.dims}")
    return _rate_from_purification(purify(rho_ab), povm, party)


def _rate_from_purification(psi: Ket, povm: Povm, party: int) -> float:
    other = 1 - party
    measured = measure_subsystems(psi, [(party, povm)])
    return (conditional_entropy(measured, [party], [2])
            - conditional_entropy(measured, [party], [other]))


def _rate_blockwise(psi: Ket, povm: Povm, party: int) -> float:
    """Second path: ``H(XE) - H(E) - H(X other) + H(other)``, with the joint
    entropies of the cq states taken as ``H(p) + sum_x p_x H(rho_x)`` from the
    unnormalized conditional states rather than an assembled block operator."""
    other = 1 - party
    rho = psi.density()
    probs, h_e_given, h_o_given = [], [], []
    for element in povm.elements:
        ops = [np.eye(d) for d in psi.dims]
        ops[party] = element
        full = np.kron(np.kron(ops[0], ops[1]), ops[2])
        post = Operator(full @ rho.mat, rho.dims)
        p = post.trace().real
        probs.append(p)
        if p <= 1e-15:
            h_e_given.append(0.0)
            h_o_given.append(0.0)
            continue
        cond_e = partial_trace(post, [2]).mat / p
        cond_o = partial_trace(post, [other]).mat / p
        h_e_given.append(von_neumann_entropy(Operator((cond_e + cond_e.conj().T) / 2)))
        h_o_given.append(von_neumann_entropy(Operator((cond_o + cond_o.conj().T) / 2)))
    probs = np.array(probs)
    h_x = shannon_entropy(probs)
    h_xe = h_x + float(probs @ h_e_given)
    h_xo = h_x + float(probs @ h_o_given)
    return (h_xe - marginal_entropy(rho, [2])) - (h_xo - marginal_entropy(rho, [other]))


def alice_rate(x: int, state: VBState | None = None,
               meas: VBMeasurements | None = None) -> float:
    state = build_vb_state() if state is None else state
    meas = build_vb_measurements() if meas is None else meas
    return _rate_from_purification(state.purification(), meas.alice[x], 0)


def bob_rate(y: int, state: VBState | None = None,
             meas: VBMeasurements | None = None) -> float:
    state = build_vb_state() if state is None else state
    meas = build_vb_measurements() if meas is None else meas
    return _rate_from_purification(state.purification(), meas.bob[y], 1)


def evidence_report(q: Fraction = DEFAULT_Q) -> EvidenceReport:
    state = build_vb_state()
    meas = build_vb_measurements(q)
    psi = state.purification()
    alice = tuple(_rate_from_purification(psi, m, 0) for m in meas.alice)
    bob = tuple(_rate_from_purification(psi, m, 1) for m in meas.bob)
    alice_check = tuple(_rate_blockwise(psi, m, 0) for m in meas.alice)
    bob_check = tuple(_rate_blockwise(psi, m, 1) for m in meas.bob)
    return EvidenceReport(ppt_check(state.rho), alice, bob, alice_check, bob_check, str(meas.q))
