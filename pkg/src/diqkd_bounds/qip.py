"""Dense quantum-information primitives.

Every operator carries an explicit list of subsystem dimensions and every
operation addresses subsystems by position. Nothing is reordered implicitly.
Entropies are in bits and are evaluated from Hermitian eigendecompositions
only (there is no matrix-logarithm path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Hermiticity / PSD / trace tolerance for unit-trace operators.
TOL = 1e-9
#: Eigenvalues with magnitude below this are set to zero before taking logs.
EIG_CLIP = 1e-12

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _frozen(mat: np.ndarray) -> np.ndarray:
    arr = np.array(mat, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix with a tensor-factor structure.

    Parameters
    ----------
    mat : array_like
        ``d x d`` matrix.
    dims : sequence of int
        Subsystem dimensions; their product must equal ``d``.
    """

    mat: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, mat, dims: Sequence[int] | None = None):
        arr = _frozen(mat)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator must be square, got shape {arr.shape}")
        dims = (arr.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {dims}")
        if math.prod(dims) != arr.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to side length {arr.shape[0]}")
        object.__setattr__(self, "mat", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def is_hermitian(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T), initial=0.0) <= tol)

    def is_density(self, tol: float = TOL) -> bool:
        """Hermitian, positive semidefinite and unit trace, all within ``tol``."""
        if not self.is_hermitian(tol):
            return False
        if abs(self.trace() - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh(_hermitize(self.mat))[0] >= -tol)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return Operator(self.mat @ other.mat, self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return Operator(self.mat + other.mat, self.dims)

    def __mul__(self, scalar) -> "Operator":
        return Operator(scalar * self.mat, self.dims)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Ket:
    """Normalized pure state vector with subsystem dimensions."""

    vec: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, vec, dims: Sequence[int] | None = None, tol: float = TOL):
        arr = np.array(vec, dtype=complex).reshape(-1)
        dims = (arr.size,) if dims is None else tuple(int(d) for d in dims)
        if math.prod(dims) != arr.size:
            raise ValueError(f"dims {dims} do not multiply to vector length {arr.size}")
        norm = np.vdot(arr, arr).real
        if abs(norm - 1) > tol:
            raise ValueError(f"ket is not normalized: squared norm {norm}")
        arr.flags.writeable = False
        object.__setattr__(self, "vec", arr)
        object.__setattr__(self, "dims", dims)

    def density(self) -> Operator:
        return Operator(np.outer(self.vec, self.vec.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered POVM elements acting on a single subsystem."""

    elements: tuple[np.ndarray, ...]

    def __init__(self, elements: Iterable, tol: float = TOL):
        els = tuple(_frozen(e) for e in elements)
        if not els:
            raise ValueError("a POVM needs at least one element")
        d = els[0].shape[0]
        for e in els:
            if e.shape != (d, d):
                raise ValueError("POVM elements must share one square shape")
            if np.max(np.abs(e - e.conj().T)) > tol:
                raise ValueError("POVM element is not Hermitian")
            if np.linalg.eigvalsh(_hermitize(e))[0] < -tol:
                raise ValueError("POVM element is not positive semidefinite")
        if np.max(np.abs(sum(els) - np.eye(d))) > tol:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.elements[k]

    @classmethod
    def computational(cls, d: int) -> "Povm":
        return cls(np.diag(np.eye(d)[k]) for k in range(d))

    @classmethod
    def from_observable(cls, obs) -> "Povm":
        """Binary POVM ``(I + O)/2, (I - O)/2`` of a +/-1-valued observable.

        Outcome 0 corresponds to eigenvalue +1.
        """
        obs = np.asarray(obs, dtype=complex)
        eye = np.eye(obs.shape[0])
        return cls([(eye + obs) / 2, (eye - obs) / 2])

    def observable(self) -> np.ndarray:
        """``E = M_0 - M_1`` for a two-outcome POVM."""
        if self.n_outcomes != 2:
            raise ValueError("observable is defined for two-outcome POVMs only")
        return self.elements[0] - self.elements[1]


@dataclass(frozen=True, eq=False)
class Channel:
    """Quantum channel in Kraus form, ``rho -> sum_k K rho K^dagger``."""

    kraus: tuple[np.ndarray, ...]

    def __init__(self, kraus: Iterable, tol: float = 1e-10):
        ks = tuple(_frozen(np.atleast_2d(k)) for k in kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise ValueError("Kraus operators must share one shape")
        completeness = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(completeness - np.eye(shape[1]))) > tol:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus[0].shape[0]

    @classmethod
    def identity(cls, d: int) -> "Channel":
        return cls([np.eye(d)])

    @classmethod
    def trace_out(cls, d: int) -> "Channel":
        return cls([np.eye(d)[k][None, :] for k in range(d)])


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.conj().T) / 2


def _as_operator(state) -> Operator:
    return state.density() if isinstance(state, Ket) else state


def _check_parties(parties: Iterable[int], n: int) -> list[int]:
    parties = [int(k) for k in parties]
    for k in parties:
        if not 0 <= k < n:
            raise IndexError(f"subsystem index {k} out of range for {n} subsystems")
    if len(set(parties)) != len(parties):
        raise ValueError(f"repeated subsystem index in {parties}")
    return parties


def _embed(op: np.ndarray, dims: Sequence[int], party: int) -> np.ndarray:
    """``I x op x I`` with ``op`` on position ``party``; ``op`` may be rectangular."""
    left = math.prod(dims[:party])
    right = math.prod(dims[party + 1:])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


# ---------------------------------------------------------------------------
# composition and reduction


def tensor(*ops: Operator) -> Operator:
    """Kronecker product; dimension lists are concatenated."""
    if not ops:
        raise ValueError("tensor needs at least one operator")
    mat = ops[0].mat
    dims = list(ops[0].dims)
    for op in ops[1:]:
        mat = np.kron(mat, op.mat)
        dims.extend(op.dims)
    return Operator(mat, dims)


def ket_tensor(*kets: Ket) -> Ket:
    vec = kets[0].vec
    dims = list(kets[0].dims)
    for k in kets[1:]:
        vec = np.kron(vec, k.vec)
        dims.extend(k.dims)
    return Ket(vec, dims)


def partial_trace(rho: Operator, keep: Iterable[int]) -> Operator:
    """Trace out every subsystem not in ``keep``.

    The kept subsystems stay in their original relative order regardless of
    the order in which ``keep`` lists them.
    """
    n = rho.n_parties
    keep = sorted(_check_parties(keep, n))
    if len(keep) == n:
        return rho
    rows = list(_LETTERS[:n])
    cols = list(_LETTERS[n:2 * n])
    for k in range(n):
        if k not in keep:
            cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out,
                  rho.mat.reshape(rho.dims + rho.dims))
    kept = [rho.dims[k] for k in keep]
    d = math.prod(kept)
    return Operator(t.reshape(d, d), kept)


def permute(rho: Operator, order: Sequence[int]) -> Operator:
    """Reorder subsystems: new position ``i`` holds old subsystem ``order[i]``."""
    n = rho.n_parties
    order = _check_parties(order, n)
    if len(order) != n:
        raise ValueError("permute needs every subsystem exactly once")
    t = rho.mat.reshape(rho.dims + rho.dims)
    t = t.transpose(list(order) + [k + n for k in order])
    return Operator(t.reshape(rho.dim, rho.dim), [rho.dims[k] for k in order])


def partial_transpose(rho: Operator, party: int) -> Operator:
    """Transpose the tensor factor at position ``party`` only."""
    n = rho.n_parties
    _check_parties([party], n)
    axes = list(range(2 * n))
    axes[party], axes[party + n] = axes[party + n], axes[party]
    t = rho.mat.reshape(rho.dims + rho.dims).transpose(axes)
    return Operator(t.reshape(rho.dim, rho.dim), rho.dims)


# ---------------------------------------------------------------------------
# spectra and entropies


def eigenvalues_hermitian(op: Operator, tol: float = TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian operator in descending order."""
    if not op.is_hermitian(tol):
        raise ValueError("operator is not Hermitian within tolerance")
    return np.linalg.eigvalsh(_hermitize(op.mat))[::-1]


def _entropy_of_spectrum(w: np.ndarray, tol: float = TOL) -> float:
    if w.size and w.min() < -tol:
        raise ValueError(f"negative eigenvalue {w.min():.3e}: not a valid state")
    w = w[w > EIG_CLIP]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho: Operator, tol: float = TOL) -> float:
    """Von Neumann entropy in bits, with ``0 log 0 = 0``."""
    return _entropy_of_spectrum(eigenvalues_hermitian(rho, tol), tol)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_CLIP]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(x: float, tol: float = TOL) -> float:
    """``h(x) = -x log2 x - (1-x) log2(1-x)`` with ``h(0) = h(1) = 0``."""
    if not -tol <= x <= 1 + tol:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def marginal_entropy(rho: Operator, parties: Iterable[int]) -> float:
    """``H(parties)``; the empty set has entropy zero."""
    parties = list(parties)
    if not parties:
        return 0.0
    return von_neumann_entropy(partial_trace(rho, parties))


def conditional_entropy(rho: Operator, parties_a: Iterable[int],
                        parties_b: Iterable[int] = ()) -> float:
    """``H(A|B) = H(AB) - H(B)``."""
    a, b = list(parties_a), list(parties_b)
    _check_parties(a + b, rho.n_parties)
    return marginal_entropy(rho, a + b) - marginal_entropy(rho, b)


def mutual_information(rho: Operator, parties_a: Iterable[int],
                       parties_b: Iterable[int]) -> float:
    return conditional_mutual_information(rho, parties_a, parties_b, ())


def conditional_mutual_information(rho: Operator, parties_a: Iterable[int],
                                   parties_b: Iterable[int],
                                   parties_e: Iterable[int],
                                   tol: float = TOL) -> float:
    """``I(A;B|E) = H(AE) + H(BE) - H(E) - H(ABE)`` in bits.

    Subsystems outside the three index sets are traced out. Values in
    ``[-tol, 0)`` are clamped to zero; anything more negative would violate
    strong subadditivity and raises.
    """
    a, b, e = list(parties_a), list(parties_b), list(parties_e)
    _check_parties(a + b + e, rho.n_parties)
    red = partial_trace(rho, a + b + e)
    # re-index into the reduced operator, which keeps the original order
    pos = {old: new for new, old in enumerate(sorted(a + b + e))}
    a, b, e = ([pos[k] for k in s] for s in (a, b, e))
    value = (marginal_entropy(red, a + e) + marginal_entropy(red, b + e)
             - marginal_entropy(red, e) - marginal_entropy(red, a + b + e))
    if value < -tol:
        raise ValueError(f"conditional mutual information {value:.3e} < 0")
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# purification, measurement, channels


def purify(rho: Operator, tol: float = TOL) -> Ket:
    """Spectral purification ``sum_i sqrt(l_i) |v_i> |i>_env``.

    The environment is appended as the last subsystem, with dimension equal to
    the rank of ``rho`` and basis vectors ordered by descending eigenvalue.
    """
    if not rho.is_density(tol):
        raise ValueError("purify expects a density operator")
    w, v = np.linalg.eigh(_hermitize(rho.mat))
    w, v = w[::-1], v[:, ::-1]
    rank = max(int(np.sum(w > EIG_CLIP)), 1)
    w = np.clip(w[:rank], 0.0, None)
    w = w / w.sum()
    vec = sum(np.sqrt(w[i]) * np.kron(v[:, i], np.eye(rank)[i]) for i in range(rank))
    vec = vec / np.linalg.norm(vec)
    return Ket(vec, list(rho.dims) + [rank])


def _insert_register(rest: Operator, diag_block: np.ndarray, position: int) -> Operator:
    """Place a register ``diag_block`` (d x d) at ``position`` in front of ``rest``."""
    full = tensor(Operator(diag_block), rest)
    order = list(range(1, position + 1)) + [0] + list(range(position + 1, full.n_parties))
    return permute(full, order)


def measure_subsystems(state, assignments: Sequence[tuple[int, Povm]]) -> Operator:
    """Measure the listed subsystems and keep the outcomes as classical registers.

    Each measured subsystem is replaced in place by a register whose dimension
    is the number of POVM outcomes; the result is block diagonal in those
    registers and has unit trace. Unmeasured subsystems stay quantum.
    """
    rho = _as_operator(state)
    parties = _check_parties([p for p, _ in assignments], rho.n_parties)
    for party, povm in zip(parties, (m for _, m in assignments)):
        if povm.dim != rho.dims[party]:
            raise ValueError(
                f"POVM dimension {povm.dim} does not match subsystem {party} "
                f"of dimension {rho.dims[party]}")
        others = [k for k in range(rho.n_parties) if k != party]
        n_out = povm.n_outcomes
        out = None
        for o, element in enumerate(povm.elements):
            post = Operator(_embed(element, rho.dims, party) @ rho.mat, rho.dims)
            block = partial_trace(post, others) if others else Operator(
                [[post.trace()]])
            reg = np.zeros((n_out, n_out))
            reg[o, o] = 1.0
            if others:
                term = _insert_register(block, reg, party)
            else:
                term = Operator(reg * block.mat[0, 0])
            out = term if out is None else out + term
        rho = Operator(_hermitize(out.mat), out.dims)
    return rho


def apply_channel(rho: Operator, channel: Channel, party: int) -> Operator:
    """Apply ``channel`` to subsystem ``party``; its dimension may change."""
    _check_parties([party], rho.n_parties)
    if channel.in_dim != rho.dims[party]:
        raise ValueError(
            f"channel input dimension {channel.in_dim} does not match "
            f"subsystem {party} of dimension {rho.dims[party]}")
    out_dims = list(rho.dims)
    out_dims[party] = channel.out_dim
    mat = sum(k_full @ rho.mat @ k_full.conj().T
              for k_full in (_embed(k, rho.dims, party) for k in channel.kraus))
    return Operator(_hermitize(mat), out_dims)


def ket(*amplitudes, dims: Sequence[int] | None = None) -> Ket:
    """Convenience constructor that normalizes the given amplitudes."""
    vec = np.asarray(amplitudes[0] if len(amplitudes) == 1 else amplitudes, dtype=complex)
    return Ket(vec / np.linalg.norm(vec), dims)


def basis_projector(d: int, k: int) -> np.ndarray:
    proj = np.zeros((d, d))
    proj[k, k] = 1.0
    return proj


# ---------------------------------------------------------------------------
# random objects for property checks


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(dims: Sequence[int], rng: np.random.Generator,
                   rank: int | None = None) -> Operator:
    """Random mixed state from the induced (Ginibre) measure."""
    d = math.prod(dims)
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return Operator(rho / np.trace(rho).real, dims)


def random_channel(d_in: int, d_out: int, n_kraus: int,
                   rng: np.random.Generator) -> Channel:
    """Random channel from a Haar isometry ``d_in -> d_out * n_kraus``."""
    if d_out * n_kraus < d_in:
        raise ValueError("need d_out * n_kraus >= d_in for an isometry")
    u = random_unitary(d_out * n_kraus, rng)
    v = u[:, :d_in].reshape(d_out, n_kraus, d_in)
    return Channel(v[:, k, :] for k in range(n_kraus))
