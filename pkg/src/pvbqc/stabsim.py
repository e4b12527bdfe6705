"""Stabilizer tableau simulation with a dense statevector oracle.

The tableau follows the Aaronson-Gottesman layout: rows ``0..n-1`` are
destabilizers, rows ``n..2n-1`` stabilizers. Each row stores its X and Z
parts as Python integers used as bit vectors (bit ``q`` is qubit ``q``) and a
sign bit. Qubits are 0-based here; graph vertex ``v`` lives on qubit ``v-1``.

The dense side (``DenseState``, ``Ensemble``) is a plain statevector
simulator capped at ``DENSE_CAP`` qubits. It builds graph states directly by
applying controlled-Z phases, never through the tableau, so it can serve as
an independent check on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidParams, TooLarge
from .graph import ColoredGraph

DENSE_CAP = 12

_LABEL = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


def _phase_exp(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of ``i`` picked up when multiplying Hermitian Paulis ``P1 * P2``.

    A Hermitian Pauli with bits (x, z) is ``i^{|x&z|} X^x Z^z``.
    """
    a1 = (x1 & z1).bit_count()
    a2 = (x2 & z2).bit_count()
    a3 = ((x1 ^ x2) & (z1 ^ z2)).bit_count()
    return (a1 + a2 + 2 * (z1 & x2).bit_count() - a3) % 4


def _anticommute(x1: int, z1: int, x2: int, z2: int) -> int:
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) & 1


@dataclass(frozen=True)
class PauliString:
    """``sign * P_0 ⊗ ... ⊗ P_{n-1}`` with sign ±1; Y has both bits set."""

    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidParams(f"sign must be ±1, got {self.sign}")
        if self.x >> self.n or self.z >> self.n:
            raise InvalidParams("Pauli support exceeds qubit count")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        sign = 1
        if label[:1] in "+-":
            sign = -1 if label[0] == "-" else 1
            label = label[1:]
        x = z = 0
        for q, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch not in "IXYZ":
                raise InvalidParams(f"bad Pauli symbol {ch!r}")
        return cls(len(label), x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        x = 1 << qubit if kind in "XY" else 0
        z = 1 << qubit if kind in "ZY" else 0
        return cls(n, x, z)

    @property
    def label(self) -> str:
        body = "".join(_LABEL[(self.x >> q & 1, self.z >> q & 1)] for q in range(self.n))
        return ("+" if self.sign > 0 else "-") + body

    def commutes(self, other: "PauliString") -> bool:
        return not _anticommute(self.x, self.z, other.x, other.z)

    def __mul__(self, other: "PauliString") -> "PauliString":
        e = _phase_exp(self.x, self.z, other.x, other.z)
        if e % 2:
            raise InvalidParams("product of anticommuting Paulis is not Hermitian")
        sign = self.sign * other.sign * (-1 if e == 2 else 1)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, sign)


class StabilizerTableau:
    """n-qubit stabilizer state with destabilizer bookkeeping."""

    __slots__ = ("n", "xs", "zs", "signs")

    def __init__(self, n: int, xs: list[int], zs: list[int], signs: list[int]):
        self.n = n
        self.xs = xs
        self.zs = zs
        self.signs = signs  # 0 for +, 1 for -

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        """|0...0>: destabilizers X_q, stabilizers Z_q."""
        bits = [1 << q for q in range(n)]
        return cls(n, bits + [0] * n, [0] * n + bits, [0] * (2 * n))

    @classmethod
    def plus_state(cls, n: int) -> "StabilizerTableau":
        bits = [1 << q for q in range(n)]
        return cls(n, [0] * n + bits, bits + [0] * n, [0] * (2 * n))

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.xs[:], self.zs[:], self.signs[:])

    @property
    def generators(self) -> list[PauliString]:
        n = self.n
        return [
            PauliString(n, self.xs[r], self.zs[r], -1 if self.signs[r] else 1)
            for r in range(n, 2 * n)
        ]

    @property
    def destabilizers(self) -> list[PauliString]:
        return [PauliString(self.n, self.xs[r], self.zs[r]) for r in range(self.n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (self.n, self.xs, self.zs, self.signs) == (other.n, other.xs, other.zs, other.signs)

    def __str__(self) -> str:
        return "\n".join(p.label for p in self.generators)

    def dump(self) -> str:
        """Text dump: destabilizer rows, a separator, then stabilizer rows."""
        lines = [p.label[1:] for p in self.destabilizers]
        return "\n".join(lines + ["-" * self.n, str(self)])

    def is_valid(self) -> bool:
        """Stabilizers commute pairwise and the 2n rows are independent."""
        n = self.n
        rows = range(n, 2 * n)
        for a in rows:
            for b in rows:
                if a < b and _anticommute(self.xs[a], self.zs[a], self.xs[b], self.zs[b]):
                    return False
        return _gf2_rank([(self.xs[r] << n) | self.zs[r] for r in range(2 * n)]) == 2 * n

    def _rowmult(self, h: int, i: int) -> None:
        # row h <- row h * row i
        e = 2 * self.signs[h] + 2 * self.signs[i] + _phase_exp(self.xs[h], self.zs[h], self.xs[i], self.zs[i])
        self.xs[h] ^= self.xs[i]
        self.zs[h] ^= self.zs[i]
        self.signs[h] = (e % 4) >> 1

    def measure(self, qubit: int, basis: str, rng: np.random.Generator) -> int:
        """Measure one qubit in the X or Z basis in place; return ±1."""
        n = self.n
        xs, zs, signs = self.xs, self.zs, self.signs
        bit = 1 << qubit
        # a row anticommutes with X_q iff it has Z on q, and with Z_q iff it has X on q
        if basis == "X":
            probe, px, pz = zs, bit, 0
        elif basis == "Z":
            probe, px, pz = xs, 0, bit
        else:
            raise InvalidParams(f"basis must be 'X' or 'Z', got {basis!r}")

        p = -1
        for r in range(n, 2 * n):
            if probe[r] & bit:
                p = r
                break
        if p >= 0:
            for r in range(2 * n):
                if r != p and probe[r] & bit:
                    self._rowmult(r, p)
            d = p - n
            xs[d], zs[d], signs[d] = xs[p], zs[p], signs[p]
            outcome_bit = 1 if rng.random() < 0.5 else 0
            xs[p], zs[p], signs[p] = px, pz, outcome_bit
            return -1 if outcome_bit else 1

        sx = sz = 0
        e = 0
        for d in range(n):
            if probe[d] & bit:
                r = d + n
                e += 2 * signs[r] + _phase_exp(sx, sz, xs[r], zs[r])
                sx ^= xs[r]
                sz ^= zs[r]
        return -1 if (e % 4) >> 1 else 1

    def apply_pauli(self, p: PauliString) -> "StabilizerTableau":
        """Conjugate by ``p`` in place (global phase of ``p`` is irrelevant)."""
        if p.n != self.n:
            raise InvalidParams(f"Pauli on {p.n} qubits applied to {self.n}-qubit state")
        for r in range(2 * self.n):
            if _anticommute(self.xs[r], self.zs[r], p.x, p.z):
                self.signs[r] ^= 1
        return self

    def apply_x(self, qubit: int) -> None:
        bit = 1 << qubit
        for r in range(2 * self.n):
            if self.zs[r] & bit:
                self.signs[r] ^= 1

    def apply_z(self, qubit: int) -> None:
        bit = 1 << qubit
        for r in range(2 * self.n):
            if self.xs[r] & bit:
                self.signs[r] ^= 1


def _gf2_rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                rank += 1
                break
    return rank


def graph_state_tableau(n: int, edges: Iterable[tuple[int, int]]) -> StabilizerTableau:
    """Tableau of the graph state on vertices ``1..n`` (any simple graph)."""
    nbr = [0] * n
    for i, j in edges:
        nbr[i - 1] |= 1 << (j - 1)
        nbr[j - 1] |= 1 << (i - 1)
    bits = [1 << q for q in range(n)]
    # destabilizer Z_i anticommutes with g_i only
    return StabilizerTableau(n, [0] * n + bits, bits + nbr, [0] * (2 * n))


def prepare_graph_state(g: ColoredGraph) -> StabilizerTableau:
    """Stabilizers ``g_i = X_i prod_{k in N(i)} Z_k`` with all signs +."""
    return graph_state_tableau(g.n, g.edges)


def measure_single_qubit(state: StabilizerTableau, qubit: int, basis: str, rng: np.random.Generator) -> int:
    """Born-rule measurement of ``qubit`` (0-based); ``state`` collapses in place."""
    if not 0 <= qubit < state.n:
        raise InvalidParams(f"qubit {qubit} out of range for {state.n} qubits")
    return state.measure(qubit, basis, rng)


def apply_pauli(state: StabilizerTableau, p: PauliString) -> StabilizerTableau:
    return state.apply_pauli(p)


# ---------------------------------------------------------------------------
# dense oracle


def _check_cap(n: int, cap: int = DENSE_CAP) -> None:
    if n > cap:
        raise TooLarge(f"{n} qubits exceeds dense cap of {cap}")


def _bit_index(n: int, qubit: int) -> int:
    # qubit 0 is the most significant bit of the basis index
    return n - 1 - qubit


def _apply_pauli_vec(n: int, p: PauliString, vec: np.ndarray) -> np.ndarray:
    idx = np.arange(1 << n)
    xmask = zmask = 0
    for q in range(n):
        if p.x >> q & 1:
            xmask |= 1 << _bit_index(n, q)
        if p.z >> q & 1:
            zmask |= 1 << _bit_index(n, q)
    parity = np.zeros(1 << n, dtype=np.int64)
    t = idx & zmask
    while zmask:
        parity ^= t & 1
        t = t >> 1
        zmask >>= 1
    coef = (1j ** (p.x & p.z).bit_count()) * p.sign * (1 - 2 * parity)
    out = np.empty_like(vec)
    out[idx ^ xmask] = coef * vec
    return out


class DenseState:
    """Statevector on at most ``DENSE_CAP`` qubits (big-endian: qubit 0 is leftmost)."""

    def __init__(self, n: int, amplitudes: np.ndarray, normalize: bool = True):
        _check_cap(n)
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(1 << n)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise InvalidParams("zero vector is not a state")
            amps = amps / norm
        self.n = n
        self.amplitudes = amps

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy(), normalize=False)

    @classmethod
    def basis(cls, n: int, index: int) -> "DenseState":
        v = np.zeros(1 << n, dtype=np.complex128)
        v[index] = 1
        return cls(n, v, normalize=False)

    @classmethod
    def product(cls, qubit_states: Sequence[Sequence[complex]]) -> "DenseState":
        v = np.array([1.0 + 0j])
        for s in qubit_states:
            v = np.kron(v, np.asarray(s, dtype=np.complex128))
        return cls(len(qubit_states), v)

    def apply_pauli(self, p: PauliString) -> "DenseState":
        self.amplitudes = _apply_pauli_vec(self.n, p, self.amplitudes)
        return self

    def apply_single_qubit(self, unitary: np.ndarray, qubit: int) -> "DenseState":
        psi = self.amplitudes.reshape([2] * self.n)
        psi = np.moveaxis(np.tensordot(unitary, psi, axes=([1], [qubit])), 0, qubit)
        self.amplitudes = psi.reshape(-1)
        return self

    def expectation(self, p: PauliString) -> float:
        return float(np.vdot(self.amplitudes, _apply_pauli_vec(self.n, p, self.amplitudes)).real)

    def overlap(self, other: "DenseState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def measure(self, qubit: int, basis: str, rng: np.random.Generator) -> int:
        """Projective X/Z measurement with collapse; returns ±1."""
        if basis == "X":
            self.apply_single_qubit(_HADAMARD, qubit)
        psi = self.amplitudes.reshape([2] * self.n)
        p0 = float(np.sum(np.abs(np.take(psi, 0, axis=qubit)) ** 2))
        bit = 0 if rng.random() < p0 else 1
        keep = np.zeros(2)
        keep[bit] = 1
        shape = [1] * self.n
        shape[qubit] = 2
        psi = psi * keep.reshape(shape)
        self.amplitudes = (psi / np.linalg.norm(psi)).reshape(-1)
        if basis == "X":
            self.apply_single_qubit(_HADAMARD, qubit)
        return 1 - 2 * bit

    def basis_probabilities(self, bases: Sequence[str]) -> np.ndarray:
        """Joint outcome distribution when qubit q is measured in ``bases[q]``.

        Index bit ``n-1-q`` set means qubit q gave -1.
        """
        tmp = self.copy()
        for q, b in enumerate(bases):
            if b == "X":
                tmp.apply_single_qubit(_HADAMARD, q)
            elif b != "Z":
                raise InvalidParams(f"basis must be 'X' or 'Z', got {b!r}")
        return np.abs(tmp.amplitudes) ** 2


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


@dataclass
class Ensemble:
    """Mixed state as an explicit list of pure states with probabilities."""

    states: list[Union[DenseState, StabilizerTableau]]
    weights: list[float]

    def __post_init__(self):
        if len(self.states) != len(self.weights) or not self.states:
            raise InvalidParams("ensemble needs one weight per state and at least one state")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1) > 1e-9:
            raise InvalidParams("ensemble weights must be a probability vector")

    @classmethod
    def pure(cls, state) -> "Ensemble":
        return cls([state], [1.0])

    @classmethod
    def maximally_mixed(cls, n: int) -> "Ensemble":
        _check_cap(n)
        dim = 1 << n
        return cls([DenseState.basis(n, b) for b in range(dim)], [1.0 / dim] * dim)

    @property
    def n(self) -> int:
        return self.states[0].n

    def dense(self) -> list[tuple[float, DenseState]]:
        return [(w, s if isinstance(s, DenseState) else to_dense(s)) for w, s in zip(self.weights, self.states)]


def dense_graph_state(n: int, edges: Iterable[tuple[int, int]]) -> DenseState:
    """|G> = prod CZ |+>^n built directly on amplitudes."""
    _check_cap(n)
    idx = np.arange(1 << n)
    sign = np.ones(1 << n)
    for i, j in edges:
        bi = (idx >> _bit_index(n, i - 1)) & 1
        bj = (idx >> _bit_index(n, j - 1)) & 1
        sign = sign * (1 - 2 * (bi & bj))
    return DenseState(n, sign / np.sqrt(1 << n), normalize=False)


def to_dense(state: StabilizerTableau, cap: int = DENSE_CAP) -> DenseState:
    """Statevector of a tableau, global phase fixed so the first nonzero amplitude is real positive."""
    n = state.n
    _check_cap(n, cap)
    # project a fixed generic vector onto the joint +1 eigenspace
    gen = np.random.default_rng(0x5EED)
    v = gen.normal(size=1 << n) + 1j * gen.normal(size=1 << n)
    for p in state.generators:
        v = 0.5 * (v + _apply_pauli_vec(n, p, v))
    v /= np.linalg.norm(v)
    first = np.flatnonzero(np.abs(v) > 1e-9)[0]
    v *= np.conj(v[first]) / abs(v[first])
    v[np.abs(v) < 1e-14] = 0
    return DenseState(n, v, normalize=False)


StateLike = Union[StabilizerTableau, DenseState, Ensemble]


def _as_ensemble(state: StateLike) -> Ensemble:
    return state if isinstance(state, Ensemble) else Ensemble.pure(state)


def fidelity_oracle(state: StateLike, target: ColoredGraph) -> float:
    """Exact ``<G|rho|G>`` for a pure state or ensemble."""
    ens = _as_ensemble(state)
    _check_cap(ens.n)
    if ens.n != target.n:
        raise InvalidParams(f"state has {ens.n} qubits, graph has {target.n} vertices")
    ref = dense_graph_state(target.n, target.edges)
    f = sum(w * abs(ref.overlap(s)) ** 2 for w, s in ens.dense())
    return float(min(1.0, max(0.0, f)))
