"""Channel-noise detection with trap qubits.

The sender interleaves ``k`` unentangled trap qubits, all in an agreed
eigenstate (|0> or |+>), among the ``n`` data qubits of a register. The
receiver measures the traps in the matching basis and counts how many came
back flipped. Under a per-qubit Pauli channel the flip count ``r`` is
Binomial(k, p), and Hoeffding gives

    Pr(p <= p_th) >= 1 - exp(-2k (p_th - r/k)^2),

so the channel is accepted when ``r`` is at most the ``r_th`` that makes the
right-hand side reach the configured confidence.

Traps are unentangled with the data, so an augmented register is stored as
the data tableau plus a Pauli frame per trap (the accumulated error relative
to its agreed eigenstate). For Pauli channels this is exact; ``to_tableau``
materializes the full ``n + k`` qubit state when an explicit check is wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InvalidConfig, PositionMismatch
from .stabsim import StabilizerTableau

CHANNELS = ("bit_flip", "phase_flip")


@dataclass(frozen=True)
class TrapConfig:
    k: int
    trap_state: str = "zero"
    p_th: float = 0.1
    confidence: float = 0.99

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidConfig(f"need at least one trap qubit, got k={self.k}")
        if self.trap_state not in ("zero", "plus"):
            raise InvalidConfig(f"trap_state must be 'zero' or 'plus', got {self.trap_state!r}")
        if not 0 < self.p_th < 1:
            raise InvalidConfig(f"p_th must lie in (0, 1), got {self.p_th}")
        if not 0 < self.confidence < 1:
            raise InvalidConfig(f"confidence must lie in (0, 1), got {self.confidence}")

    @property
    def channel(self) -> str:
        """The channel this trap flavor detects."""
        return "bit_flip" if self.trap_state == "zero" else "phase_flip"

    def to_record(self) -> dict:
        return {"k": self.k, "trap_state": self.trap_state, "p_th": self.p_th, "confidence": self.confidence}


@dataclass
class AugmentedRegister:
    data: StabilizerTableau
    trap_positions: tuple[int, ...]
    trap_state: str
    # accumulated Pauli error on each trap, in trap_positions order
    frame_x: np.ndarray
    frame_z: np.ndarray

    @property
    def size(self) -> int:
        return self.data.n + len(self.trap_positions)

    def data_slots(self) -> list[int]:
        traps = set(self.trap_positions)
        return [s for s in range(self.size) if s not in traps]

    def to_tableau(self) -> StabilizerTableau:
        """Full tableau with traps placed at their slots."""
        n, size = self.data.n, self.size
        slots = self.data_slots()

        def spread(bits: int) -> int:
            out = 0
            for q in range(n):
                if bits >> q & 1:
                    out |= 1 << slots[q]
            return out

        d = self.data
        xs = [spread(v) for v in d.xs[:n]]
        zs = [spread(v) for v in d.zs[:n]]
        sx = [spread(v) for v in d.xs[n:]]
        sz = [spread(v) for v in d.zs[n:]]
        dsign = d.signs[:n]
        ssign = d.signs[n:]
        for t, pos in enumerate(self.trap_positions):
            bit = 1 << pos
            if self.trap_state == "zero":
                xs.append(bit)
                zs.append(0)
                sx.append(0)
                sz.append(bit)
                ssign = ssign + [int(self.frame_x[t])]
            else:
                xs.append(0)
                zs.append(bit)
                sx.append(bit)
                sz.append(0)
                ssign = ssign + [int(self.frame_z[t])]
            dsign = dsign + [0]
        return StabilizerTableau(size, xs + sx, zs + sz, dsign + ssign)


def insert_traps(register: StabilizerTableau, cfg: TrapConfig, rng: np.random.Generator) -> tuple[AugmentedRegister, tuple[int, ...]]:
    """Interleave ``cfg.k`` traps at uniformly random slots among ``n + k``.

    Returns the augmented register and the position map the receiver is told
    out of band.
    """
    size = register.n + cfg.k
    positions = tuple(sorted(int(p) for p in rng.choice(size, cfg.k, replace=False)))
    zeros = np.zeros(cfg.k, dtype=bool)
    aug = AugmentedRegister(register, positions, cfg.trap_state, zeros, zeros.copy())
    return aug, positions


def apply_channel(aug: AugmentedRegister, p: float, rng: np.random.Generator, channel: str = "bit_flip") -> int:
    """Independent Pauli noise on every slot; returns the number of errors applied."""
    if channel not in CHANNELS:
        raise InvalidConfig(f"unknown channel {channel!r}")
    if p <= 0:
        return 0
    hits = rng.random(aug.size) < p
    trap_index = {pos: t for t, pos in enumerate(aug.trap_positions)}
    slots = aug.data_slots()
    slot_to_qubit = {s: q for q, s in enumerate(slots)}
    for s in np.flatnonzero(hits):
        s = int(s)
        if s in trap_index:
            t = trap_index[s]
            if channel == "bit_flip":
                aug.frame_x[t] ^= True
            else:
                aug.frame_z[t] ^= True
        else:
            q = slot_to_qubit[s]
            if channel == "bit_flip":
                aug.data.apply_x(q)
            else:
                aug.data.apply_z(q)
    return int(hits.sum())


def transmit(register: StabilizerTableau, p: float, rng: np.random.Generator, channel: str = "bit_flip") -> int:
    """Send a bare register through the channel; returns the number of errors."""
    if channel not in CHANNELS:
        raise InvalidConfig(f"unknown channel {channel!r}")
    if p <= 0:
        return 0
    hits = np.flatnonzero(rng.random(register.n) < p)
    for q in hits:
        if channel == "bit_flip":
            register.apply_x(int(q))
        else:
            register.apply_z(int(q))
    return len(hits)


def trap_threshold(cfg: TrapConfig) -> float:
    """Solve ``exp(-2k (p_th - r/k)^2) = 1 - confidence`` for ``r`` below ``k p_th``."""
    k = cfg.k
    r_th = k * cfg.p_th - k * math.sqrt(math.log(1 / (1 - cfg.confidence)) / (2 * k))
    if r_th < 0:
        raise Infeasible(f"k={k} traps cannot certify p <= {cfg.p_th} at confidence {cfg.confidence}")
    return r_th


def hoeffding_margin(k: int, confidence: float) -> float:
    """``sqrt(ln(1/(1-confidence)) / (2k))``: the one-sided deviation at that confidence."""
    return math.sqrt(math.log(1 / (1 - confidence)) / (2 * k))


def traps_for_margin(p_th: float, p: float, confidence: float = 0.99) -> int:
    """Fewest traps such that a channel at rate ``p`` passes with probability
    at least ``confidence`` (guaranteed by Hoeffding).

    Passing needs ``r/k <= p_th - margin`` and Hoeffding keeps ``r/k`` below
    ``p + margin`` at that confidence, so ``2 * margin <= p_th - p``.
    """
    if not 0 <= p < p_th < 1:
        raise Infeasible(f"need 0 <= p < p_th < 1, got p={p}, p_th={p_th}")
    gap = p_th - p
    return math.ceil(2 * math.log(1 / (1 - confidence)) / gap**2)


def check_traps(aug: AugmentedRegister, cfg: TrapConfig, positions: tuple[int, ...]) -> tuple[int, bool, StabilizerTableau]:
    """Measure the traps in their check basis and strip them.

    Returns ``(r, accepted, data register)`` where ``r`` counts traps that
    did not return their agreed outcome.
    """
    if tuple(positions) != aug.trap_positions or len(positions) != cfg.k or aug.trap_state != cfg.trap_state:
        raise PositionMismatch("trap positions or flavor differ from what was sent")
    # |0> traps are read in Z (flipped by X/Y errors); |+> traps in X (flipped by Z/Y)
    flipped = aug.frame_x if cfg.trap_state == "zero" else aug.frame_z
    r = int(np.count_nonzero(flipped))
    return r, r <= trap_threshold(cfg), aug.data
