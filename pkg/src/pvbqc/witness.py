"""Two-setting entanglement witness for 2-colorable graph states and the
batch verification test built on it.

Setting ``j`` measures X on every vertex of color class ``S_j`` and Z on the
rest; from one shot the product ``x_i * prod_{k in N(i)} z_k`` is the outcome
of stabilizer ``g_i`` for each ``i`` in ``S_j``. A register *passes* setting
``j`` (M_j = 1) when every such product is +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainMismatch, InvalidParams, OddBatch, ThresholdOutOfRange
from .graph import ColoredGraph, neighbors
from .stabsim import (
    PauliString,
    StabilizerTableau,
    StateLike,
    _apply_pauli_vec,
    _as_ensemble,
    _check_cap,
)


@dataclass(frozen=True)
class MeasurementSetting:
    color_index: int
    basis_map: dict[int, str]

    @property
    def n(self) -> int:
        return len(self.basis_map)

    @property
    def x_vertices(self) -> frozenset[int]:
        return frozenset(v for v, b in self.basis_map.items() if b == "X")

    @property
    def local_measurements(self) -> int:
        return len(self.basis_map)


@dataclass(frozen=True)
class SettingOutcome:
    j: int
    x: dict[int, int]
    z: dict[int, int]


@dataclass
class VerificationVerdict:
    K1: int
    K2: int
    C: float
    accepted: bool
    group1: tuple[int, ...]
    group2: tuple[int, ...]
    # (register index, setting, M) in measurement order
    records: tuple[tuple[int, int, int], ...] = field(default=(), repr=False)
    seed: Optional[int] = None

    @property
    def failures(self) -> int:
        return self.K1 + self.K2

    def accepts(self, C: float) -> bool:
        """Re-evaluate this outcome record against another threshold."""
        return self.K1 + self.K2 <= C

    def to_record(self) -> dict:
        return {
            "group_sizes": [len(self.group1), len(self.group2)],
            "K1": self.K1,
            "K2": self.K2,
            "C": self.C,
            "accepted": self.accepted,
            "seed": self.seed,
            "group1": list(self.group1),
            "failed": [idx for idx, _, m in self.records if m == 0],
        }


def setting_for_color(g: ColoredGraph, j: int) -> MeasurementSetting:
    s = g.color_class(j)
    return MeasurementSetting(j, {v: ("X" if v in s else "Z") for v in g.vertices})


def measure_setting(state: StabilizerTableau, setting: MeasurementSetting, rng: np.random.Generator) -> SettingOutcome:
    """Measure every qubit in ascending vertex order. The register is consumed."""
    if state.n != setting.n:
        raise InvalidParams(f"register has {state.n} qubits, setting covers {setting.n}")
    x: dict[int, int] = {}
    z: dict[int, int] = {}
    for v in range(1, setting.n + 1):
        b = setting.basis_map[v]
        out = state.measure(v - 1, b, rng)
        (x if b == "X" else z)[v] = out
    return SettingOutcome(setting.color_index, x, z)


def compute_Mj(g: ColoredGraph, outcome: SettingOutcome) -> int:
    s = g.color_class(outcome.j)
    if set(outcome.x) != s or len(outcome.x) + len(outcome.z) != g.n or set(outcome.z) & s:
        raise DomainMismatch(f"outcome domains do not match color class {outcome.j}")
    z = outcome.z
    for i in s:
        prod = outcome.x[i]
        for k in neighbors(g, i):
            prod *= z[k]
        if prod != 1:
            return 0
    return 1


def _projector_expectation(vec: np.ndarray, n: int, stabs: Sequence[PauliString]) -> float:
    for p in stabs:
        vec = 0.5 * (vec + _apply_pauli_vec(n, p, vec))
    return float(np.vdot(vec, vec).real)


def stabilizer_pauli(g: ColoredGraph, i: int) -> PauliString:
    """``g_i`` as a Pauli string on qubits ``0..n-1``."""
    z = 0
    for k in neighbors(g, i):
        z |= 1 << (k - 1)
    return PauliString(g.n, 1 << (i - 1), z)


def pass_probability(state: StateLike, g: ColoredGraph, j: int) -> float:
    """``Tr(prod_{i in S_j} (g_i + I)/2  rho)``: the mean of M_j."""
    ens = _as_ensemble(state)
    _check_cap(ens.n)
    stabs = [stabilizer_pauli(g, i) for i in sorted(g.color_class(j))]
    return sum(w * _projector_expectation(s.amplitudes, g.n, stabs) for w, s in ens.dense())


def witness_expectation(state: StateLike, g: ColoredGraph) -> float:
    """``Tr(W rho)`` with ``W = 3I - 2(P_1 + P_2)``, ``P_j`` the color-class projectors."""
    return 3.0 - 2.0 * (pass_probability(state, g, 1) + pass_probability(state, g, 2))


def fidelity_from_witness(trW: float) -> float:
    return 0.5 - 0.5 * trW


def run_verification(
    registers: Sequence[StabilizerTableau],
    g: ColoredGraph,
    C: float,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> VerificationVerdict:
    """Split ``2K`` registers into two random halves, measure setting j on half j,
    and accept iff the number of failing registers is at most ``C``.

    ``seed`` is only recorded in the verdict.
    """
    total = len(registers)
    if total < 2 or total % 2:
        raise OddBatch(f"need an even number >= 2 of registers, got {total}")
    if not 0 <= C <= total:
        raise ThresholdOutOfRange(f"C={C} outside [0, {total}]")
    K = total // 2
    group1 = tuple(sorted(int(i) for i in rng.permutation(total)[:K]))
    in1 = set(group1)
    group2 = tuple(i for i in range(total) if i not in in1)

    settings = {1: setting_for_color(g, 1), 2: setting_for_color(g, 2)}
    counts = {1: 0, 2: 0}
    records = []
    for idx in range(total):
        j = 1 if idx in in1 else 2
        m = compute_Mj(g, measure_setting(registers[idx], settings[j], rng))
        if m == 0:
            counts[j] += 1
        records.append((idx, j, m))
    return VerificationVerdict(
        K1=counts[1],
        K2=counts[2],
        C=C,
        accepted=counts[1] + counts[2] <= C,
        group1=group1,
        group2=group2,
        records=tuple(records),
        seed=seed,
    )

