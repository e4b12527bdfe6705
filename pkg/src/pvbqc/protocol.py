"""Three-party publicly verifiable protocol.

Parties: the server Bob prepares 5K copies of the requested graph state; the
honest storage center Charlie keeps a random 2K of them and forwards the
other 3K to the client Alice_1; Alice_1 verifies 2K of those and computes on
one of the rest. On a dispute Charlie hands his 2K copies to a randomly drawn
third client Alice_t, whose verdict settles the blame.

A run is a sequential state machine fully determined by its config (seed
included). Each party draws from its own named substream of the seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import bounds
from .bounds import FidelityCertificate, ProtocolPlan
from .errors import InvalidConfig, InvalidEdge, NoDispute, WrongBatchSize
from .graph import ColoredGraph, normalize_edges
from .noisedetect import TrapConfig, apply_channel, check_traps, insert_traps, transmit
from .rng import stream
from .stabsim import PauliString, StabilizerTableau, graph_state_tableau, prepare_graph_state
from .witness import VerificationVerdict, run_verification

KINDS = ("honest", "iid_pauli", "wrong_graph", "product_plus", "product_zero", "mixed_batch")
ERROR_TYPES = ("X", "Z", "depolarizing")
DISPUTE_POLICIES = ("auto_if_reject", "never", "always")


@dataclass(frozen=True)
class AdversaryStrategy:
    """How Bob prepares his copies.

    ``iid_pauli``: each copy independently, with probability ``q``, gets one
    Pauli error of ``error_type`` on vertex ``target`` (or on a uniformly
    random vertex when ``target`` is None). ``depolarizing`` draws X, Y or Z
    uniformly. ``mixed_batch`` makes exactly ``floor(fraction_bad * count)``
    copies of kind ``bad_kind`` (an ``iid_pauli`` bad kind uses ``q = 1``).
    """

    kind: str = "honest"
    q: float = 0.0
    error_type: str = "Z"
    target: Optional[int] = None
    edge_delta: tuple[tuple[int, int], ...] = ()
    fraction_bad: float = 0.0
    bad_kind: str = "product_zero"
    seed_offset: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown strategy {self.kind!r}; choose from {KINDS}")
        if not 0 <= self.q <= 1 or not 0 <= self.fraction_bad <= 1:
            raise InvalidConfig("probabilities must lie in [0, 1]")
        if self.error_type not in ERROR_TYPES:
            raise InvalidConfig(f"error_type must be one of {ERROR_TYPES}")
        if self.bad_kind in ("honest", "mixed_batch") or self.bad_kind not in KINDS:
            raise InvalidConfig(f"bad_kind {self.bad_kind!r} is not a bad copy kind")
        if self.seed_offset < 0:
            raise InvalidConfig("seed_offset must be non-negative")

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["edge_delta"] = [list(e) for e in self.edge_delta]
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "AdversaryStrategy":
        rec = dict(rec)
        rec["edge_delta"] = tuple(tuple(e) for e in rec.get("edge_delta", ()))
        return cls(**rec)


@dataclass(frozen=True)
class ProtocolConfig:
    graph: ColoredGraph
    plan: ProtocolPlan
    strategy: AdversaryStrategy = AdversaryStrategy()
    noise_p: float = 0.0
    pool_size: int = 5
    seed: int = 0
    dispute_policy: str = "auto_if_reject"
    traps: Optional[TrapConfig] = None
    refusal_prob: float = 0.0
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    variant: str = "appendix"
    c_override: Optional[float] = None

    def __post_init__(self):
        if self.graph.n < bounds.MIN_N or self.plan.n != self.graph.n:
            raise InvalidConfig(f"graph and plan must agree on n >= {bounds.MIN_N}")
        if self.pool_size < 2:
            raise InvalidConfig("client pool needs l >= 2")
        if not 0 <= self.noise_p <= 1:
            raise InvalidConfig("noise_p must lie in [0, 1]")
        if not 0 <= self.refusal_prob < 1:
            raise InvalidConfig("refusal_prob must lie in [0, 1)")
        if self.dispute_policy not in DISPUTE_POLICIES:
            raise InvalidConfig(f"dispute_policy must be one of {DISPUTE_POLICIES}")
        if self.seed < 0:
            raise InvalidConfig("seed must be non-negative")
        if self.c_override is not None and not 0 <= self.c_override <= 2 * self.plan.K:
            raise InvalidConfig(f"C override must lie in [0, 2K], got {self.c_override}")

    @property
    def C_client(self) -> float:
        return self.plan.C_client if self.c_override is None else self.c_override

    @classmethod
    def standard(cls, graph: ColoredGraph, **kw) -> "ProtocolConfig":
        return cls(graph=graph, plan=bounds.plan_parameters(graph.n), **kw)

    def to_record(self) -> dict:
        return {
            "graph": self.graph.to_record(),
            "K": self.plan.K,
            "strategy": self.strategy.to_record(),
            "noise_p": self.noise_p,
            "pool_size": self.pool_size,
            "seed": self.seed,
            "dispute_policy": self.dispute_policy,
            "traps": None if self.traps is None else self.traps.to_record(),
            "refusal_prob": self.refusal_prob,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "variant": self.variant,
            "c_override": self.c_override,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ProtocolConfig":
        g = ColoredGraph.from_record(rec["graph"])
        return cls(
            graph=g,
            plan=bounds.custom_plan(g.n, int(rec["K"])),
            strategy=AdversaryStrategy.from_record(rec.get("strategy", {})),
            noise_p=rec.get("noise_p", 0.0),
            pool_size=rec.get("pool_size", 5),
            seed=rec.get("seed", 0),
            dispute_policy=rec.get("dispute_policy", "auto_if_reject"),
            traps=None if rec.get("traps") is None else TrapConfig(**rec["traps"]),
            refusal_prob=rec.get("refusal_prob", 0.0),
            lambda1=rec.get("lambda1"),
            lambda2=rec.get("lambda2"),
            variant=rec.get("variant", "appendix"),
            c_override=rec.get("c_override"),
        )

    def with_seed(self, seed: int) -> "ProtocolConfig":
        return replace(self, seed=seed)


@dataclass
class Register:
    rid: int
    state: StabilizerTableau


@dataclass
class ClientResult:
    verdict: VerificationVerdict
    verified: list[int]
    computation_id: Optional[int]
    computation_outcomes: Optional[list[int]]
    discarded: list[int]


@dataclass
class ArbitrationResult:
    t: int
    refusals: int
    verdict: VerificationVerdict
    blame: str
    certificate: Optional[FidelityCertificate]


@dataclass
class ProtocolTranscript:
    config: ProtocolConfig
    steps: list[dict] = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    client: Optional[ClientResult] = None
    arbiter: Optional[ArbitrationResult] = None
    blame: str = "none"
    certificates: list[FidelityCertificate] = field(default_factory=list)
    traps: dict = field(default_factory=dict)

    @property
    def client_accepted(self) -> bool:
        return bool(self.client and self.client.verdict.accepted)

    @property
    def arbiter_accepted(self) -> Optional[bool]:
        return None if self.arbiter is None else self.arbiter.verdict.accepted

    def to_record(self) -> dict:
        rec = {
            "config": self.config.to_record(),
            "steps": self.steps,
            "counters": self.counters,
            "client": None,
            "arbiter": None,
            "blame": self.blame,
            "certificates": [c.to_record() for c in self.certificates],
            "traps": self.traps,
        }
        if self.client is not None:
            rec["client"] = {
                "verdict": self.client.verdict.to_record(),
                "verified": self.client.verified,
                "computation_id": self.client.computation_id,
                "computation_outcomes": self.client.computation_outcomes,
            }
        if self.arbiter is not None:
            rec["arbiter"] = {
                "t": self.arbiter.t,
                "refusals": self.arbiter.refusals,
                "verdict": self.arbiter.verdict.to_record(),
            }
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# parties


def _perturbed_edges(g: ColoredGraph, delta: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    if not delta:
        delta = [g.edges[0]] if g.edges else [(1, 2)]
    edges = set(g.edges)
    for i, j in delta:
        e = (min(i, j), max(i, j))
        edges ^= {e}
    try:
        return normalize_edges(g.n, sorted(edges))
    except InvalidEdge as exc:
        raise InvalidConfig(f"wrong_graph delta breaks the graph: {exc}") from exc


def _random_pauli_error(state: StabilizerTableau, strategy: AdversaryStrategy, rng: np.random.Generator) -> None:
    n = state.n
    q = strategy.target - 1 if strategy.target is not None else int(rng.integers(n))
    kind = strategy.error_type
    if kind == "depolarizing":
        kind = "XYZ"[int(rng.integers(3))]
    state.apply_pauli(PauliString.single(n, q, kind))


def _bad_copy(kind: str, g: ColoredGraph, strategy: AdversaryStrategy, rng: np.random.Generator) -> StabilizerTableau:
    if kind == "product_plus":
        return StabilizerTableau.plus_state(g.n)
    if kind == "product_zero":
        return StabilizerTableau.zero_state(g.n)
    if kind == "wrong_graph":
        return graph_state_tableau(g.n, _perturbed_edges(g, strategy.edge_delta))
    if kind == "iid_pauli":
        state = prepare_graph_state(g)
        _random_pauli_error(state, strategy, rng)
        return state
    raise InvalidConfig(f"{kind!r} is not a bad copy kind")


def bob_prepare(strategy: AdversaryStrategy, g: ColoredGraph, count: int, rng: np.random.Generator) -> list[StabilizerTableau]:
    if strategy.target is not None and not 1 <= strategy.target <= g.n:
        raise InvalidConfig(f"target vertex {strategy.target} not in 1..{g.n}")
    kind = strategy.kind
    if kind == "honest":
        template = prepare_graph_state(g)
        return [template.copy() for _ in range(count)]
    if kind == "iid_pauli":
        template = prepare_graph_state(g)
        copies = []
        for _ in range(count):
            c = template.copy()
            if rng.random() < strategy.q:
                _random_pauli_error(c, strategy, rng)
            copies.append(c)
        return copies
    if kind in ("product_plus", "product_zero", "wrong_graph"):
        template = _bad_copy(kind, g, strategy, rng)
        return [template.copy() for _ in range(count)]
    # mixed_batch
    template = prepare_graph_state(g)
    bad = int(np.floor(strategy.fraction_bad * count))
    positions = set(int(p) for p in rng.choice(count, bad, replace=False))
    return [_bad_copy(strategy.bad_kind, g, strategy, rng) if i in positions else template.copy() for i in range(count)]


def charlie_split_and_sample(batch: Sequence[Register], rng: np.random.Generator) -> tuple[list[Register], list[Register]]:
    """Keep a uniform 2K-subset of the 5K registers; forward the other 3K in order."""
    if not batch or len(batch) % 5:
        raise WrongBatchSize(f"expected 5K registers, got {len(batch)}")
    K = len(batch) // 5
    keep = set(int(i) for i in rng.permutation(len(batch))[: 2 * K])
    kept = [r for i, r in enumerate(batch) if i in keep]
    forwarded = [r for i, r in enumerate(batch) if i not in keep]
    return kept, forwarded


def alice_verify_and_compute(
    forwarded: Sequence[Register],
    g: ColoredGraph,
    plan: ProtocolPlan,
    rng: np.random.Generator,
    C: Optional[float] = None,
) -> ClientResult:
    """Verify a random 2K of the 3K received registers at C = K/(2n) unless ``C`` is given.

    On acceptance one of the K leftovers is used for the (stub) computation:
    every qubit is measured in X. The others are discarded.
    """
    K = plan.K
    if len(forwarded) != 3 * K:
        raise WrongBatchSize(f"client expected 3K = {3 * K} registers, got {len(forwarded)}")
    chosen = set(int(i) for i in rng.permutation(3 * K)[: 2 * K])
    verify = [r for i, r in enumerate(forwarded) if i in chosen]
    rest = [r for i, r in enumerate(forwarded) if i not in chosen]
    verdict = run_verification([r.state for r in verify], g, plan.C_client if C is None else C, rng)
    verified = [r.rid for r in verify]
    if not verdict.accepted:
        return ClientResult(verdict, verified, None, None, [r.rid for r in rest])
    pick = int(rng.integers(K))
    comp = rest[pick]
    outcomes = [comp.state.measure(q, "X", rng) for q in range(g.n)]
    return ClientResult(verdict, verified, comp.rid, outcomes, [r.rid for i, r in enumerate(rest) if i != pick])


def arbitrate(
    kept: Sequence[Register],
    g: ColoredGraph,
    plan: ProtocolPlan,
    rng: np.random.Generator,
    *,
    disputed: bool = True,
    pool_size: int = 5,
    refusal_prob: float = 0.0,
    lam: Optional[float] = None,
    variant: str = "appendix",
    deliver: Optional[Callable[[Sequence[Register]], None]] = None,
    max_draws: int = 1000,
) -> ArbitrationResult:
    """Draw a third client and have it verify Charlie's 2K copies at C = 3K/(4n).

    Acceptance blames Alice_1, rejection blames Bob. ``deliver`` is applied
    to the registers after the arbiter agrees and before it measures (the
    Charlie -> Alice_t transmission).
    """
    if not disputed:
        raise NoDispute("arbitration requested without a dispute")
    if len(kept) != 2 * plan.K:
        raise WrongBatchSize(f"arbiter expected 2K = {2 * plan.K} registers, got {len(kept)}")
    refusals = 0
    while True:
        t = int(rng.integers(2, pool_size + 1))
        if refusal_prob == 0 or rng.random() >= refusal_prob:
            break
        refusals += 1
        if refusals >= max_draws:
            raise InvalidConfig("no third-party client accepted the arbitration request")
    if deliver is not None:
        deliver(kept)
    verdict = run_verification([r.state for r in kept], g, plan.C_arbiter, rng)
    cert = None
    if verdict.accepted:
        lam = bounds.default_lambda(plan.n, "arbiter") if lam is None else lam
        cert = bounds.arbiter_certificate(plan.n, plan.K, verdict.failures, lam, variant)
    return ArbitrationResult(t, refusals, verdict, "alice1" if verdict.accepted else "bob", cert)


# ---------------------------------------------------------------------------
# one full run


class _Link:
    """One hop of the quantum channel, with optional trap checking."""

    def __init__(self, name: str, config: ProtocolConfig, rng: np.random.Generator):
        self.name = name
        self.p = config.noise_p
        self.traps = config.traps
        self.rng = rng
        self.qubits = 0
        self.stats = {"transmissions": 0, "flipped": 0, "rejected": 0}

    def send(self, registers: Sequence[Register]) -> None:
        for reg in registers:
            if self.traps is None:
                self.qubits += reg.state.n
                transmit(reg.state, self.p, self.rng)
                continue
            aug, positions = insert_traps(reg.state, self.traps, self.rng)
            self.qubits += aug.size
            apply_channel(aug, self.p, self.rng, self.traps.channel)
            r, ok, _ = check_traps(aug, self.traps, positions)
            self.stats["transmissions"] += 1
            self.stats["flipped"] += r
            self.stats["rejected"] += 0 if ok else 1


def run_protocol(config: ProtocolConfig) -> ProtocolTranscript:
    g, plan, seed = config.graph, config.plan, config.seed
    n, K = g.n, plan.K
    tr = ProtocolTranscript(config)
    log = tr.steps.append

    log({"step": 1, "event": "request", "from": "alice1", "via": "charlie", "n": n})

    bob_rng = stream(seed, "bob", config.strategy.seed_offset)
    batch = [Register(i, s) for i, s in enumerate(bob_prepare(config.strategy, g, plan.copies, bob_rng))]
    log({"step": 2, "event": "prepare", "copies": len(batch), "strategy": config.strategy.kind})

    hop1 = _Link("bob->charlie", config, stream(seed, "hop1"))
    hop1.send(batch)
    log({"step": 2, "event": "transfer", "link": hop1.name, "registers": len(batch), "qubits": hop1.qubits})

    kept, forwarded = charlie_split_and_sample(batch, stream(seed, "charlie"))
    hop2 = _Link("charlie->alice1", config, stream(seed, "hop2"))
    hop2.send(forwarded)
    log({"step": 3, "event": "split", "kept": [r.rid for r in kept], "forwarded": len(forwarded), "qubits": hop2.qubits})

    client = alice_verify_and_compute(forwarded, g, plan, stream(seed, "alice1"), config.c_override)
    tr.client = client
    v = client.verdict
    log({"step": 4, "event": "verify", "party": "alice1", "K1": v.K1, "K2": v.K2, "C": v.C, "accepted": v.accepted})
    log({"step": 5, "event": "client_verdict", "bob_honest": v.accepted})
    if v.accepted:
        # an overridden threshold can accept counts the certificate does not cover
        if v.failures <= plan.C_client:
            lam1 = bounds.default_lambda(n, "client") if config.lambda1 is None else config.lambda1
            tr.certificates.append(bounds.client_certificate(n, K, v.failures, lam1))
        log({"step": 6, "event": "compute", "register": client.computation_id, "discarded": len(client.discarded)})
    else:
        tr.blame = "bob"

    disputed = config.dispute_policy == "always" or (config.dispute_policy == "auto_if_reject" and not v.accepted)
    hop3 = _Link("charlie->alice_t", config, stream(seed, "hop3"))
    if disputed:
        log({"step": 7, "event": "dispute", "raised_by": "bob"})
        arb = arbitrate(
            kept,
            g,
            plan,
            stream(seed, "arbiter"),
            pool_size=config.pool_size,
            refusal_prob=config.refusal_prob,
            lam=config.lambda2,
            variant=config.variant,
            deliver=hop3.send,
        )
        tr.arbiter = arb
        tr.blame = arb.blame
        if arb.certificate is not None:
            tr.certificates.append(arb.certificate)
        av = arb.verdict
        log({"step": 8, "event": "arbitrate", "t": arb.t, "K1": av.K1, "K2": av.K2, "C": av.C, "accepted": av.accepted, "blame": arb.blame})

    comp_measurements = n if client.computation_id is not None else 0
    tr.counters = {
        "copies_prepared": len(batch),
        "kept": len(kept),
        "forwarded": len(forwarded),
        "verified": len(client.verified),
        "computed": 1 if client.computation_id is not None else 0,
        "discarded": len(client.discarded),
        "qubits_transmitted": hop1.qubits + hop2.qubits + hop3.qubits,
        "client_verification_measurements": len(client.verified) * n,
        "client_computation_measurements": comp_measurements,
        "local_measurements_client": len(client.verified) * n + comp_measurements,
        "local_measurements_arbiter": 2 * K * n if tr.arbiter is not None else 0,
    }
    if config.traps is not None:
        tr.traps = {"bob->charlie": hop1.stats, "charlie->alice1": hop2.stats}
        if tr.arbiter is not None:
            tr.traps["charlie->alice_t"] = hop3.stats
    return tr


def replay(record: dict) -> ProtocolTranscript:
    """Re-run the config stored in a transcript record and check it matches."""
    tr = run_protocol(ProtocolConfig.from_record(record["config"]))
    if json.dumps(tr.to_record(), sort_keys=True) != json.dumps(record, sort_keys=True):
        raise AssertionError("replayed transcript differs from the recorded one")
    return tr
