"""Monte Carlo harness shared by the CLI and the acceptance suite.

Trial ``i`` of an experiment with master seed ``s`` runs under its own seed
``derive_seed(s, i)``; every output row carries both, so any single row can
be reproduced without re-running the others. Rows come back in trial order
whatever the worker count.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence, TypeVar

from . import bounds
from .bounds import ProtocolPlan
from .graph import ColoredGraph, standard_graph
from .noisedetect import transmit
from .protocol import AdversaryStrategy, ProtocolConfig, bob_prepare, run_protocol
from .rng import derive_seed, stream
from .witness import run_verification

T = TypeVar("T")
R = TypeVar("R")

VERIFY_COLUMNS = ("trial", "master_seed", "seed", "n", "K", "C", "K1", "K2", "accepted", "F_low", "P_low")
PROTOCOL_COLUMNS = (
    "trial",
    "master_seed",
    "seed",
    "client_accepted",
    "K1",
    "K2",
    "C_client",
    "arbiter_accepted",
    "arbiter_K1",
    "arbiter_K2",
    "blame",
    "copies_prepared",
    "qubits_transmitted",
    "client_verification_measurements",
    "local_measurements_client",
    "local_measurements_arbiter",
    "F_low",
    "P_low",
    "arbiter_F_low",
    "arbiter_P_low",
)
SWEEP_COLUMNS = ("axis", "value", "trials", "master_seed", "acceptance_rate", "mean_failures", "F_low", "P_low", "wall_time_s")


def default_graph(n: int) -> ColoredGraph:
    """Even cycle for even n, path otherwise."""
    return standard_graph("even_cycle", n) if n % 2 == 0 and n >= 4 else standard_graph("path", n)


def trial_seeds(master_seed: int, trials: int) -> list[int]:
    return [derive_seed(master_seed, i) for i in range(trials)]


def pmap(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Ordered map, optionally over a process pool."""
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------------------
# verification-only trials


@dataclass(frozen=True)
class VerifyJob:
    graph: ColoredGraph
    plan: ProtocolPlan
    strategy: AdversaryStrategy
    noise_p: float
    C: float
    role: str
    lam: Optional[float]
    variant: str
    trial: int
    master_seed: int
    seed: int


def verify_trial(job: VerifyJob) -> dict:
    """Bob prepares 2K copies, they cross one noisy hop, the batch is verified at ``job.C``."""
    g, plan = job.graph, job.plan
    batch = bob_prepare(job.strategy, g, 2 * plan.K, stream(job.seed, "bob", job.strategy.seed_offset))
    link = stream(job.seed, "hop")
    for reg in batch:
        transmit(reg, job.noise_p, link)
    verdict = run_verification(batch, g, job.C, stream(job.seed, "verify"), seed=job.seed)
    row = {
        "trial": job.trial,
        "master_seed": job.master_seed,
        "seed": job.seed,
        "n": g.n,
        "K": plan.K,
        "C": job.C,
        "K1": verdict.K1,
        "K2": verdict.K2,
        "accepted": verdict.accepted,
        "F_low": None,
        "P_low": None,
    }
    cert = certificate_for(job.role, g.n, plan, verdict.failures, job.lam, job.variant) if verdict.accepted else None
    if cert is not None:
        row["F_low"] = cert.fidelity_bound
        row["P_low"] = cert.confidence_bound
    return row


def certificate_for(role: str, n: int, plan: ProtocolPlan, failures: int, lam: Optional[float], variant: str):
    """The role's certificate, or None when the count is above the role's threshold."""
    lam = bounds.default_lambda(n, role) if lam is None else lam
    if role == "client":
        if failures > plan.C_client:
            return None
        return bounds.client_certificate(n, plan.K, failures, lam)
    if failures > plan.C_arbiter:
        return None
    return bounds.arbiter_certificate(n, plan.K, failures, lam, variant)


def verify_jobs(
    graph: ColoredGraph,
    plan: ProtocolPlan,
    strategy: AdversaryStrategy,
    trials: int,
    master_seed: int,
    *,
    noise_p: float = 0.0,
    role: str = "client",
    C: Optional[float] = None,
    lam: Optional[float] = None,
    variant: str = "appendix",
) -> list[VerifyJob]:
    if C is None:
        C = plan.C_client if role == "client" else plan.C_arbiter
    return [
        VerifyJob(graph, plan, strategy, noise_p, C, role, lam, variant, i, master_seed, s)
        for i, s in enumerate(trial_seeds(master_seed, trials))
    ]


def summarize_verify(rows: Sequence[dict]) -> dict:
    acc = sum(r["accepted"] for r in rows)
    return {
        "summary": True,
        "trials": len(rows),
        "acceptance_rate": acc / len(rows),
        "rejection_rate": 1 - acc / len(rows),
        "mean_failures": sum(r["K1"] + r["K2"] for r in rows) / len(rows),
        "master_seed": rows[0]["master_seed"],
    }


# ---------------------------------------------------------------------------
# full protocol trials


@dataclass(frozen=True)
class ProtocolJob:
    config: ProtocolConfig
    trial: int
    master_seed: int
    keep_transcript: bool = True


def protocol_trial(job: ProtocolJob) -> dict:
    tr = run_protocol(job.config)
    c = tr.counters
    v = tr.client.verdict
    client_cert = next((x for x in tr.certificates if x.role == "client"), None)
    arb_cert = None if tr.arbiter is None else tr.arbiter.certificate
    row = {
        "trial": job.trial,
        "master_seed": job.master_seed,
        "seed": job.config.seed,
        "client_accepted": v.accepted,
        "K1": v.K1,
        "K2": v.K2,
        "C_client": v.C,
        "arbiter_accepted": tr.arbiter_accepted,
        "arbiter_K1": None if tr.arbiter is None else tr.arbiter.verdict.K1,
        "arbiter_K2": None if tr.arbiter is None else tr.arbiter.verdict.K2,
        "blame": tr.blame,
        "copies_prepared": c["copies_prepared"],
        "qubits_transmitted": c["qubits_transmitted"],
        "client_verification_measurements": c["client_verification_measurements"],
        "local_measurements_client": c["local_measurements_client"],
        "local_measurements_arbiter": c["local_measurements_arbiter"],
        "F_low": None if client_cert is None else client_cert.fidelity_bound,
        "P_low": None if client_cert is None else client_cert.confidence_bound,
        "arbiter_F_low": None if arb_cert is None else arb_cert.fidelity_bound,
        "arbiter_P_low": None if arb_cert is None else arb_cert.confidence_bound,
    }
    if job.keep_transcript:
        row["transcript"] = tr.to_record()
    return row


def protocol_jobs(base: ProtocolConfig, trials: int, master_seed: int, keep_transcript: bool = True) -> list[ProtocolJob]:
    return [
        ProtocolJob(base.with_seed(s), i, master_seed, keep_transcript)
        for i, s in enumerate(trial_seeds(master_seed, trials))
    ]


def summarize_protocol(rows: Sequence[dict]) -> dict:
    m = len(rows)
    blame = Counter(r["blame"] for r in rows)
    arb = [r["arbiter_accepted"] for r in rows if r["arbiter_accepted"] is not None]
    keys = ("copies_prepared", "qubits_transmitted", "local_measurements_client", "local_measurements_arbiter")
    return {
        "summary": True,
        "trials": m,
        "master_seed": rows[0]["master_seed"],
        "acceptance_rate": sum(r["client_accepted"] for r in rows) / m,
        "arbitrations": len(arb),
        "arbiter_acceptance_rate": (sum(arb) / len(arb)) if arb else None,
        "blame": {k: blame.get(k, 0) for k in ("none", "bob", "alice1")},
        "mean_counters": {k: sum(r[k] for r in rows) / m for k in keys},
    }


# ---------------------------------------------------------------------------
# sweeps

SWEEP_AXES = ("q", "p", "n", "C")


def sweep_config(base: ProtocolConfig, axis: str, value: float, K: Optional[int] = None) -> ProtocolConfig:
    if axis == "q":
        strat = base.strategy
        if strat.kind != "iid_pauli":
            strat = replace(strat, kind="iid_pauli")
        return replace(base, strategy=replace(strat, q=float(value)))
    if axis == "p":
        return replace(base, noise_p=float(value))
    if axis == "C":
        return replace(base, c_override=float(value))
    if axis == "n":
        n = int(value)
        g = default_graph(n)
        plan = bounds.plan_parameters(n) if K is None else bounds.custom_plan(n, K)
        return replace(base, graph=g, plan=plan, c_override=None)
    raise ValueError(f"unknown sweep axis {axis!r}")


def sweep(
    base: ProtocolConfig,
    axis: str,
    values: Iterable[float],
    trials: int,
    master_seed: int,
    workers: int = 1,
    K: Optional[int] = None,
) -> list[dict]:
    """One row per axis value. Trial seeds are shared across values, so
    neighbouring points see the same randomness."""
    rows = []
    for value in values:
        cfg = sweep_config(base, axis, value, K)
        start = time.perf_counter()
        results = pmap(protocol_trial, protocol_jobs(cfg, trials, master_seed, keep_transcript=False), workers)
        elapsed = time.perf_counter() - start
        accepted = [r for r in results if r["client_accepted"] and r["F_low"] is not None]
        rows.append(
            {
                "axis": axis,
                "value": value,
                "trials": trials,
                "master_seed": master_seed,
                "acceptance_rate": sum(r["client_accepted"] for r in results) / trials,
                "mean_failures": sum(r["K1"] + r["K2"] for r in results) / trials,
                "F_low": accepted[0]["F_low"] if accepted else None,
                "P_low": accepted[0]["P_low"] if accepted else None,
                "wall_time_s": round(elapsed, 6),
            }
        )
    return rows
