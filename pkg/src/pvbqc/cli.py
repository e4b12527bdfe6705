"""Command-line experiment harness.

Subcommands: ``verify`` (two-setting witness checks on 2K-copy batches), ``protocol`` (full three-party
runs), ``sweep`` (acceptance curves over one parameter), ``bounds`` (bound and
certificate calculators) and ``replay`` (re-run stored transcripts).

JSON-lines is the canonical output; ``--format csv`` writes the documented
column projection of the same rows, with the summary on stderr.

Exit codes: 0 ok, 2 configuration error, 3 infeasible parameters,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import nullcontext
from typing import ContextManager, Iterable, Optional, Sequence, TextIO

from . import bounds
from .errors import Infeasible, LambdaOutOfRange, PvbqcError, ThresholdExceeded, TooSmallN
from .experiments import (
    PROTOCOL_COLUMNS,
    SWEEP_AXES,
    SWEEP_COLUMNS,
    VERIFY_COLUMNS,
    default_graph,
    pmap,
    protocol_jobs,
    protocol_trial,
    summarize_protocol,
    summarize_verify,
    sweep,
    sweep_config,
    verify_jobs,
    verify_trial,
)
from .graph import ColoredGraph, parse_graph_spec
from .noisedetect import TrapConfig, trap_threshold
from .protocol import KINDS, AdversaryStrategy, ProtocolConfig, replay

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(PvbqcError):
    pass


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def emit(rows: Iterable[dict], fmt: str, columns: Sequence[str], out: TextIO, summary: Optional[dict] = None) -> None:
    if fmt == "json-lines":
        for r in rows:
            out.write(json.dumps(r) + "\n")
        if summary is not None:
            out.write(json.dumps(summary) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    if summary is not None:
        sys.stderr.write(json.dumps(summary) + "\n")


# ---------------------------------------------------------------------------
# argument handling


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="fixture (path:N, cycle:N, grid:RxC) or JSON graph file")
    p.add_argument("--n", type=int, help="qubit count; picks an even cycle (even n) or path (odd n) when --graph is absent")
    p.add_argument("--K", type=int, help="override K = ceil(n^2 ln n) (smaller, faster experiments)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    _add_graph_args(p)
    p.add_argument("--strategy", default="honest", choices=KINDS)
    p.add_argument("--q", type=float, default=0.0, help="per-copy error probability for iid_pauli")
    p.add_argument("--error-type", default="Z", choices=("X", "Z", "depolarizing"))
    p.add_argument("--target", type=int, help="vertex hit by iid_pauli errors (default: random vertex)")
    p.add_argument("--fraction-bad", type=float, default=0.0)
    p.add_argument("--bad-kind", default="product_zero")
    p.add_argument("--edge-delta", help="wrong_graph edge toggles, e.g. '1-2,3-4'")
    p.add_argument("--noise-p", type=float, default=0.0, help="per-qubit bit-flip probability on every hop")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, help="master seed (required)")
    p.add_argument("--format", default="json-lines", choices=("json-lines", "csv"))
    p.add_argument("--lambda", dest="lam", type=float, help="lambda for the certificate (default: top of valid range)")
    p.add_argument("--variant", default="appendix", choices=("appendix", "theorem"))
    p.add_argument("--c-override", type=float, help="client acceptance threshold instead of K/(2n)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write rows here instead of stdout")


def _add_protocol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--traps-k", type=int, help="trap qubits per register per hop (enables noise detection)")
    p.add_argument("--p-th", type=float, default=0.1, help="trap noise threshold")
    p.add_argument("--trap-state", default="zero", choices=("zero", "plus"))
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--dispute-policy", default="auto_if_reject", choices=("auto_if_reject", "never", "always"))
    p.add_argument("--pool-size", type=int, default=5, help="number of clients l")
    p.add_argument("--refusal-prob", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvbqc", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="JSON file whose keys mirror the long flags")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the two-setting witness check on 2K-copy batches")
    _add_run_args(v)
    v.add_argument("--role", default="client", choices=("client", "arbiter"))
    v.add_argument("--figure", help="write a K1+K2 histogram PNG here")

    pr = sub.add_parser("protocol", help="full Bob/Charlie/Alice runs, one transcript per trial")
    _add_run_args(pr)
    _add_protocol_args(pr)

    sw = sub.add_parser("sweep", help="acceptance rate over one parameter axis")
    _add_run_args(sw)
    _add_protocol_args(sw)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--values", required=True, help="comma-separated axis values, or start:stop:step")
    sw.add_argument("--figure", help="write the acceptance curve PNG here")

    b = sub.add_parser("bounds", help="bound values, plans, certificates and cost reports")
    b.add_argument("what", choices=("plan", "serfling", "azuma", "certificate", "cost", "trap", "lambda"))
    b.add_argument("--n", type=int)
    b.add_argument("--K", type=int)
    b.add_argument("--N", type=int)
    b.add_argument("--v", type=float)
    b.add_argument("--m", type=int)
    b.add_argument("--a", type=float, default=0.0)
    b.add_argument("--b", type=float, default=1.0)
    b.add_argument("--t", type=float)
    b.add_argument("--role", default="arbiter", choices=("client", "arbiter"))
    b.add_argument("--failures", type=int, default=0)
    b.add_argument("--lambda", dest="lam", type=float)
    b.add_argument("--variant", default="appendix", choices=("appendix", "theorem", "both"))
    b.add_argument("--traps-k", type=int)
    b.add_argument("--p-th", type=float)
    b.add_argument("--confidence", type=float, default=0.99)
    b.add_argument("--sato-k", type=int)
    b.add_argument("--sato-m", type=int)
    b.add_argument("--format", default="json-lines", choices=("json-lines", "csv"))

    r = sub.add_parser("replay", help="re-run transcripts from a JSON-lines file and check they match")
    r.add_argument("file")

    return parser


def _load_config(argv: Sequence[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    cfg = _load_config(argv)
    if cfg:
        for action in parser._subparsers._group_actions:  # noqa: SLF001
            for sp in action.choices.values():
                dests = {a.dest for a in sp._actions}  # noqa: SLF001
                sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
    return parser.parse_args(argv)


def _graph(args) -> ColoredGraph:
    if args.graph:
        g = parse_graph_spec(args.graph)
        if args.n is not None and args.n != g.n:
            raise ConfigError(f"--n {args.n} disagrees with graph of {g.n} vertices")
        return g
    if args.n is None:
        raise ConfigError("give --graph or --n")
    return default_graph(args.n)


def _plan(args, n: int):
    return bounds.plan_parameters(n) if args.K is None else bounds.custom_plan(n, args.K)


def _strategy(args) -> AdversaryStrategy:
    delta = ()
    if args.edge_delta:
        delta = tuple(tuple(int(v) for v in e.split("-")) for e in args.edge_delta.split(","))
    return AdversaryStrategy(
        kind=args.strategy,
        q=args.q,
        error_type=args.error_type,
        target=args.target,
        edge_delta=delta,
        fraction_bad=args.fraction_bad,
        bad_kind=args.bad_kind,
    )


def _require_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("--seed is required")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    return args.seed


def _protocol_config(args) -> ProtocolConfig:
    g = _graph(args)
    traps = None
    if args.traps_k is not None:
        traps = TrapConfig(args.traps_k, args.trap_state, args.p_th, args.confidence)
    return ProtocolConfig(
        graph=g,
        plan=_plan(args, g.n),
        strategy=_strategy(args),
        noise_p=args.noise_p,
        pool_size=args.pool_size,
        seed=0,
        dispute_policy=args.dispute_policy,
        traps=traps,
        refusal_prob=args.refusal_prob,
        lambda1=args.lam,
        lambda2=args.lam,
        variant=args.variant,
        c_override=args.c_override,
    )


def _open_out(args) -> ContextManager[TextIO]:
    return open(args.out, "w") if getattr(args, "out", None) else nullcontext(sys.stdout)


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    seed = _require_seed(args)
    g = _graph(args)
    plan = _plan(args, g.n)
    jobs = verify_jobs(
        g, plan, _strategy(args), args.trials, seed,
        noise_p=args.noise_p, role=args.role, C=args.c_override, lam=args.lam, variant=args.variant,
    )
    rows = pmap(verify_trial, jobs, args.workers)
    with _open_out(args) as out:
        emit(rows, args.format, VERIFY_COLUMNS, out, summarize_verify(rows))
    if args.figure:
        from .report import plot_failure_histogram

        plot_failure_histogram(rows, jobs[0].C, args.figure)
    return EXIT_OK


def cmd_protocol(args) -> int:
    seed = _require_seed(args)
    base = _protocol_config(args)
    rows = pmap(protocol_trial, protocol_jobs(base, args.trials, seed), args.workers)
    with _open_out(args) as out:
        emit(rows, args.format, PROTOCOL_COLUMNS, out, summarize_protocol(rows))
    return EXIT_OK


def _parse_values(spec: str) -> list[float]:
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        if step <= 0:
            raise ConfigError("sweep step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    vals = [float(x) for x in spec.split(",") if x.strip()]
    if not vals:
        raise ConfigError("sweep needs at least one value")
    return vals


def cmd_sweep(args) -> int:
    seed = _require_seed(args)
    values = _parse_values(args.values)
    if args.axis == "n":
        if args.graph:
            raise ConfigError("--graph cannot be combined with an n sweep")
        args.n = int(values[0])
    base = _protocol_config(args)
    rows = sweep(base, args.axis, values, args.trials, seed, args.workers, K=args.K)
    with _open_out(args) as out:
        emit(rows, args.format, SWEEP_COLUMNS, out)
    if args.figure:
        from .report import plot_sweep

        kind = sweep_config(base, args.axis, values[0], args.K).strategy.kind
        plot_sweep(rows, args.figure, title=f"{kind}, {args.trials} trials/point, seed {seed}")
    return EXIT_OK


def _bounds_rows(args) -> tuple[list[dict], Sequence[str]]:
    def need(*names):
        missing = [f"--{x.replace('_', '-')}" for x in names if getattr(args, x) is None]
        if missing:
            raise ConfigError(f"bounds {args.what} needs {', '.join(missing)}")

    w = args.what
    if w == "plan":
        need("n")
        rec = bounds.plan_parameters(args.n).to_record()
        return [rec], list(rec)
    if w == "serfling":
        need("N", "K", "v")
        p = bounds.SerflingParams(args.N, args.K, args.v)
        rec = {"N": p.N, "K": p.K, "v": p.v, "bound": bounds.serfling_bound(p)}
        return [rec], list(rec)
    if w == "azuma":
        need("m", "t")
        p = bounds.AzumaParams.uniform(args.m, args.a, args.b, args.t)
        rec = {"m": args.m, "a": args.a, "b": args.b, "t": args.t, "bound": bounds.azuma_hoeffding_bound(p)}
        return [rec], list(rec)
    if w == "lambda":
        need("n")
        lo, hi = bounds.lambda_range(args.n, args.role)
        rec = {"n": args.n, "role": args.role, "lo": lo, "hi": hi}
        return [rec], list(rec)
    if w == "certificate":
        need("n")
        K = args.K if args.K is not None else bounds.plan_parameters(args.n).K
        lam = args.lam if args.lam is not None else bounds.default_lambda(args.n, args.role)
        if args.role == "client":
            certs = [bounds.client_certificate(args.n, K, args.failures, lam)]
        else:
            variants = ("appendix", "theorem") if args.variant == "both" else (args.variant,)
            certs = [bounds.arbiter_certificate(args.n, K, args.failures, lam, v) for v in variants]
        rows = [c.to_record() for c in certs]
        return rows, list(rows[0])
    if w == "cost":
        need("n")
        rec = bounds.cost_comparison(args.n, args.sato_k, args.sato_m).to_record()
        return [rec], list(rec)
    if w == "trap":
        need("traps_k", "p_th")
        cfg = TrapConfig(args.traps_k, "zero", args.p_th, args.confidence)
        rec = {**cfg.to_record(), "r_th": trap_threshold(cfg)}
        return [rec], list(rec)
    raise ConfigError(f"unknown bounds query {w!r}")


def cmd_bounds(args) -> int:
    rows, cols = _bounds_rows(args)
    emit(rows, args.format, cols, sys.stdout)
    return EXIT_OK


def cmd_replay(args) -> int:
    count = 0
    with open(args.file) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            record = row.get("transcript", row if "config" in row else None)
            if record is None:
                continue
            replay(record)
            count += 1
    sys.stdout.write(json.dumps({"replayed": count, "identical": True}) + "\n")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "protocol": cmd_protocol,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "replay": cmd_replay,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (TooSmallN, Infeasible, LambdaOutOfRange, ThresholdExceeded) as exc:
        sys.stderr.write(f"pvbqc: infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except (PvbqcError, OSError, ValueError) as exc:
        sys.stderr.write(f"pvbqc: error: {exc}\n")
        return EXIT_CONFIG
    except AssertionError as exc:
        sys.stderr.write(f"pvbqc: invariant violated: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
