"""Command-line entry point.

Thin adapter over the library: every subcommand parses arguments, calls the
corresponding library function and serializes the result.  Exit codes:
0 success, 2 configuration error, 3 solver or precondition failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import ingest
from .harness import (ConfigError, HedgeSpec, format_float, load_config,
                      result_csv, result_json, run_experiment, run_screening,
                      synthetic_screening_input, to_json)
from .pricing import (Contract, LatticeModel, StrikeSolveError,
                      black_scholes_call, black_scholes_put, lattice_price,
                      mc_price, solve_hedge_strike)
from .rng import DEFAULT_SEED
from .strategies import fixed
from .wealth import HypothesisSpec, InadmissibleBetError, OutcomeError, run_process

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _parse_kv(text: str, what: str) -> dict:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"bad {what} field {part!r}; expected key=value")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_model(text: str) -> tuple[float, float, float]:
    kv = _parse_kv(text, "model")
    try:
        return (float(kv.pop("u")), float(kv.pop("d")), float(kv.pop("r", "0")))
    except KeyError as exc:
        raise ConfigError(f"model needs u= and d=: missing {exc}") from exc


def _parse_contract(text: str) -> tuple[str, float, int]:
    fields = text.split(",")
    kind = fields[0].strip()
    if kind not in ("call", "put"):
        raise ConfigError(f"contract kind must be call or put, got {kind!r}")
    kv = _parse_kv(",".join(fields[1:]), "contract")
    try:
        return kind, float(kv.pop("S")), int(kv.pop("tau"))
    except KeyError as exc:
        raise ConfigError(f"contract needs S= and tau=: missing {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_price(args) -> int:
    u, d, r = _parse_model(args.model)
    kind, strike, tau = _parse_contract(args.contract)
    contract = Contract.call(strike, tau) if kind == "call" else Contract.put(strike, tau)
    if args.method == "lattice":
        model = LatticeModel(u, d, tau, r)
        est = lattice_price(model, contract, spot=args.spot)
    elif args.method == "mc":
        hyp = (HypothesisSpec.bernoulli(args.null_p) if args.family == "bernoulli"
               else HypothesisSpec.log_normal() if args.family == "log_normal"
               else HypothesisSpec.bounded())
        strategy = fixed(args.bet)
        process = lambda ys: run_process(strategy, ys, hyp).final
        est = mc_price(hyp.null_sampler(), process, contract, args.n, args.seed)
    else:
        if args.sigma is None or args.time is None:
            raise ConfigError("black-scholes pricing needs --sigma and --time")
        fn = black_scholes_call if kind == "call" else black_scholes_put
        value = fn(args.spot, strike, args.sigma, args.time)
        _write(args.out, to_json({"value": value, "std_error": 0.0,
                                  "method": "black_scholes"}) + "\n")
        return EXIT_OK
    _write(args.out, to_json({"value": est.value, "std_error": est.std_error,
                              "method": est.method.value}) + "\n")
    return EXIT_OK


def _cmd_hedge_solve(args) -> int:
    model = LatticeModel(args.u, args.d, args.horizon)
    roots = solve_hedge_strike(model, args.floor, args.horizon)
    _write(args.out, to_json({"floor": args.floor, "horizon": args.horizon,
                              "roots": roots}) + "\n")
    return EXIT_OK


def _run_simulation(args, want_shift: bool) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if want_shift and config.truth.change_at is None:
        raise ConfigError("shift runs need truth_p_post and change_at in the config")
    result = run_experiment(config, workers=args.workers)
    if args.out is None:
        sys.stdout.write(result_json(result))
    else:
        _write(args.out + ".csv", result_csv(result))
        _write(args.out + ".json", result_json(result))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    return _run_simulation(args, want_shift=False)


def _cmd_shift(args) -> int:
    return _run_simulation(args, want_shift=True)


def _screen_header(args, n_genes, horizon) -> list[str]:
    keys = [("mode", "synthetic" if args.matrix is None else "matrix"),
            ("genes", n_genes), ("horizon", horizon), ("alpha", args.alpha),
            ("ruin_level", args.ruin), ("hedge", "put" if args.hedge else "none"),
            ("hedge_expiry", args.expiry if args.hedge else ""),
            ("seed", args.seed)]
    return [f"# {k} = {v}" for k, v in keys]


def _cmd_screen(args) -> int:
    if (args.matrix is None) == (args.synthetic is None):
        raise ConfigError("pass exactly one of --matrix or --synthetic")
    if args.matrix is not None:
        matrix = ingest.load_expression_matrix(args.matrix, args.normal_label,
                                               args.tumor_label)
        uniform = ingest.transform_to_uniform(matrix, normal_label=args.normal_label,
                                              log_transform=not args.no_log)
        prepared = ingest.prepare_screening(uniform, tumor_label=args.tumor_label)
        gene_ids = prepared.gene_ids
        sequences, lambdas = prepared.sequences, prepared.lambdas
    else:
        shifted = args.synthetic == "shifted"
        sequences, lambdas, _ = synthetic_screening_input(
            args.genes, args.samples, args.seed,
            shifted_fraction=args.shift_fraction if shifted else 0.0,
            shifted_mean=args.shift_mean)
        gene_ids = tuple(f"g{i}" for i in range(args.genes))
    hedge = HedgeSpec(expiry=args.expiry or 0) if args.hedge else None
    result = run_screening(sequences, lambdas, alpha=args.alpha,
                           ruin_level=args.ruin, hedge=hedge, seed=args.seed)
    report = {"config": {"alpha": args.alpha, "ruin_level": args.ruin,
                         "hedge": "put" if args.hedge else "none",
                         "hedge_expiry": args.expiry or sequences.shape[1],
                         "seed": args.seed, "genes": len(gene_ids),
                         "horizon": sequences.shape[1]},
              "report": result.report.as_dict()}
    if args.out is None:
        sys.stdout.write(to_json(report) + "\n")
        return EXIT_OK
    lines = _screen_header(args, len(gene_ids), sequences.shape[1])
    lines.append("gene,lambda,final_wealth,max_wealth,rejected,crossing_time")
    for g, gid in enumerate(gene_ids):
        cross = result.crossing_time[g]
        lines.append(f"{gid},{format_float(result.effective_lambdas[g])},"
                     f"{format_float(result.final_wealth[g])},"
                     f"{format_float(result.max_wealth[g])},"
                     f"{int(result.rejected[g])},{cross if cross >= 0 else ''}")
    _write(args.out + ".csv", "\n".join(lines) + "\n")
    _write(args.out + ".json", to_json(report) + "\n")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    matrix = ingest.load_expression_matrix(args.input, args.normal_label,
                                           args.tumor_label)
    uniform = ingest.transform_to_uniform(matrix, normal_label=args.normal_label,
                                          log_transform=not args.no_log)
    prepared = ingest.prepare_screening(uniform, tumor_label=args.tumor_label)
    lines = [f"# source = {args.input}",
             f"# held_out_columns = {' '.join(str(c) for c in prepared.held_out_columns)}",
             f"# skipped_genes = {' '.join(uniform.skipped_gene_ids)}"]
    width = prepared.sequences.shape[1]
    header = "gene,lambda," + ",".join(f"y{t}" for t in range(1, width + 1))
    lines.append(header)
    for g, gid in enumerate(prepared.gene_ids):
        seq = ",".join(format_float(v) for v in prepared.sequences[g])
        lines.append(f"{gid},{format_float(prepared.lambdas[g])},{seq}")
    _write(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hedgetest",
        description="Sequential testing by betting with risk-neutral hedging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price a European contract on a wealth process")
    p.add_argument("--model", required=True, help="lattice factors, e.g. u=1.5,d=0.5")
    p.add_argument("--contract", required=True, help="e.g. call,S=1.25,tau=3")
    p.add_argument("--method", choices=["lattice", "mc", "black-scholes"],
                   default="lattice")
    p.add_argument("--spot", type=float, default=1.0)
    p.add_argument("--family", choices=["bernoulli", "bounded", "log_normal"],
                   default="bernoulli", help="outcome family for mc pricing")
    p.add_argument("--null-p", type=float, default=0.5, dest="null_p")
    p.add_argument("--bet", type=float, default=1.0,
                   help="constant betting fraction for mc pricing")
    p.add_argument("--n", type=int, default=100_000, help="mc replications")
    p.add_argument("--sigma", type=float, help="volatility for black-scholes")
    p.add_argument("--time", type=float, help="time to expiry for black-scholes")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_price)

    p = sub.add_parser("hedge-solve", help="solve (1 - C(S))*S = floor for strikes")
    p.add_argument("--floor", type=float, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--u", type=float, default=1.5)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_hedge_solve)

    for name, helptext, fn in [
            ("simulate", "run a configured experiment", _cmd_simulate),
            ("shift", "run a distribution-shift experiment", _cmd_shift)]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", help="prefix for .csv and .json artifacts")
        p.set_defaults(fn=fn)

    p = sub.add_parser("screen", help="sequential screening of gene sequences")
    p.add_argument("--matrix", help="raw expression matrix file")
    p.add_argument("--synthetic", choices=["null", "shifted"])
    p.add_argument("--genes", type=int, default=6033)
    p.add_argument("--samples", type=int, default=102)
    p.add_argument("--shift-fraction", type=float, default=0.3, dest="shift_fraction")
    p.add_argument("--shift-mean", type=float, default=0.65, dest="shift_mean")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ruin", type=float, default=0.5)
    p.add_argument("--hedge", action="store_true")
    p.add_argument("--expiry", type=int, help="hedge expiry (default: all samples)")
    p.add_argument("--normal-label", default="normal", dest="normal_label")
    p.add_argument("--tumor-label", default="tumor", dest="tumor_label")
    p.add_argument("--no-log", action="store_true", dest="no_log",
                   help="matrix is already on a log scale")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="prefix for .csv and .json artifacts")
    p.set_defaults(fn=_cmd_screen)

    p = sub.add_parser("ingest", help="transform an expression matrix for screening")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normal-label", default="normal", dest="normal_label")
    p.add_argument("--tumor-label", default="tumor", dest="tumor_label")
    p.add_argument("--no-log", action="store_true", dest="no_log")
    p.set_defaults(fn=_cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError, ingest.ZeroVarianceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StrikeSolveError, InadmissibleBetError, OutcomeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
