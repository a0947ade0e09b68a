"""Command-line front end.

    nearign simulate  --channel C --theta 0.5:0.5 --n 100 --seed 1 --out data.txt
    nearign infer     --channel C --data D --s 2 --counts 1:0 [--gap 1e-8]
    nearign idm       --observed 3:1 --s 2 --next 0
    nearign vacuity   --channel C --data D --s 1 --counts 1:0 [--gap-ladder 1e-1,...,1e-8]
    nearign appendix  concentration --counts 1:0 --n-list 1,10,100 --delta 0.1
    nearign appendix  ratio --channel C --data D --counts 1:0 --n-list 1,10,100
    nearign rerun     report.json

Exit status: 0 on success, 2 when a vacuity verdict is inconclusive, 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .concentration import concentration_experiment, ratio_experiment
from .channels import IdentityChannel
from .core import CountVector, Estimate, ManifestDataset, NearIgnoranceError, validate_chances
from .dirichlet import PriorSet
from .fileio import (
    atomic_write,
    dumps,
    format_channel,
    format_dataset,
    parse_channel,
    parse_dataset,
)
from .inference import (
    DEFAULT_LADDER,
    OptimizerConfig,
    idm_bounds,
    lower_expectation,
    upper_expectation,
    vacuity_check,
)
from .quadrature import QuadratureConfig

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


class UsageError(NearIgnoranceError):
    pass


# -- argument parsing helpers --------------------------------------------------


def parse_counts(text: str) -> CountVector:
    try:
        counts = tuple(int(tok) for tok in text.split(":"))
    except ValueError:
        raise UsageError(f"counts must look like 3:1:0, got {text!r}") from None
    return CountVector(counts)


def parse_float_list(text: str, sep: str = ",") -> list[float]:
    try:
        return [float(tok) for tok in text.split(sep) if tok.strip()]
    except ValueError:
        raise UsageError(f"expected a {sep!r}-separated list of numbers, got {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p.read_text()


# -- result encoding ----------------------------------------------------------


def _estimate(e: Estimate) -> dict:
    out = {"value": e.value, "std_error": e.std_error, "method": e.method,
           "n_samples_or_nodes": e.n_samples_or_nodes}
    if e.ess is not None:
        out["ess"] = e.ess
        out["reliable"] = e.reliable
    return out


def _bounds(pair) -> dict:
    out = {"lower": pair.lower, "upper": pair.upper}
    if pair.lower_meta is not None:
        out["lower_meta"] = _estimate(pair.lower_meta)
    if pair.upper_meta is not None:
        out["upper_meta"] = _estimate(pair.upper_meta)
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- configuration --------------------------------------------------------------


def _configs(inputs: dict) -> tuple[QuadratureConfig, OptimizerConfig]:
    qcfg = QuadratureConfig(gauss_nodes=inputs["nodes"], mc_samples=inputs["samples"],
                            seed=inputs["seed"], method=inputs["method"])
    ladder = inputs.get("gap_ladder") or list(DEFAULT_LADDER)
    ocfg = OptimizerConfig(boundary_ladder=tuple(ladder))
    return qcfg, ocfg


def _load_model(inputs: dict):
    channel = parse_channel(inputs["channel"], inputs.get("channel_file") or "<channel>")
    data = parse_dataset(inputs["data"], channel, inputs.get("data_file") or "<data>")
    return channel, data


def _common_inputs(args) -> dict:
    if args.s is not None and not args.s > 0:
        raise UsageError("--s must be positive")
    return {"s": args.s, "nodes": args.nodes, "samples": args.samples, "seed": args.seed,
            "method": args.method}


def _model_inputs(args) -> dict:
    if not args.channel:
        raise UsageError("--channel is required")
    channel_text = _read_text(args.channel, "channel")
    channel = parse_channel(channel_text, args.channel)
    if args.data:
        data = parse_dataset(_read_text(args.data, "data"), channel, args.data)
    else:
        data = ManifestDataset((), channel.kind)
    return {"channel_file": args.channel, "data_file": args.data,
            "channel": format_channel(channel), "data": format_dataset(data, channel)}


# -- commands -------------------------------------------------------------------
# each run_* takes the echoed inputs and returns (results, csv text or None, exit code)


def run_infer(inputs: dict):
    channel, data = _load_model(inputs)
    counts = CountVector(tuple(inputs["counts"]))
    qcfg, ocfg = _configs(inputs)
    ps = PriorSet(inputs["s"], channel.k, inputs["gap"])
    lo = lower_expectation(ps, channel, data, counts, qcfg, ocfg)
    hi = upper_expectation(ps, channel, data, counts, qcfg, ocfg)
    results = {
        "lower": lo.value, "upper": hi.value,
        "lower_meta": _estimate(lo.estimate), "upper_meta": _estimate(hi.estimate),
        "argmin_t": list(lo.t), "argmax_t": list(hi.t),
    }
    return results, None, EXIT_OK


def run_idm(inputs: dict):
    counts = CountVector(tuple(inputs["observed"]))
    pair = idm_bounds(counts, inputs["s"], inputs["next"])
    return {"n_observed": counts.total, **_bounds(pair)}, None, EXIT_OK


def run_vacuity(inputs: dict):
    channel, data = _load_model(inputs)
    counts = CountVector(tuple(inputs["counts"]))
    qcfg, ocfg = _configs(inputs)
    ps = PriorSet(inputs["s"], channel.k, ocfg.boundary_ladder[-1])
    rep = vacuity_check(ps, channel, data, counts, qcfg, ocfg)
    ladder = [
        {"gap": r.gap, "upper": _estimate(r.upper), "lower": _estimate(r.lower),
         "upper_t": list(r.upper_t), "lower_t": list(r.lower_t)}
        for r in rep.ladder_values
    ]
    results = {
        "verdict": rep.verdict,
        "hypothesis_holds": rep.hypothesis_holds,
        "lower_hypothesis_holds": rep.lower_hypothesis_holds,
        "argmax_point": list(rep.argmax_point.freqs),
        "f_max": rep.f_max,
        "likelihood_at_argmax": rep.likelihood_at_argmax,
        "log_likelihood_at_argmax": rep.log_likelihood_at_argmax,
        "liminf_probe": [{"delta": d, "min_likelihood": v} for d, v in rep.liminf_probe],
        "vertex_likelihoods": [{"vertex": i, "likelihood": v} for i, v in rep.vertex_likelihoods],
        "strictly_positive": rep.positivity.strictly_positive,
        "positivity_witness": list(rep.positivity.witness.values) if rep.positivity.witness else None,
        "prior_bounds": _bounds(rep.prior_bounds),
        "prior_upper_vacuous": rep.prior_upper_vacuous,
        "prior_lower_vacuous": rep.prior_lower_vacuous,
        "posterior_bounds": _bounds(rep.posterior_bounds),
        "ladder_monotone": rep.ladder_monotone,
        "upper_converged": rep.upper_converged,
        "lower_converged": rep.lower_converged,
        "ladder": ladder,
        "notes": list(rep.notes),
    }
    table = _csv(["gap", "upper", "upper_se", "lower", "lower_se"],
                 [(r.gap, r.upper.value, r.upper.std_error, r.lower.value, r.lower.std_error)
                  for r in rep.ladder_values])
    code = EXIT_INCONCLUSIVE if rep.verdict == "inconclusive" else EXIT_OK
    return results, table, code


def run_appendix(inputs: dict):
    counts = CountVector(tuple(inputs["counts"]))
    qcfg, _ = _configs(inputs)
    if inputs["experiment"] == "concentration":
        traj = concentration_experiment(inputs["n_list"], counts, inputs["delta"], qcfg,
                                        inputs.get("vertex"))
        rows = [{"n": p.n, "expectation": p.expectation, "mass": _estimate(p.mass)} for p in traj]
        table = _csv(["n", "expectation", "mass", "mass_se"],
                     [(p.n, p.expectation, p.mass.value, p.mass.std_error) for p in traj])
    else:
        channel, data = _load_model(inputs)
        traj = ratio_experiment(inputs["n_list"], counts, channel, data, qcfg, inputs.get("vertex"))
        rows = [{"n": p.n, "ratio": _estimate(p.ratio)} for p in traj]
        table = _csv(["n", "ratio", "ratio_se"],
                     [(p.n, p.ratio.value, p.ratio.std_error) for p in traj])
    return {"experiment": inputs["experiment"], "trajectory": rows}, table, EXIT_OK


RUNNERS = {"infer": run_infer, "idm": run_idm, "vacuity": run_vacuity, "appendix": run_appendix}


def build_report(command: str, inputs: dict) -> tuple[dict, str | None, int]:
    start = time.perf_counter()
    results, table, code = RUNNERS[command](inputs)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "provenance": {
            "package_version": __version__,
            "seed": inputs.get("seed"),
            "gauss_nodes": inputs.get("nodes"),
            "mc_samples": inputs.get("samples"),
            "elapsed_seconds": time.perf_counter() - start,
        },
    }
    return report, table, code


def emit(report: dict, table: str | None, out: str | None, csv_path: str | None = None):
    text = dumps(report) + "\n"
    if out:
        atomic_write(out, text)
        if table is not None:
            atomic_write(csv_path or Path(out).with_suffix(".csv"), table)
    else:
        sys.stdout.write(text)
        if table is not None and csv_path:
            atomic_write(csv_path, table)


def cmd_simulate(args) -> int:
    channel_text = _read_text(args.channel, "channel")
    channel = parse_channel(channel_text, args.channel)
    theta = validate_chances(parse_float_list(args.theta, ":"))
    if theta.k != channel.k:
        raise UsageError(f"--theta has {theta.k} entries, channel has {channel.k} states")
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    rng = np.random.default_rng(args.seed)
    states = rng.choice(channel.k, size=args.n, p=np.asarray(theta.values))
    emitted = channel.sample_symbols(states, rng)
    if channel.kind == "discrete":
        data = ManifestDataset.discrete(emitted.tolist())
    else:
        data = ManifestDataset.continuous(emitted.tolist())
    text = format_dataset(data, channel)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _inputs_for(args) -> dict:
    cmd = args.command
    inputs = _common_inputs(args)
    if cmd in ("infer", "vacuity") or (cmd == "appendix" and args.experiment == "ratio"):
        inputs.update(_model_inputs(args))
    if cmd in ("infer", "vacuity", "appendix"):
        if not args.counts:
            raise UsageError("--counts is required")
        inputs["counts"] = list(parse_counts(args.counts).counts)
    if cmd in ("infer", "vacuity", "idm") and args.s is None:
        raise UsageError("--s is required")
    if cmd == "infer":
        inputs["gap"] = args.gap
    if cmd in ("vacuity", "appendix"):
        inputs["gap_ladder"] = parse_float_list(args.gap_ladder) if args.gap_ladder else None
    if cmd == "idm":
        if args.observed:
            observed = parse_counts(args.observed)
        elif args.channel:
            model = _model_inputs(args)
            channel, data = _load_model(model)
            if not isinstance(channel, IdentityChannel):
                raise UsageError("idm needs an identity channel (the outcomes are observed)")
            observed = CountVector(tuple(np.bincount(np.asarray(data.observations, dtype=int),
                                                     minlength=channel.k).tolist()))
        else:
            raise UsageError("idm needs --observed or --channel/--data")
        inputs["observed"] = list(observed.counts)
        inputs["next"] = args.next
    if cmd == "appendix":
        inputs["experiment"] = args.experiment
        inputs["n_list"] = parse_int_list(args.n_list)
        inputs["delta"] = args.delta
        inputs["vertex"] = args.vertex
    # fail early on bad configuration, before any output exists
    _configs(inputs)
    return inputs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel definition file")
    common.add_argument("--data", help="dataset file")
    common.add_argument("--s", type=float, help="prior strength s > 0")
    common.add_argument("--counts", help="predictive counts n' as i:j:k")
    common.add_argument("--gap-ladder", help="comma-separated decreasing boundary gaps")
    common.add_argument("--nodes", type=int, default=256, help="Gauss nodes (k = 2)")
    common.add_argument("--samples", type=int, default=200_000, help="importance samples (k >= 3)")
    common.add_argument("--method", choices=("auto", "gauss", "mc"), default="auto")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--csv", help="trajectory CSV path (default: report path with .csv)")

    parser = argparse.ArgumentParser(prog="nearign", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="simulate manifest data")
    sim.add_argument("--theta", required=True, help="latent chances as p1:p2:...")
    sim.add_argument("--n", type=int, required=True, help="number of observations")

    inf = sub.add_parser("infer", parents=[common], help="posterior predictive bounds")
    inf.add_argument("--gap", type=float, default=1e-8, help="smallest allowed t_i")

    idm = sub.add_parser("idm", parents=[common], help="closed-form IDM bounds")
    idm.add_argument("--observed", help="observed counts n as i:j:k")
    idm.add_argument("--next", type=int, default=0, help="index of the predicted outcome")

    sub.add_parser("vacuity", parents=[common], help="check posterior vacuity along a gap ladder")

    app = sub.add_parser("appendix", parents=[common], help="concentration experiments")
    app.add_argument("experiment", choices=("concentration", "ratio"))
    app.add_argument("--n-list", default="1,10,100")
    app.add_argument("--delta", type=float, default=0.1)
    app.add_argument("--vertex", type=int, default=None)

    rerun = sub.add_parser("rerun", help="re-run a report from its echoed inputs")
    rerun.add_argument("report")
    rerun.add_argument("--out")
    rerun.add_argument("--csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "rerun":
            old = json.loads(_read_text(args.report, "report"))
            command, inputs = old["command"], old["inputs"]
        else:
            command, inputs = args.command, _inputs_for(args)
        report, table, code = build_report(command, inputs)
        emit(report, table, args.out, args.csv)
        return code
    except (NearIgnoranceError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
