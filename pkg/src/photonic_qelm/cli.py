"""Command-line front end.

Subcommands: ``povm-info``, ``sweep``, ``optimize``, ``simulate``, ``train``.
Each run writes its outputs plus ``manifest.json`` into ``--out``; passing
that manifest back as ``--config`` reproduces the run.  Failures print one
line ``photonic-qelm: error: <kind>: <message>`` to stderr.
"""
import argparse
import configparser
import csv
import datetime as dt
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, kernels
from . import config as cfgmod
from .estimator import EstimatorWeights, TrainingSet, train
from .harness import optimize_config, run_sweep, simulate_state, substream
from .quantum import PrepParams, haar_random_state, input_state
from .reservoir import ConfigurationError, build_walk, frame_rank, walk_povm
from .sampling import DegenerateSampleError

PROG = "photonic-qelm"
EXIT_RUNTIME, EXIT_USAGE, EXIT_CONFIG = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common():
    p = _Parser(add_help=False)
    p.add_argument("--config", help="INI config file or a run manifest (.json)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--shots", help="mean flux per state, or 'inf'")
    p.add_argument("--reps", type=int, help="repetitions")
    p.add_argument("--ntrain", help="training sizes, e.g. '2:5,10:100:10'")
    p.add_argument("--sampling", choices=["poisson", "multinomial", "exact"])
    p.add_argument("--features", choices=["raw", "conditional"])
    p.add_argument("--intercept", choices=["on", "off"])
    p.add_argument("--criterion", choices=["sigma_min", "val_mse"])
    p.add_argument("--budget", type=int)
    p.add_argument("--fixed-records", action="store_true", default=None, help="reuse one count record per state")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    return p


def build_parser():
    parser = _Parser(prog=PROG, description="Quantum-walk extreme learning machine simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    sub.add_parser("povm-info", parents=[common], help="effective POVM, frame rank and singular values")
    sub.add_parser("sweep", parents=[common], help="MSE versus training-set size")
    sub.add_parser("optimize", parents=[common], help="search coin angles and projection")
    sim = sub.add_parser("simulate", parents=[common], help="one state end to end")
    sim.add_argument("--prep", help="zeta1,theta1 preparation angles (default: Haar-random from the seed)")
    sim.add_argument("--weights", help="weights JSON to use instead of training a readout")
    tr = sub.add_parser("train", parents=[common], help="fit weights from a feature/target CSV")
    tr.add_argument("--data", required=True, help="CSV with p_* feature columns and o_<observable> target columns")
    return parser


def _overrides(args):
    o = {}
    seed_section = "optimize" if args.command == "optimize" else "harness"
    pairs = [
        ("seed", (seed_section, "seed")),
        ("shots", ("sampling", "shots")),
        ("reps", ("harness", "repetitions")),
        ("ntrain", ("harness", "ntrain")),
        ("sampling", ("sampling", "sampling")),
        ("features", ("sampling", "features")),
        ("intercept", ("sampling", "intercept")),
        ("criterion", ("optimize", "criterion")),
        ("budget", ("optimize", "budget")),
    ]
    for attr, key in pairs:
        val = getattr(args, attr)
        if val is not None:
            o[key] = val
    if args.fixed_records:
        o[("harness", "fixed_records")] = "on"
    if args.command == "simulate":
        if args.prep is not None:
            o[("simulate", "prep")] = args.prep
        if args.weights is not None:
            o[("simulate", "weights")] = args.weights
    if args.command == "train":
        o[("train", "data")] = args.data
    return o


def _resolve(args):
    cp = cfgmod.load(args.config) if args.config else None
    return cfgmod.resolve(cp, _overrides(args))


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cmd_povm_info(res, args):
    walk = cfgmod.walk_from(res)
    build_walk(walk)
    povm = walk_povm(walk)
    fr = frame_rank(povm)
    lines = [f"outcomes (OAM n): {list(povm.labels)}"]
    for n, el in zip(povm.labels, povm.elements):
        lines.append(f"mu[{n:+d}] = {np.array2string(el, precision=6, suppress_small=True, separator=', ')}".replace("\n", ""))
    lines.append(f"frame rank: {fr.rank}")
    lines.append("singular values: " + ", ".join(f"{s:.6g}" for s in fr.singular_values))
    info = {
        "outcomes": list(povm.labels),
        "elements": [[[[c.real, c.imag] for c in row] for row in el] for el in povm.elements],
        "frame_rank": fr.rank,
        "singular_values": fr.singular_values.tolist(),
        "informationally_complete": fr.rank == 4,
    }
    return "\n".join(lines) + "\n", {"povm.json": _json(info)}


def _cmd_sweep(res, args):
    cfg = cfgmod.experiment_from(res)
    result = run_sweep(cfg, threads=args.threads)
    meta = dict(result.metadata, kernel_backend=kernels.BACKEND)
    files = {
        "summary.csv": result.summary_csv(),
        "repetitions.csv": result.repetitions_csv(),
        "metadata.json": _json(meta),
    }
    return result.summary_csv(), files


def _cmd_optimize(res, args):
    o = res["optimize"]
    opt = optimize_config(
        int(o["budget"]),
        substream(int(o["seed"]), 7),
        criterion=o["criterion"],
        bounds=cfgmod.bounds_from(res),
        validation=cfgmod.validation_from(res),
    )
    fr = frame_rank(walk_povm(opt.config))
    score = {
        "criterion": opt.criterion,
        "score": opt.score,
        "evaluated": opt.evaluated,
        "frame_rank": fr.rank,
        "singular_values": fr.singular_values.tolist(),
    }
    # full config with the reservoir section replaced by the optimum
    cp = configparser.ConfigParser()
    for sec, keys in res.items():
        if sec not in ("reservoir", "simulate", "train"):
            cp[sec] = keys
    buf = io.StringIO()
    cp.write(buf)
    text = cfgmod.walk_to_ini(opt.config) + buf.getvalue()
    msg = f"{opt.criterion} = {opt.score!r} after {opt.evaluated} candidates; frame rank {fr.rank}\n"
    return msg, {"optimized.cfg": text, "score.json": _json(score)}


def _cmd_simulate(res, args):
    cfg = cfgmod.experiment_from(res)
    s = res["simulate"]
    if s["prep"] == "random":
        psi = haar_random_state(substream(cfg.master_seed, 8))
    else:
        psi = input_state(PrepParams(*cfgmod.parse_angles(s["prep"], 2)))
    weights = None
    if s.get("weights"):
        try:
            with open(s["weights"]) as fh:
                weights = EstimatorWeights.from_json(fh.read())
        except OSError as exc:
            raise ConfigurationError(f"cannot read weights {s['weights']}: {exc.strerror}") from None
    out = simulate_state(cfg, psi, weights)
    return _json(out), {"simulate.json": _json(out)}


def _read_training_csv(path, res):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read data {path}: {exc.strerror}") from None
    if not rows:
        raise ConfigurationError(f"{path} has no data rows")
    fcols = [c for c in rows[0] if c.startswith("p_")]
    ocols = [c for c in rows[0] if c.startswith("o_")]
    if not fcols or not ocols:
        raise ConfigurationError("data needs p_* feature columns and o_* target columns")
    F = np.array([[float(r[c]) for c in fcols] for r in rows])
    T = np.array([[float(r[c]) for c in ocols] for r in rows])
    s = res["sampling"]
    intercept = cfgmod.parse_bool(s["intercept"])
    if intercept:
        F = np.hstack([F, np.ones((len(F), 1))])
    mode = "exact" if math.isinf(cfgmod.parse_shots(s["shots"])) and s["features"] == "raw" else s["features"]
    return TrainingSet(F, T, mode, intercept, tuple(c[2:] for c in ocols))


def _cmd_train(res, args):
    ts = _read_training_csv(res["train"]["data"], res)
    w = train(ts, float(res["estimator"]["rcond"]), float(res["estimator"]["ridge"]))
    text = w.to_json() + "\n"
    return text, {"weights.json": text}


COMMANDS = {
    "povm-info": _cmd_povm_info,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "train": _cmd_train,
}

DEFAULT_OUT = {"sweep": "qelm_out", "optimize": "qelm_out", "simulate": "qelm_out", "train": "qelm_out"}


def _write_all(outdir, files):
    """Write every file or none of them."""
    os.makedirs(outdir, exist_ok=True)
    tmp = []
    try:
        for name, text in files.items():
            path = os.path.join(outdir, name)
            with open(path + ".part", "w", newline="") as fh:
                fh.write(text)
            tmp.append(path)
        for path in tmp:
            os.replace(path + ".part", path)
    except OSError:
        for path in tmp:
            if os.path.exists(path + ".part"):
                os.remove(path + ".part")
        raise


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    started = dt.datetime.now(dt.timezone.utc).isoformat()
    res = _resolve(args)
    stdout_text, files = COMMANDS[args.command](res, args)
    outdir = args.out or DEFAULT_OUT.get(args.command)
    if outdir is not None:
        manifest = {
            "artifact_version": __version__,
            "subcommand": args.command,
            "argv": list(argv),
            "config": res,
            "master_seed": int(res["optimize" if args.command == "optimize" else "harness"]["seed"]),
            "kernel_backend": kernels.BACKEND,
            "threads": args.threads,
            "started_utc": started,
            "finished_utc": dt.datetime.now(dt.timezone.utc).isoformat(),
            "outputs": sorted(files) + ["manifest.json"],
        }
        files = dict(files, **{"manifest.json": _json(manifest)})
        _write_all(outdir, files)
    sys.stdout.write(stdout_text)
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format=f"{PROG}: %(levelname)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except UsageError as exc:
        kind, code = "usage", EXIT_USAGE
        msg = str(exc)
    except (ConfigurationError, DegenerateSampleError) as exc:
        kind, code = "config", EXIT_CONFIG
        msg = str(exc)
    except ValueError as exc:
        kind, code = "invalid", EXIT_CONFIG
        msg = str(exc)
    except Exception as exc:  # noqa: BLE001
        kind, code = "runtime", EXIT_RUNTIME
        msg = f"{type(exc).__name__}: {exc}"
    sys.stderr.write(f"{PROG}: error: {kind}: {' '.join(msg.split())}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
