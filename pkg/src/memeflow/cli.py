"""memeflow command line.

Subcommands: simulate, fit, detect, compete, energy, features.

Exit codes: 0 success (or Stable for ``detect``), 1 I/O or validation
error, 2 Bubble, 3 Indeterminate, 4 fit failed or did not converge,
5 malformed CSV input, 64 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

from . import bubble, competition, dynamics, energy, features, fitting
from .errors import CsvFormatError, MemeflowError, SingularMatrix
from .noise import gaussian
from .series import read_series_csv, wide_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUBBLE = 2
EXIT_INDETERMINATE = 3
EXIT_FIT = 4
EXIT_CSV = 5
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_config(path):
    """Read a flat ``key = value`` file (``#`` comments allowed)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[memeflow]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in cp["memeflow"].items()}


def _setting(args, config, name, convert=float, default=None):
    """CLI flag, else config value, else default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    if name in config:
        try:
            return convert(config[name])
        except ValueError:
            raise UsageError(f"config key {name!r}: cannot parse {config[name]!r}") from None
    return default


def _floats(text, what):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _emit(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _stage(text):
    vals = _floats(text, "--stage")
    if len(vals) != 4:
        raise UsageError(f"--stage needs A,deltaE,y0,completion; got {text!r}")
    a, de, y0, cf = vals
    return dynamics.StageSpec(dynamics.LogisticParams(a, de, y0), cf)


def cmd_simulate(args, config):
    step = _setting(args, config, "step", default=0.01)
    seed = _setting(args, config, "seed", int, 0)
    noise = _setting(args, config, "noise", default=0.0)
    fmt_out = _setting(args, config, "format", str, "csv")
    stage_texts = args.stage or [s for s in config.get("stages", "").split(";") if s.strip()]
    if stage_texts:
        series = dynamics.run_stages([_stage(s) for s in stage_texts], step)
    else:
        a = _setting(args, config, "A")
        de = _setting(args, config, "deltaE")
        if a is None or de is None:
            raise UsageError("simulate needs --A and --deltaE (or --stage)")
        t_end = _setting(args, config, "t_end")
        if t_end is None:
            raise UsageError("simulate needs --t-end")
        y0 = _setting(args, config, "y0")
        if y0 is None:
            y0 = _setting(args, config, "epsilon", default=dynamics.DEFAULT_EPSILON) * de
        p = dynamics.LogisticParams(a, de, y0)
        ctx = None
        applied = _setting(args, config, "applied_energy")
        if applied is not None:
            validity = _setting(args, config, "validity", str)
            if validity is None:
                raise UsageError("--applied-energy needs --validity lo,hi")
            bounds = _floats(validity, "--validity")
            if len(bounds) != 2:
                raise UsageError("--validity needs exactly two numbers lo,hi")
            ctx = dynamics.EnergyContext(applied, *bounds)
        series = dynamics.integrate(p, t_end, step, ctx)
    for w in series.warnings:
        print(f"warning: {w}", file=sys.stderr)
    y = series.y
    if noise:
        if noise < 0:
            raise UsageError("--noise must be >= 0")
        y = y + gaussian(seed, len(series), noise)
    if fmt_out == "json":
        text = _json({"t": series.t.tolist(), "y": y.tolist(), "warnings": list(series.warnings)})
    else:
        text = wide_csv(series.t, [y], names=["y"])
    _emit(args, text)
    return EXIT_OK


def cmd_fit(args, config):
    series = read_series_csv(args.input)
    model = _setting(args, config, "model", str, "logistic")
    try:
        if model == "logistic":
            report = fitting.fit_logistic(series)
        elif model == "exponential":
            report = fitting.fit_exponential(series)
        else:
            raise UsageError(f"unknown model {model!r}")
    except MemeflowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FIT
    _emit(args, _json(report.to_dict()))
    return EXIT_OK if report.converged else EXIT_FIT


def cmd_detect(args, config):
    series = read_series_csv(args.input)
    cfg = bubble.BubbleConfig(
        disparity_threshold=_setting(args, config, "disparity_threshold", default=0.15),
        aic_margin=_setting(args, config, "aic_margin", default=2.0),
        inflection_window_fraction=_setting(args, config, "inflection_window", default=1.0),
        amplitude_cap=_setting(args, config, "amplitude_cap", default=4.0),
    )
    verdict = bubble.classify(series, cfg)
    _emit(args, _json(verdict.to_dict()))
    return {
        bubble.Label.STABLE: EXIT_OK,
        bubble.Label.BUBBLE: EXIT_BUBBLE,
        bubble.Label.INDETERMINATE: EXIT_INDETERMINATE,
    }[verdict.label]


def cmd_compete(args, config):
    try:
        raw = competition.load_system(args.system)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.system}: invalid JSON ({exc})") from None
    system = competition.normalize(raw)
    y0_text = _setting(args, config, "y0", str)
    y0 = _floats(y0_text, "--y0") if y0_text else [0.01] * system.n
    if len(y0) != system.n:
        raise UsageError(f"--y0 has {len(y0)} values, system has {system.n} memes")
    t_end = _setting(args, config, "t_end", default=100.0)
    step = _setting(args, config, "step", default=0.01)
    trajectories = competition.integrate_competition(system, y0, t_end, step)
    t = trajectories[0].t
    if _setting(args, config, "format", str, "csv") == "json":
        text = _json({"t": t.tolist(), "y": [tr.y.tolist() for tr in trajectories]})
    else:
        text = wide_csv(t, [tr.y for tr in trajectories])
    _emit(args, text)
    if args.equilibrium:
        # keep stdout clean for the trajectory when it goes there
        stream = sys.stdout if args.output else sys.stderr
        try:
            eq = competition.interior_equilibrium(system)
            note = None
        except SingularMatrix as exc:
            eq, note = None, f"SingularMatrix: {exc}"
        if eq is None:
            stream.write("none\n")
            if note:
                print(note, file=sys.stderr)
        else:
            stream.write(_json({"equilibrium": eq.tolist()}))
    return EXIT_OK


def cmd_energy(args, config):
    def load(path):
        with open(path, newline="", encoding="utf-8") as fh:
            return energy.parse_constituents_csv(fh.read())

    out = {"activation_energy": energy.activation_energy(load(args.input))}
    if args.resting:
        resting = energy.activation_energy(load(args.resting))
        out["resting_energy"] = resting
        out["delta_energy"] = energy.delta_energy(
            energy.EnergyLevels(resting, out["activation_energy"])
        )
    _emit(args, _json(out))
    return EXIT_OK


def cmd_features(args, config):
    with open(args.input, newline="", encoding="utf-8") as fh:
        data = features.parse_dataset_csv(fh.read())
    if data.dropped_rows:
        print(f"dropped {data.dropped_rows} rows with missing cells", file=sys.stderr)
    bins = _setting(args, config, "bins", int, 16)
    low = _setting(args, config, "low", default=features.DEFAULT_LOW)
    high = _setting(args, config, "high", default=features.DEFAULT_HIGH)
    scores = features.triage(data, bins, low, high)
    if _setting(args, config, "format", str, "json") == "csv":
        _emit(args, features.scores_to_csv(scores))
    else:
        _emit(args, _json([s.to_dict() for s in scores]))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--output", help="write to this path instead of stdout")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--seed", type=int, help="seed for synthetic noise")

    parser = _Parser(prog="memeflow", description="Meme aggregation dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="integrate the logistic amplitude equation")
    p.add_argument("--A", dest="A", type=float, help="affinity")
    p.add_argument("--deltaE", dest="deltaE", type=float, help="energy gap (upper asymptote)")
    p.add_argument("--y0", type=float, help="initial amplitude (default epsilon*deltaE)")
    p.add_argument("--epsilon", type=float, help="start offset as a fraction of deltaE")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--noise", type=float, help="std of additive Gaussian noise")
    p.add_argument("--stage", action="append", metavar="A,deltaE,y0,completion",
                   help="chain hierarchical stages (repeatable)")
    p.add_argument("--applied-energy", dest="applied_energy", type=float)
    p.add_argument("--validity", metavar="LO,HI")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit a t,y CSV")
    p.add_argument("input")
    p.add_argument("--model", choices=["logistic", "exponential"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("detect", parents=[common], help="classify a t,y CSV as Stable/Bubble")
    p.add_argument("input")
    p.add_argument("--disparity-threshold", dest="disparity_threshold", type=float)
    p.add_argument("--aic-margin", dest="aic_margin", type=float)
    p.add_argument("--inflection-window", dest="inflection_window", type=float)
    p.add_argument("--amplitude-cap", dest="amplitude_cap", type=float)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("compete", parents=[common], help="simulate competing memes")
    p.add_argument("system", help="JSON with affinities, delta_es, alpha")
    p.add_argument("--y0", metavar="Y1,...,YN")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--equilibrium", action="store_true", help="also report the interior equilibrium")
    p.set_defaults(func=cmd_compete)

    p = sub.add_parser("energy", parents=[common], help="activation energy of a constituent CSV")
    p.add_argument("input")
    p.add_argument("--resting", help="constituent CSV of the resting structure")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("features", parents=[common], help="entropy triage of dataset columns")
    p.add_argument("input")
    p.add_argument("--bins", type=int)
    p.add_argument("--low", type=float)
    p.add_argument("--high", type=float)
    p.set_defaults(func=cmd_features)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {}
        code = args.func(args, config)
        sys.stdout.flush()
        return code
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except UsageError as exc:
        print(f"memeflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CsvFormatError as exc:
        print(f"memeflow: malformed CSV: {exc}", file=sys.stderr)
        return EXIT_CSV
    except OSError as exc:
        print(f"memeflow: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except MemeflowError as exc:
        print(f"memeflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
