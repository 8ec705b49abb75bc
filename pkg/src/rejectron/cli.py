"""Command-line entry point: ``rejectron {run,bench,verify,plot}``.

Exit codes: 0 success, 1 configuration error, 2 dataset or missing-input
error, 3 a verified property (or an observation trend) failed.
Progress goes to stdout, diagnostics to stderr.
"""

import argparse
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, harness, plot, verify
from ._accel import BACKEND
from .data import DatasetError
from .kernel import KernelSpec
from .linear import StepSchedule
from .losses import HyperParams

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_PROPERTY = 0, 1, 2, 3

DEFAULTS = {
    "learner": "dral",
    "d": "0.25",
    "gamma": "2.0",
    "eta0": "0.1",
    "eta_decrement": "1e-5",
    "eta_floor": "1e-3",
    "T": "10000",
    "repetitions": "10",
    "seed": "0",
    "dataset": "synthetic:n=500,dim=10,radius=5",
    "kernel.kind": "linear",
    "kernel.degree": "2",
    "kernel.coef0": "1.0",
    "kernel.width": "1.0",
    "normalization": "none",
    "stream_mode": "with-replacement",
    "bias": "false",
}

CURVE_FILES = tuple(f"{m}.csv" for m in harness.METRICS) + ("risk_vs_labels.csv",)


class ConfigError(Exception):
    pass


def parse_config_text(text, source="<config>"):
    """Flat ``key=value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def build_config(values, seed=None, base_dir=None):
    """Turn parsed key/values (missing keys take defaults) into a RunConfig."""
    v = dict(DEFAULTS, **values)
    try:
        learner = v["learner"]
        kernel = None
        if learner.startswith("kernel-"):
            kernel = KernelSpec(
                v["kernel.kind"], int(v["kernel.degree"]), float(v["kernel.coef0"]), float(v["kernel.width"])
            )
        dataset = v["dataset"]
        if ":" not in dataset and base_dir is not None and not Path(dataset).is_absolute():
            dataset = str(Path(base_dir) / dataset)
        return harness.RunConfig(
            learner=learner,
            hp=HyperParams(float(v["d"]), float(v["gamma"])),
            schedule=StepSchedule(float(v["eta0"]), float(v["eta_decrement"]), float(v["eta_floor"])),
            kernel=kernel,
            T=int(v["T"]),
            repetitions=int(v["repetitions"]),
            base_seed=int(v["seed"]) if seed is None else int(seed),
            dataset=dataset,
            stream_mode=v["stream_mode"],
            normalization=v["normalization"],
            bias=_bool(v["bias"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, seed=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_config_text(text, str(path)), seed, path.parent)


def version_string():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def config_echo(cfg):
    k = cfg.kernel or KernelSpec()
    dataset = cfg.dataset if isinstance(cfg.dataset, str) else cfg.dataset.name
    return [
        ("learner", cfg.learner),
        ("d", repr(cfg.hp.d)),
        ("gamma", repr(cfg.hp.gamma)),
        ("eta0", repr(cfg.schedule.eta0)),
        ("eta_decrement", repr(cfg.schedule.decrement)),
        ("eta_floor", repr(cfg.schedule.floor)),
        ("T", cfg.T),
        ("repetitions", cfg.repetitions),
        ("seed", cfg.base_seed),
        ("dataset", dataset),
        ("kernel.kind", k.kind.value),
        ("kernel.degree", k.degree),
        ("kernel.coef0", repr(k.coef0)),
        ("kernel.width", repr(k.width)),
        ("normalization", cfg.normalization),
        ("stream_mode", cfg.stream_mode),
        ("bias", str(cfg.bias).lower()),
    ]


def execute_run(cfg, out_dir, jobs=1):
    """Run, aggregate and write CSVs plus manifest; returns the aggregate."""
    ds = harness.prepare_dataset(cfg)
    runs = harness.run_repetitions(cfg, jobs=jobs, ds=ds)
    agg = harness.aggregate(runs)
    harness.write_csvs(agg, out_dir)
    pairs = [("config." + k, v) for k, v in config_echo(cfg)]
    pairs += [
        ("version", version_string()),
        ("backend", BACKEND),
        ("dataset.name", ds.name),
        ("dataset.sha256", ds.sha256 or ""),
        ("dataset.content_sha256", ds.content_hash()),
        ("dataset.n", ds.n),
        ("dataset.dim", ds.dim),
        ("dataset.R", repr(ds.R)),
    ]
    pairs += [(f"rep.{r}.seed", s) for r, s in enumerate(harness.repetition_seeds(cfg))]
    pairs += [(f"rep.{r}.trajectory_sha256", run.trajectory_hash()) for r, run in enumerate(runs)]
    (out_dir / "manifest.txt").write_text(harness.format_report(pairs))
    return agg


def _err(msg):
    print(f"rejectron: {msg}", file=sys.stderr)


def cmd_run(args):
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        agg = execute_run(cfg, out, args.jobs)
    except DatasetError as exc:
        _err(f"dataset error: {exc}")
        return EXIT_DATA
    risk, q = agg.final("risk")[0], agg.final("fraction_queried")[0]
    print(f"wrote {out} final_risk={risk:.6g} final_fraction_queried={q:.6g}")
    return EXIT_OK


def _sweep_key(cfg):
    return replace(cfg, hp=HyperParams(0.25, cfg.hp.gamma))


def cmd_bench(args):
    cfg_dir = Path(args.config)
    paths = sorted(cfg_dir.glob("*.cfg")) if cfg_dir.is_dir() else []
    if not paths:
        _err(f"config error: no *.cfg files in {cfg_dir}")
        return EXIT_CONFIG
    try:
        configs = [(p, load_config(p, args.seed)) for p in paths]
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    out = Path(args.out)
    groups = {}
    try:
        for path, cfg in configs:
            print(f"running {path.name}", flush=True)
            agg = execute_run(cfg, out / path.stem, args.jobs)
            groups.setdefault(_sweep_key(cfg), {})[cfg.hp.d] = agg
    except DatasetError as exc:
        _err(f"dataset error: {exc}")
        return EXIT_DATA
    lines, ok = [], True
    for key, aggs in groups.items():
        dataset = key.dataset if isinstance(key.dataset, str) else key.dataset.name
        rep = harness.observation_checks(aggs, key.learner)
        ok &= rep.passed
        lines.append(f"group={key.learner}@{dataset}\n" + rep.to_text())
    report = "\n".join(lines)
    (out / "report.txt").write_text(report)
    print(report, end="")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_verify(args):
    names = list(verify.SUITES) if "all" in args.suite else list(dict.fromkeys(args.suite))
    ok = True
    texts = []
    for name in names:
        report = verify.SUITES[name]()
        ok &= report.passed
        text = report.to_text()
        texts.append(text)
        print(text, end="", flush=True)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verify_report.txt").write_text("".join(texts))
    if not ok:
        _err("property failure")
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_plot(args):
    src = Path(args.csv_dir)
    missing = [name for name in CURVE_FILES if not (src / name).is_file()]
    if missing:
        _err(f"missing CSV: {', '.join(missing)} in {src}")
        return EXIT_DATA
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        for name in CURVE_FILES:
            target = plot.plot_csv(src / name, out / (Path(name).stem + ".svg"))
            print(f"wrote {target}")
    except plot.PlotError as exc:
        _err(str(exc))
        return EXIT_DATA
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rejectron", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration and write curve CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run every *.cfg in a directory and check the d-sweep trends")
    p.add_argument("--config", required=True, help="directory of .cfg files")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("--suite", action="append", choices=[*verify.SUITES, "all"], required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render curve CSVs as SVG")
    p.add_argument("csv_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        _err("config error: --jobs must be at least 1")
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
