"""Command-line experiment runner.

Every command writes one table (CSV or JSON) preceded by a metadata header
that is enough to rerun it. Exit codes: 0 success, 2 configuration error,
3 failed check, 4 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics as pystats
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainConfig, hitrun_step, make_kernel, run_replications
from .diagnostics import (ConstantSeries, autocorrelation, coupling_batch, effective_sample_size,
                          empirical_mixing_profile, mixing_step_bound)
from .lattice import LatticeBijection
from .metropolis import metro_step_l1, metro_step_l2, metro_step_two_param
from .models import L1, L2, LatticeL1, LatticeL2, TwoParam, WeightedL1, WeightedL2, is_lattice, model_size
from .oracle import EnumerationLimit, chi_square_gof, counts_of, enumerate_model
from .perm import Stat, identity, reverse
from .rng import STAGE_START, make_stream

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_LIMIT = 0, 2, 3, 4

MODELS = ("l1", "l2", "wl1", "wl2", "twoparam", "lattice-l1", "lattice-l2")
COMMANDS = ("sample", "bench", "oracle-check", "couple-test", "mixing-profile", "autocorr", "histogram")

STAT_COLUMNS = {
    "t1": (Stat.T1, "t1_fixed_points"),
    "t2": (Stat.T2, "t2_cycle_len_mid"),
    "t3": (Stat.T3, "t3_lis"),
    "h_l1": (Stat.H, "h_l1"),
    "h_l2": (Stat.H2, "h_l2"),
    "cycles": (Stat.C, "cycles"),
    "mean_disp": (Stat.MEAN_DISP, "mean_displacement"),
}
DEFAULT_STATS = "t1,t2,t3,h_l1,cycles"

DEFAULTS = {
    "model": None, "n": None, "beta": None, "beta1": None, "beta2": 0.0, "weights": None, "N": None, "d": None,
    "sampler": "hitrun", "steps": None, "burn_in": 0, "thin": 1, "reps": None, "seed": 0, "out": None,
    "format": "csv", "stats": DEFAULT_STATS, "stat": "t1", "start": "identity", "workers": 1,
    "dump_perms": None, "warmup": 100, "scaling": False, "mode": "exact", "max_lag": 50, "alpha": 1e-3,
}


class ConfigError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# -- configuration ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # every default is None so explicit flags can be told apart from the config file
    common.add_argument("--config", help="JSON file with any of the options below; flags override it")
    common.add_argument("--model", choices=MODELS, default=None)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--beta", type=float, default=None)
    common.add_argument("--beta1", type=float, default=None)
    common.add_argument("--beta2", type=float, default=None)
    common.add_argument("--weights", default=None, help="file with one positive non-decreasing weight per line")
    common.add_argument("--N", type=int, default=None, dest="N")
    common.add_argument("--d", type=int, default=None)
    common.add_argument("--sampler", choices=("hitrun", "metropolis"), default=None)
    common.add_argument("--steps", type=int, default=None)
    common.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    common.add_argument("--thin", type=int, default=None)
    common.add_argument("--reps", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--start", choices=("identity", "reverse"), default=None)

    p = argparse.ArgumentParser(prog="mallows-hitrun", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="statistics of retained samples")
    s.add_argument("--stats", default=None, help=f"comma list of {','.join(STAT_COLUMNS)}")
    s.add_argument("--dump-perms", default=None, dest="dump_perms", help="also write one sample per line")

    b = sub.add_parser("bench", parents=[common], help="per-step wall time")
    b.add_argument("--warmup", type=int, default=None)
    b.add_argument("--scaling", action="store_true", default=None,
                   help="also time at 2n with beta*n fixed and check the growth factor")

    o = sub.add_parser("oracle-check", parents=[common], help="one-step stationarity against enumeration")
    o.add_argument("--alpha", type=float, default=None)

    sub.add_parser("couple-test", parents=[common], help="coupling experiment for one-sided restrictions")

    m = sub.add_parser("mixing-profile", parents=[common], help="TV to stationarity by step")
    m.add_argument("--mode", choices=("exact", "kernel", "proxy"), default=None)
    m.add_argument("--stat", choices=tuple(STAT_COLUMNS), default=None)

    a = sub.add_parser("autocorr", parents=[common], help="autocorrelation of one statistic")
    a.add_argument("--stat", choices=tuple(STAT_COLUMNS), default=None)
    a.add_argument("--max-lag", type=int, default=None, dest="max_lag")

    h = sub.add_parser("histogram", parents=[common], help="histogram of one statistic")
    h.add_argument("--stat", choices=tuple(STAT_COLUMNS), default=None)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    explicit = set()
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in loaded.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
            explicit.add(key)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
            explicit.add(key)
    cfg["command"] = args.command
    cfg["explicit"] = frozenset(explicit)
    return cfg


def read_weights(spec) -> tuple[float, ...]:
    if isinstance(spec, (list, tuple)):
        vals = spec
    else:
        try:
            text = Path(spec).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read weights: {exc}") from None
        vals = [line.strip() for line in text.splitlines() if line.strip()]
    try:
        w = tuple(float(v) for v in vals)
    except ValueError as exc:
        raise ConfigError(f"bad weight value: {exc}") from None
    if not w:
        raise ConfigError("weight file is empty")
    if any(not math.isfinite(x) or x <= 0 for x in w):
        raise ConfigError("weights must be positive")
    if any(b < a for a, b in zip(w, w[1:])):
        raise ConfigError("weights must be non-decreasing")
    return w


def _need(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"--{k.replace('_', '-')} is required for model {cfg['model']}")


def build_model(cfg: dict):
    name = cfg["model"]
    if name is None:
        raise ConfigError("--model is required")
    try:
        if name in ("l1", "l2"):
            _need(cfg, "n", "beta")
            model = (L1 if name == "l1" else L2)(float(cfg["beta"]))
            n = int(cfg["n"])
        elif name in ("wl1", "wl2"):
            _need(cfg, "beta", "weights")
            w = read_weights(cfg["weights"])
            if cfg.get("n") is not None and int(cfg["n"]) != len(w):
                raise ConfigError(f"--n {cfg['n']} does not match {len(w)} weights")
            model = (WeightedL1 if name == "wl1" else WeightedL2)(float(cfg["beta"]), w)
            n = len(w)
        elif name == "twoparam":
            _need(cfg, "n", "beta1")
            model = TwoParam(float(cfg["beta1"]), float(cfg["beta2"] or 0.0))
            n = int(cfg["n"])
        else:
            _need(cfg, "N", "d", "beta")
            model = (LatticeL1 if name == "lattice-l1" else LatticeL2)(float(cfg["beta"]), int(cfg["N"]), int(cfg["d"]))
            n = model_size(model)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if n < 1:
        raise ConfigError("n must be positive")
    if cfg["sampler"] == "metropolis" and (is_lattice(model) or name in ("wl1", "wl2")):
        raise ConfigError(f"no Metropolis sampler for model {name}")
    return model, n


def model_params(model) -> dict:
    out = {"model": type(model).__name__}
    for key in ("beta", "beta1", "beta2", "N", "d"):
        if hasattr(model, key):
            out[key] = getattr(model, key)
    if hasattr(model, "weights"):
        out["weights"] = " ".join(repr(x) for x in model.weights)
    return out


def chain_config(cfg: dict, default_steps: int, default_reps: int = 1) -> ChainConfig:
    steps = cfg["steps"] if cfg["steps"] is not None else default_steps
    reps = cfg["reps"] if cfg["reps"] is not None else default_reps
    try:
        return ChainConfig(seed=int(cfg["seed"]), steps=int(steps), burn_in=int(cfg["burn_in"]),
                           thinning=int(cfg["thin"]), replications=int(reps))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def start_state(model, n: int, which: str):
    if is_lattice(model):
        if which == "identity":
            return LatticeBijection.identity(model.N, model.d)
        return LatticeBijection.from_linear(model.N, model.d, list(range(n, 0, -1)))
    return identity(n) if which == "identity" else reverse(n)


# -- output ------------------------------------------------------------------------

def build_id() -> str:
    """``git describe``-style identifier of the source tree, without dates."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"], cwd=here, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"v{__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}-unknown"


def render(meta: dict, columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        body = {"meta": meta, "rows": [dict(zip(columns, r)) for r in rows]}
        return json.dumps(body, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}: {val}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def base_meta(cfg: dict, model, n: int) -> dict:
    meta = {"command": cfg["command"]}
    meta.update(model_params(model))
    meta["n"] = n
    meta["sampler"] = cfg["sampler"]
    meta["seed"] = int(cfg["seed"])
    meta["version"] = __version__
    meta["build"] = build_id()
    return meta


# -- commands ---------------------------------------------------------------------------

def _stat_list(cfg) -> list[str]:
    names = [s.strip() for s in str(cfg["stats"]).split(",") if s.strip()]
    bad = [s for s in names if s not in STAT_COLUMNS]
    if bad or not names:
        raise ConfigError(f"unknown statistics {bad}; choose from {','.join(STAT_COLUMNS)}")
    return names


def _chains(cfg, model, n, chain, stats, keep=False):
    start = start_state(model, n, cfg["start"])
    collect = {STAT_COLUMNS[s][0] for s in stats}
    try:
        return run_replications(model, start, chain, collect, sampler=cfg["sampler"], keep_samples=keep,
                                workers=int(cfg["workers"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_sample(cfg, model, n):
    stats = _stat_list(cfg)
    chain = chain_config(cfg, default_steps=0)
    results = _chains(cfg, model, n, chain, stats, keep=cfg["dump_perms"] is not None)
    multi = chain.replications > 1
    columns = (["rep"] if multi else []) + ["step"] + stats
    rows = []
    dump = []
    for r, res in enumerate(results):
        for k, (t, rec) in enumerate(zip(res.steps, res.records)):
            rows.append(([r] if multi else []) + [t] + [getattr(rec, STAT_COLUMNS[s][1]) for s in stats])
            if res.samples is not None:
                s = res.samples[k]
                images = s.linear().mapping if is_lattice(model) else s.mapping
                dump.append(" ".join(map(str, images)))
    meta = base_meta(cfg, model, n)
    meta.update(steps=chain.steps, burn_in=chain.burn_in, thin=chain.thinning, reps=chain.replications,
                start=cfg["start"])
    extra = {}
    if cfg["dump_perms"] is not None:
        extra[cfg["dump_perms"]] = "".join(line + "\n" for line in dump)
    return meta, columns, rows, extra


def _time_steps(advance, state, steps, warmup):
    state = advance(state, warmup)
    times = []
    clock = time.perf_counter
    for _ in range(steps):
        t0 = clock()
        state = advance(state, 1)
        times.append(clock() - t0)
    return times


def bench_model(model, n, sampler, steps, warmup=100, seed=0):
    """Mean and median wall time of one step in milliseconds, from the identity."""
    rng = make_stream(seed, 0, STAGE_START)
    advance = make_kernel(model, rng, sampler, n)
    state = start_state(model, n, "identity")
    if not is_lattice(model):
        state = list(state.mapping)
    times = _time_steps(advance, state, steps, warmup)
    return 1e3 * pystats.fmean(times), 1e3 * pystats.median(times)


def _rescaled(model, factor):
    """Same model at ``factor`` times the size with ``beta * n`` fixed."""
    if isinstance(model, (L1, L2)):
        return type(model)(model.beta / factor)
    if isinstance(model, TwoParam):
        return TwoParam(model.beta1 / factor, model.beta2)
    raise ConfigError("--scaling supports l1, l2 and twoparam")


def cmd_bench(cfg, model, n):
    steps = cfg["steps"] if cfg["steps"] is not None else 1000
    warmup = int(cfg["warmup"])
    if steps < 1000:
        raise ConfigError(f"bench needs at least 1000 timed steps, got {steps}")
    if warmup < 0:
        raise ConfigError("--warmup must be >= 0")
    if "sampler" in cfg.get("explicit", ()):
        samplers = [cfg["sampler"]]
    else:
        samplers = ["hitrun"] if is_lattice(model) or isinstance(model, (WeightedL1, WeightedL2)) \
            else ["hitrun", "metropolis"]
    columns = ["model", "sampler", "n", "steps", "mean_ms", "median_ms"]
    rows = []
    means = {}
    for sampler in samplers:
        mean, med = bench_model(model, n, sampler, steps, warmup, int(cfg["seed"]))
        means[(sampler, n)] = mean
        rows.append([cfg["model"], sampler, n, steps, mean, med])
    meta = base_meta(cfg, model, n)
    meta.update(steps=steps, warmup=warmup)
    failed = False
    if cfg["scaling"]:
        big = _rescaled(model, 2)
        mean, med = bench_model(big, 2 * n, "hitrun", steps, warmup, int(cfg["seed"]))
        rows.append([cfg["model"], "hitrun", 2 * n, steps, mean, med])
        growth = mean / means[("hitrun", n)]
        meta.update(growth=repr(growth), growth_limit=2.5, verdict="PASS" if growth <= 2.5 else "FAIL")
        failed = growth > 2.5
    if len(samplers) == 2:
        meta["ratio_hitrun_over_metropolis"] = repr(means[("hitrun", n)] / means[("metropolis", n)])
    return meta, columns, rows, {"__failed__": failed}


def _step_function(model, sampler):
    if sampler == "metropolis":
        fn = {L1: lambda s, r: metro_step_l1(s, model.beta, r), L2: lambda s, r: metro_step_l2(s, model.beta, r),
              TwoParam: lambda s, r: metro_step_two_param(s, model, r)}
        return fn[type(model)]
    return lambda s, r: hitrun_step(model, s, r)


def cmd_oracle_check(cfg, model, n):
    reps = cfg["reps"] if cfg["reps"] is not None else 100000
    alpha = float(cfg["alpha"])
    if reps < 1:
        raise ConfigError("--reps must be positive")
    table = enumerate_model(model, None if is_lattice(model) else n)
    rng = make_stream(int(cfg["seed"]))
    step = _step_function(model, cfg["sampler"])
    idx = table.sample(rng, reps)
    out = [step(table.states[k], rng) for k in idx]
    res = chi_square_gof(counts_of(table, out), table.probabilities)
    verdict = "PASS" if res.passed(alpha) else "FAIL"
    meta = base_meta(cfg, model, n)
    meta.update(draws=reps, alpha=alpha, verdict=verdict)
    columns = ["check", "draws", "chi2", "dof", "p_value", "tv", "alpha", "verdict"]
    rows = [["one-step-stationarity", reps, res.statistic, res.dof, res.p_value, res.tv, alpha, verdict]]
    return meta, columns, rows, {"__failed__": verdict == "FAIL"}


def cmd_couple_test(cfg, model_unused, n):
    runs = cfg["reps"] if cfg["reps"] is not None else 100000
    if runs < 1:
        raise ConfigError("--reps must be positive")
    batch = coupling_batch(n, runs, make_stream(int(cfg["seed"])))
    ok = batch.max_rho <= 2 * n and batch.violations == 0
    verdict = "PASS" if ok else "FAIL"
    meta = {"command": "couple-test", "n": n, "runs": runs, "seed": int(cfg["seed"]), "version": __version__,
            "build": build_id(), "verdict": verdict}
    columns = ["n", "runs", "max_rho", "mean_rho", "bound", "violations", "verdict"]
    rows = [[n, runs, batch.max_rho, float(batch.rho.mean()), 2 * n, batch.violations, verdict]]
    return meta, columns, rows, {"__failed__": not ok}


def cmd_mixing_profile(cfg, model, n):
    mode = cfg["mode"]
    steps = cfg["steps"] if cfg["steps"] is not None else mixing_step_bound(n)
    reps = cfg["reps"] if cfg["reps"] is not None else (1 if mode == "kernel" else 1000)
    chain = ChainConfig(seed=int(cfg["seed"]), steps=int(steps), replications=int(reps))
    stat = STAT_COLUMNS[cfg["stat"]][0]
    try:
        prof = empirical_mixing_profile(model, None if is_lattice(model) else n, chain, mode, stat, cfg["sampler"])
    except EnumerationLimit:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    below = [t for t, v in prof if v < 0.25]
    meta = base_meta(cfg, model, n)
    meta.update(mode=mode, steps=chain.steps, reps=chain.replications, bound_steps=mixing_step_bound(n),
                t_mix_quarter=below[0] if below else "none")
    if mode == "proxy":
        meta["stat"] = cfg["stat"]
    return meta, ["step", "tv"], [[t, v] for t, v in prof], {}


def _single_series(cfg, model, n):
    chain = chain_config(cfg, default_steps=0)
    if chain.replications != 1:
        raise ConfigError("this command runs a single chain; use --reps 1")
    name = cfg["stat"]
    res = _chains(cfg, model, n, chain, [name])[0]
    meta = base_meta(cfg, model, n)
    meta.update(steps=chain.steps, burn_in=chain.burn_in, thin=chain.thinning, stat=name, start=cfg["start"])
    return meta, [getattr(rec, STAT_COLUMNS[name][1]) for rec in res.records]


def cmd_autocorr(cfg, model, n):
    meta, series = _single_series(cfg, model, n)
    max_lag = int(cfg["max_lag"])
    try:
        acf = autocorrelation(series, max_lag)
        meta["ess"] = repr(effective_sample_size(series))
    except ConstantSeries as exc:
        raise CheckFailed(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    meta["samples"] = len(series)
    return meta, ["lag", "acf"], [[k, float(v)] for k, v in enumerate(acf)], {}


def cmd_histogram(cfg, model, n):
    meta, series = _single_series(cfg, model, n)
    vals, counts = np.unique(np.asarray(series), return_counts=True)
    meta["samples"] = len(series)
    if len(series):
        meta["mean"] = repr(float(np.mean(series)))
    rows = [[v.item(), int(c)] for v, c in zip(vals, counts)]
    return meta, ["value", "count"], rows, {}


HANDLERS = {
    "sample": cmd_sample, "bench": cmd_bench, "oracle-check": cmd_oracle_check, "couple-test": cmd_couple_test,
    "mixing-profile": cmd_mixing_profile, "autocorr": cmd_autocorr, "histogram": cmd_histogram,
}


def run(cfg: dict) -> int:
    if cfg["command"] == "couple-test":
        if cfg.get("n") is None or int(cfg["n"]) < 1:
            raise ConfigError("--n is required for couple-test")
        model, n = None, int(cfg["n"])
    else:
        model, n = build_model(cfg)
    if int(cfg["workers"]) < 1:
        raise ConfigError("--workers must be >= 1")
    meta, columns, rows, extra = HANDLERS[cfg["command"]](cfg, model, n)
    failed = extra.pop("__failed__", False)
    text = render(meta, columns, rows, cfg["format"])
    for path, content in extra.items():
        write_atomic(path, content)
    if cfg["out"]:
        write_atomic(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(resolve(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
