"""Command-line entry point: config-driven, seed-deterministic experiment
runs with content-addressed output directories and replayable manifests.

Exit codes: 0 success, 2 validation failure, 3 budget exceeded, 4 config
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .analysis import RegimeMismatch, validate_model
from .config import ConfigError, model_from_config, parse_config, serialize_config
from .fields import SpikeField
from .forward import exact_stationary, isi_moments, simulate
from .graphs import estimate_tau_cdf, tau_tail_bound
from .kalikow import ResidualMassTooLarge, SiteTimeContext, lambda_weights
from .manifest import RunManifest, file_sha256, run_id_for
from .models import MalformedSpec
from .perfect import BudgetExceeded, DEFAULT_BUDGET, ScanCapExceeded, perfect_sample
from .rng import RandomCoordinateSource
from .stats import extract_spikes, loss_of_memory_profile, spike_train_stats

_ENV_PREFIX = "SPIKECHAIN_"
SUBCOMMANDS = (
    "validate", "decompose", "sample-perfect", "simulate",
    "graph-tau", "isi-cov", "loss-memory", "oracle-check", "replay",
)


def _env_default(name: str, fallback=None):
    return os.environ.get(_ENV_PREFIX + name.upper(), fallback)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


class _Run:
    """Collects artifacts for one run directory."""

    def __init__(self, args, config: dict):
        self.config = config
        self.seed = args.seed
        self.run_id = run_id_for(config, args.seed)
        self.dir = Path(args.out) / self.run_id
        self.dir.mkdir(parents=True, exist_ok=True)
        self.src = RandomCoordinateSource(args.seed)
        self.outputs: dict = {}
        self.quiet = args.quiet
        self.started = time.perf_counter()

    def write(self, name: str, text: str):
        path = self.dir / name
        path.write_text(text)
        self.outputs[name] = file_sha256(path)
        return path

    def finish(self, subcommand: str, summary: str) -> int:
        manifest = RunManifest(
            run_id=self.run_id, subcommand=subcommand, seed=self.seed,
            config=self.config, outputs=self.outputs,
            rng_draws=dict(sorted(self.src.draw_counts.items())),
            wall_clock_s=time.perf_counter() - self.started,
        )
        manifest.write(self.dir)
        if not self.quiet:
            print(f"[{self.run_id}] {summary}")
        return 0


def _experiment(config: dict) -> dict:
    return config.get("experiment", {})


def _seeded_sources(src: RandomCoordinateSource, tag: str, count: int):
    return (src.substream(tag, r) for r in range(count))


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_validate(run: _Run) -> int:
    spec = model_from_config(run.config)
    report = validate_model(spec, horizon=16)
    doc = report.to_dict()
    doc["spec_hash"] = spec.spec_hash()
    doc["seed"] = run.seed
    run.write("report.json", _dump_json(doc))
    code = run.finish("validate", f"regime={report.regime} e_delta={report.e_delta:.6g}")
    if report.violations:
        print("validation failure: " + "; ".join(report.violations), file=sys.stderr)
        return 2
    return code


def _cmd_decompose(run: _Run) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    i = int(exp.get("target_neuron", 0))
    t = int(exp.get("time", 0))
    from .perfect import xi_at

    if xi_at(run.src, spec.delta, i, t):
        doc = {"site": [i, t], "spontaneous": True, "spec_hash": spec.spec_hash(),
               "seed": run.seed}
    else:
        ctx = SiteTimeContext.from_source(run.src, spec, i, t)
        weights = lambda_weights(ctx, spec)
        doc = weights.to_dict()
        doc.update({
            "site": [i, t], "spontaneous": False, "window_age": ctx.age,
            "spec_hash": spec.spec_hash(), "seed": run.seed,
        })
    run.write("weights.json", _dump_json(doc))
    return run.finish("decompose", f"site=({i},{t})")


def _meta(run: _Run, spec, mode: str, extra: dict | None = None) -> dict:
    doc = {
        "seed": run.seed, "spec_hash": spec.spec_hash(), "mode": mode,
        "regime": validate_model(spec, horizon=8).regime,
    }
    if extra:
        doc.update(extra)
    return doc


def _cmd_sample_perfect(run: _Run, budget: int) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    t0 = int(exp.get("window_start", 0))
    t1 = int(exp.get("window_end", t0 + 50))
    neurons = exp.get("neurons", list(range(spec.neuron_count)))
    f = perfect_sample(run.src, spec, neurons, (t0, t1), budget=budget)
    run.write("raster.csv", f.to_csv())
    mode = "exact-attractive" if spec.attractive else "dominated"
    run.write("meta.json", _dump_json(_meta(run, spec, mode, {
        "window": [t0, t1], "budget": budget, "spike_rate": f.rate(),
    })))
    return run.finish("sample-perfect", f"window=[{t0},{t1}) rate={f.rate():.4f}")


def _cmd_simulate(run: _Run) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    horizon = int(exp.get("horizon", 1000))
    burnin = int(exp.get("burnin", 100))
    f = simulate(spec, horizon, burnin, run.src)
    run.write("raster.csv", f.to_csv())
    run.write("meta.json", _dump_json(_meta(run, spec, "forward", {
        "horizon": horizon, "burnin": burnin, "spike_rate": f.rate(),
    })))
    return run.finish("simulate", f"T={horizon} rate={f.rate():.4f}")


def _cmd_graph_tau(run: _Run, reps_override: int | None) -> int:
    g = run.config.get("graph", {})
    exp = _experiment(run.config)
    n = int(g.get("n", 100))
    theta = float(g.get("theta", 0.0))
    reps = int(reps_override or exp.get("reps", 1000))
    k_max = int(exp.get("k_max", int(math.isqrt(n))))
    lines = ["k,bound,estimate,se"]
    rows = []
    for k in range(1, k_max + 1):
        est, se = estimate_tau_cdf(n, theta, k, reps, run.src)
        bound = tau_tail_bound(n, theta, k)
        rows.append({"k": k, "bound": bound, "estimate": est, "se": se})
        lines.append(f"{k},{bound!r},{est!r},{se!r}")
    run.write("table.csv", "\n".join(lines) + "\n")
    run.write("report.json", _dump_json({
        "n": n, "theta": theta, "reps": reps, "rows": rows, "seed": run.seed,
    }))
    return run.finish("graph-tau", f"n={n} theta={theta} reps={reps}")


def _cmd_isi_cov(run: _Run, reps_override: int | None) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    horizon = int(exp.get("horizon", 200_000))
    burnin = int(exp.get("burnin", 500))
    target = int(exp.get("target_neuron", 0))
    min_spikes = int(exp.get("min_spikes", 1000))
    f = simulate(spec, horizon, burnin, run.src)
    stats = spike_train_stats(extract_spikes(f, target), min_spikes=min_spikes)
    doc = stats.to_dict()
    doc.update({"seed": run.seed, "spec_hash": spec.spec_hash(), "neuron": target})
    try:
        oracle = exact_stationary(spec)
        mean, cov = isi_moments(oracle, target)
        doc["oracle_mean_isi"] = mean
        doc["oracle_adjacent_cov"] = cov
    except Exception:
        pass
    run.write("report.json", _dump_json(doc))
    return run.finish("isi-cov", f"cov={stats.adjacent_cov:.5g} (se {stats.adjacent_cov_se:.2g})")


def _cmd_loss_memory(run: _Run, reps_override: int | None) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    s_grid = exp.get("s_grid", list(range(2, 11)))
    reps = int(reps_override or exp.get("reps", 20_000))
    horizon = int(exp.get("horizon", max(int(s) for s in s_grid)))
    target = int(exp.get("target_neuron", 0))
    profile = loss_of_memory_profile(spec, target, s_grid, horizon, reps, run.src)
    lines = ["s,difference,se,inverse_bound"]
    for s, d, se, b in zip(profile.s_grid, profile.differences, profile.ses,
                           profile.inverse_bound):
        lines.append(f"{s},{d!r},{se!r},{b!r}")
    run.write("table.csv", "\n".join(lines) + "\n")
    run.write("report.json", _dump_json(profile.to_dict()))
    return run.finish("loss-memory", f"anchor={profile.anchor_constant:.4g}")


def _cmd_oracle_check(run: _Run, reps_override: int | None, budget: int) -> int:
    spec = model_from_config(run.config)
    exp = _experiment(run.config)
    reps = int(reps_override or exp.get("reps", 4000))
    t = int(exp.get("time", 0))
    oracle = exact_stationary(spec)
    n = spec.neuron_count
    counts = np.zeros(n)
    for r in range(reps):
        sub = run.src.substream("oracle-check", r)
        f = perfect_sample(sub, spec, range(n), (t, t + 1), budget=budget)
        counts += f.data[:, 0]
    rates = counts / reps
    doc = {"seed": run.seed, "spec_hash": spec.spec_hash(), "reps": reps, "neurons": {}}
    ok = True
    for i in range(n):
        target = oracle.spike_rate(i)
        se = math.sqrt(max(target * (1 - target), 1.0 / reps) / reps)
        passed = bool(abs(rates[i] - target) <= 3.0 * se)
        ok = ok and passed
        doc["neurons"][str(i)] = {
            "empirical": float(rates[i]), "oracle": target, "se": se, "pass": passed,
        }
    doc["pass"] = ok
    run.write("report.json", _dump_json(doc))
    code = run.finish("oracle-check", f"pass={ok} reps={reps}")
    return code if ok else 2


def _cmd_replay(args) -> int:
    manifest = RunManifest.read(args.manifest)
    ns = argparse.Namespace(
        seed=manifest.seed, out=args.out, quiet=args.quiet,
        reps=None, budget=args.budget, config=None,
    )
    run = _Run(ns, manifest.config)
    code = _dispatch(manifest.subcommand, run, ns)
    if code != 0:
        return code
    replayed = RunManifest.read(run.dir / "manifest.json")
    for name, digest in manifest.outputs.items():
        if replayed.outputs.get(name) != digest:
            print(f"replay mismatch on {name}", file=sys.stderr)
            return 1
    if not args.quiet:
        print(f"replay of {manifest.run_id}: byte-identical")
    return 0


def _dispatch(subcommand: str, run: _Run, args) -> int:
    budget = int(args.budget or DEFAULT_BUDGET)
    reps = int(args.reps) if args.reps else None
    if subcommand == "validate":
        return _cmd_validate(run)
    if subcommand == "decompose":
        return _cmd_decompose(run)
    if subcommand == "sample-perfect":
        return _cmd_sample_perfect(run, budget)
    if subcommand == "simulate":
        return _cmd_simulate(run)
    if subcommand == "graph-tau":
        return _cmd_graph_tau(run, reps)
    if subcommand == "isi-cov":
        return _cmd_isi_cov(run, reps)
    if subcommand == "loss-memory":
        return _cmd_loss_memory(run, reps)
    if subcommand == "oracle-check":
        return _cmd_oracle_check(run, reps, budget)
    raise ConfigError(f"unknown subcommand {subcommand!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spikechain",
        description="Exact sampling and experiments for interacting spiking chains.",
    )
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("manifest", nargs="?", help="manifest path (replay only)")
    p.add_argument("--config", default=_env_default("config"))
    p.add_argument("--seed", type=int, default=int(_env_default("seed", 20240913)))
    p.add_argument("--out", default=_env_default("out", "runs"))
    p.add_argument("--reps", type=int, default=_env_default("reps"))
    p.add_argument("--budget", type=int, default=_env_default("budget"))
    p.add_argument("--quiet", action="store_true",
                   default=bool(_env_default("quiet", "")))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "replay":
            if not args.manifest:
                raise ConfigError("replay needs a manifest path")
            return _cmd_replay(args)
        if args.subcommand != "replay" and args.manifest:
            raise ConfigError("only replay takes a positional manifest path")
        if not args.config:
            raise ConfigError("--config is required (or set SPIKECHAIN_CONFIG)")
        text = Path(args.config).read_text()
        config = parse_config(text)
        declared = config.get("experiment", {}).get("subcommand")
        if declared and declared != args.subcommand:
            raise ConfigError(
                f"config declares subcommand {declared!r} but {args.subcommand!r} was requested"
            )
        run = _Run(args, config)
        return _dispatch(args.subcommand, run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except (BudgetExceeded, ScanCapExceeded, ResidualMassTooLarge) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (MalformedSpec, RegimeMismatch) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
