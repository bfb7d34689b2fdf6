"""Command-line entry point.

Subcommands
-----------
run                 one experiment, one CSV per algorithm plus ``experiment.json``
sweep               seeds x configs grid, one output directory per experiment
export-channel      write the synthesized ChannelSet as JSON
import-channel      run an experiment on a ChannelSet read from JSON
precompute-statics  write CCoI statics as JSON

Exit status is 0 on success, 2 for configuration problems and 1 for any
other failure.
"""

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import jsonio
from .ccoi import ccoi_precompute, ccoi_statics_messages, statics_to_json
from .channel import channel_from_json, channel_to_json, synthesize_channel
from .config import config_from_dict, config_to_dict, parse_config
from .errors import CoopBeamError, ConfigError, InvalidParam
from .harness import (avg_throughput, draw_symbols, oracle_precoder, run_experiment,
                      trace_dict, trace_to_csv)
from .numerics import spawn_rngs, track_factorizations
from .topology import build_topology

__all__ = ["main", "build_instance", "run_config"]


def _with_overrides(cfg, seed=None, algorithms=None, out=None):
    data = config_to_dict(cfg)
    if seed is not None:
        data["seed"] = int(seed)
    if algorithms is not None:
        data["algorithms"]["run"] = algorithms
    if out is not None:
        data["output"]["dir"] = str(out)
    return config_from_dict(data)


def build_instance(cfg, channels=None):
    """Topology, channel and symbols for ``cfg.seed``.

    Three independent streams are spawned from the seed (placement,
    channel, symbols), so an imported channel leaves the symbol draw
    unchanged.
    """
    rng_top, rng_ch, rng_sym = spawn_rngs(cfg.seed, 3)
    if channels is None:
        t = cfg.topology
        top = build_topology(t.mode, t.L, t.K, t.N_l, t.M_k, b=t.b, radius=t.radius,
                             rng=rng_top)
        overrides = {(e.k, e.l): (e.rho_R, e.rho_T, e.gain) for e in cfg.channel.edges}
        missing = set(overrides) - top.edge_set
        if missing:
            raise InvalidParam(f"edge overrides not in the topology: {sorted(missing)}")
        channels = synthesize_channel(top, rng_ch, rho_max=cfg.channel.rho_max,
                                      gain_range=cfg.channel.gain_range,
                                      edge_params=overrides)
    s = draw_symbols(rng_sym, channels.topology, cfg.metric.symbols).s
    return channels, s


def _options(cfg, algorithm):
    a = cfg.algorithms
    if algorithm == "bp":
        return {"damping": a.damping}
    if algorithm == "amp":
        return {"damping": a.damping, "onsager_order": a.onsager_order,
                "first_round_onsager": a.amp_first_round_onsager}
    if algorithm == "ccoi":
        return {"damping": a.damping, "first_round_onsager": a.ccoi_first_round_onsager}
    return {"rho": a.admm_rho}


def run_config(cfg, channels=None):
    """Run every requested algorithm; returns ``(files, document)``.

    `files` maps file names to text; nothing is written here.
    """
    channels, s = build_instance(cfg, channels)
    top = channels.topology
    beta, sigma2, T = cfg.beta, cfg.metric.sigma2, cfg.algorithms.T
    x_star = oracle_precoder(channels, s, beta)
    files, traces, complexity = {}, [], {}
    tau = cfg.algorithms.tau
    for alg in cfg.algorithms.run:
        opts = _options(cfg, alg)
        one_off = None
        if alg == "ccoi":
            with track_factorizations() as fc:
                opts["statics"] = ccoi_precompute(channels, beta, T, cache=False)
            one_off = {"factorizations": fc.count,
                       "messages": ccoi_statics_messages(top, T)._asdict()}
        trace = run_experiment(alg, channels, s, beta, sigma2, T, oracle_x=x_star, **opts)
        files[f"{cfg.output.prefix}{alg}.csv"] = trace_to_csv(trace)
        traces.append(trace_dict(trace))
        entry = {"per_round_messages": trace.per_round._asdict(),
                 "per_round_factorizations": trace.factorizations[-1]}
        if one_off is not None:
            entry["statics"] = one_off
            entry["statics_amortized_per_realization"] = {
                "factorizations": jsonio.encode_float(one_off["factorizations"] / tau),
                "scalars": jsonio.encode_float(one_off["messages"]["scalars"] / tau),
            }
        complexity[alg] = entry
    doc = {
        "schema_version": jsonio.SCHEMA_VERSION, "kind": "Experiment",
        "seed": cfg.seed, "config": config_to_dict(cfg),
        "topology": top.to_dict(),
        "oracle_avg_throughput": jsonio.encode_float(avg_throughput(x_star, channels, s, sigma2)),
        "tau": tau, "complexity": complexity, "traces": traces,
    }
    files[f"{cfg.output.prefix}experiment.json"] = jsonio.dumps(doc)
    return files, doc


def _write(out_dir, files):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")


def _load(path):
    try:
        return parse_config(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _algorithms(text):
    return None if text is None else [a.strip() for a in text.split(",") if a.strip()]


def _seed_list(text):
    """``"0-9"``, ``"1,5,7"`` or a mix of both."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = (int(v) for v in part.split("-", 1))
            seeds.extend(range(lo, hi + 1))
        elif part:
            seeds.append(int(part))
    return seeds


def cmd_run(args):
    cfg = _with_overrides(_load(args.config), args.seed, _algorithms(args.algorithms), args.out)
    files, _ = run_config(cfg)
    _write(cfg.output.dir, files)
    print(f"wrote {len(files)} files to {cfg.output.dir}")


def _sweep_one(job):
    cfg_dict, out_dir = job
    cfg = config_from_dict(cfg_dict)
    files, doc = run_config(cfg)
    _write(out_dir, files)
    finals = {t["algorithm"]: float(t["avg_throughput"][-1].text) for t in doc["traces"]}
    return cfg.seed, float(doc["oracle_avg_throughput"].text), finals


def cmd_sweep(args):
    base_out = Path(args.out or "out")
    jobs = []
    for path in args.config:
        cfg = _with_overrides(_load(path), algorithms=_algorithms(args.algorithms))
        seeds = _seed_list(args.seeds) if args.seeds else (cfg.sweep.seeds or [cfg.seed])
        for seed in seeds:
            c = _with_overrides(cfg, seed=seed)
            jobs.append((config_to_dict(c), str(base_out / f"{Path(path).stem}_seed{seed}")))
    workers = args.workers or 1
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]

    algs = sorted({a for _, _, f in results for a in f})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "seed", "oracle", *algs])
    for (_, out_dir), (seed, oracle, finals) in zip(jobs, results):
        w.writerow([Path(out_dir).name, seed, repr(oracle),
                    *(repr(finals[a]) if a in finals else "" for a in algs)])
    means = [repr(float(np.mean([f[a] for _, _, f in results if a in f]))) for a in algs]
    w.writerow(["mean", "", repr(float(np.mean([o for _, o, _ in results]))), *means])
    _write(base_out, {"sweep_summary.csv": buf.getvalue()})
    print(f"ran {len(jobs)} experiments; summary in {base_out / 'sweep_summary.csv'}")


def cmd_export_channel(args):
    cfg = _with_overrides(_load(args.config), args.seed)
    channels, _ = build_instance(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(channel_to_json(channels), encoding="utf-8")
    print(f"wrote {out}")


def _read_channel(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidParam(f"cannot read channel {path}: {exc}") from None
    return channel_from_json(text)


def cmd_import_channel(args):
    cfg = _with_overrides(_load(args.config), args.seed, _algorithms(args.algorithms), args.out)
    files, _ = run_config(cfg, channels=_read_channel(args.channel))
    _write(cfg.output.dir, files)
    print(f"wrote {len(files)} files to {cfg.output.dir}")


def cmd_precompute_statics(args):
    cfg = _with_overrides(_load(args.config), args.seed)
    channels = _read_channel(args.channel) if args.channel else build_instance(cfg)[0]
    T_max = args.t_max or cfg.algorithms.T
    statics = ccoi_precompute(channels, cfg.beta, T_max, cache=False)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(statics_to_json(statics), encoding="utf-8")
    print(f"wrote {out}")


def build_parser():
    p = argparse.ArgumentParser(prog="coopbeam", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help):
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("run", help="run one experiment")
    common(sp, "output directory")
    sp.add_argument("--algorithms", help="comma-separated subset of bp,amp,ccoi,admm")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a seeds x configs grid")
    sp.add_argument("--config", required=True, nargs="+", help="one or more configs")
    sp.add_argument("--seeds", help='seed list such as "0-9" or "1,4,7"')
    sp.add_argument("--out", help="base output directory")
    sp.add_argument("--algorithms", help="comma-separated subset of bp,amp,ccoi,admm")
    sp.add_argument("--workers", type=int, default=1, help="parallel experiments")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("export-channel", help="write a ChannelSet JSON")
    common(sp, "output file")
    sp.set_defaults(func=cmd_export_channel, out_required=True)

    sp = sub.add_parser("import-channel", help="run on a ChannelSet JSON")
    common(sp, "output directory")
    sp.add_argument("--channel", required=True, help="ChannelSet JSON file")
    sp.add_argument("--algorithms", help="comma-separated subset of bp,amp,ccoi,admm")
    sp.set_defaults(func=cmd_import_channel)

    sp = sub.add_parser("precompute-statics", help="write CCoI statics JSON")
    common(sp, "output file")
    sp.add_argument("--channel", help="take statistics from this ChannelSet JSON")
    sp.add_argument("--t-max", type=int, help="number of statics steps (default: T)")
    sp.set_defaults(func=cmd_precompute_statics, out_required=True)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_required", False) and not args.out:
        parser.error(f"{args.command} requires --out")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CoopBeamError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
