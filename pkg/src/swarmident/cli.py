"""Batch experiment driver.

Subcommands: run, resume, batch, analyze, presets. Exit codes: 0 ok,
1 runtime failure, 2 invalid configuration. Default worker count comes from
the SWARMIDENT_THREADS environment variable (1 if unset).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .analysis import (emergent_comparison, model_error,
                       post_evaluate_classifiers, sensor_occupancy)
from .baseline import run_metric_es
from .behaviors import (controller_to_json, effective_model_params,
                        model_controller, truth_controller, truth_vector)
from .classifier import classifier_net
from .coevolution import best_evaluated, run_coevolution
from .config import (ConfigError, ExperimentConfig, load_config, load_preset,
                     preset_names, save_config, with_overrides)
from .runlog import RunWriter, load_snapshot, resolve_workers
from .sim import initialize_world, run_trial, write_trajectory_csv
from .rng import derive_seed

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _summarize(cfg: ExperimentConfig, result) -> dict:
    best = best_evaluated(result.evaluated_models)
    n = cfg.world.sensor_state_count
    effective = effective_model_params(cfg.case_study, best.genome, n)
    truth = truth_vector(cfg)
    payload = {
        "case_study": cfg.case_study,
        "engine": cfg.engine,
        "seed": cfg.seed,
        "generations": len(result.summaries),
        "backend": _kernels.backend_name(),
        "best_model": {
            "genome": [float(v) for v in best.genome],
            "fitness": best.fitness,
            "effective_params": None if effective is None
            else [float(v) for v in effective],
            "controller": controller_to_json(
                model_controller(cfg.case_study, best.genome, n,
                                 cfg.model_hidden)),
        },
        "truth_params": None if truth is None else [float(v) for v in truth],
        "mae": None,
        "ae": None,
    }
    if effective is not None and truth is not None \
            and len(effective) == len(truth):
        err = model_error(effective, truth)
        payload["mae"] = err.mae
        payload["ae"] = [float(v) for v in err.ae]
    return payload


def _execute(cfg: ExperimentConfig, out_dir: Path, workers: int | None,
             snapshot_start=None, end_generation: int | None = None) -> dict:
    resume_from = None if snapshot_start is None else snapshot_start.generation
    writer = RunWriter(out_dir, cfg, cfg.model_genome_length(),
                       resume_from=resume_from)
    try:
        kwargs = {}
        start_gen = 0
        if snapshot_start is not None:
            start_gen = snapshot_start.generation
            kwargs["models"] = snapshot_start.models
        if cfg.engine == "metric":
            result = run_metric_es(cfg, writer, workers,
                                   start_generation=start_gen,
                                   end_generation=end_generation, **kwargs)
        else:
            if snapshot_start is not None:
                kwargs["classifiers"] = snapshot_start.classifiers
            result = run_coevolution(cfg, writer, workers,
                                     start_generation=start_gen,
                                     end_generation=end_generation, **kwargs)
        end = cfg.generations if end_generation is None else end_generation
        writer.write_final_state(result.models, result.classifiers, end)
        writer.write_final_evaluated(result.evaluated_models,
                                     result.evaluated_classifiers, end)
        summary = _summarize(cfg, result)
        writer.write_summary(summary)
        return summary
    finally:
        writer.close()


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.output) if args.output else Path(cfg.output_dir)
    summary = _execute(cfg, out_dir, args.workers)
    mae = summary.get("mae")
    print(f"run complete: {out_dir} "
          f"(mae={mae if mae is None else format(mae, '.4f')})")
    return EXIT_OK


def cmd_resume(args) -> int:
    snap = load_snapshot(args.snapshot)
    if args.config:
        cfg2 = load_config(args.config)
        if cfg2.config_hash() != snap.config_hash:
            raise ConfigError("config does not match the snapshot "
                              "(hash mismatch)")
    if args.generations < 0:
        raise ConfigError("--generations must be >= 0")
    if args.generations == 0:
        print("nothing to do")
        return EXIT_OK
    cfg = snap.config
    out_dir = Path(args.output) if args.output else Path(args.snapshot).parent
    end = snap.generation + args.generations
    _execute(cfg, out_dir, args.workers, snapshot_start=snap,
             end_generation=end)
    print(f"resumed {snap.generation} -> {end}: {out_dir}")
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = load_config(args.config)
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    base = Path(args.output) if args.output else Path(cfg.output_dir)
    base.mkdir(parents=True, exist_ok=True)
    rows = []
    param_count = None
    for i in range(args.runs):
        sub_dir = base / f"run_{i:03d}"
        sub = with_overrides(cfg, seed=cfg.seed + i, output_dir=str(sub_dir))
        try:
            summary = _execute(sub, sub_dir, args.workers)
            params = summary["best_model"]["effective_params"] \
                or summary["best_model"]["genome"]
            rows.append({"run": i, "seed": sub.seed, "status": "ok",
                         "mae": summary["mae"], "params": params,
                         "truth": summary["truth_params"]})
        except Exception as exc:  # noqa: BLE001 - batch keeps going
            reason = f"error: {exc}".replace(",", ";").replace("\n", " ")
            rows.append({"run": i, "seed": sub.seed, "status": reason,
                         "mae": None, "params": None, "truth": None})
        if rows[-1]["params"] is not None and param_count is None:
            param_count = len(rows[-1]["params"])

    param_count = param_count or 0
    with open(base / "batch_runs.csv", "w") as fh:
        header = ["run", "seed", "status", "mae"] + \
            [f"p{i}" for i in range(param_count)]
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [str(row["run"]), str(row["seed"]),
                     row["status"],
                     "" if row["mae"] is None else format(row["mae"], ".17g")]
            if row["params"] is None:
                cells += [""] * param_count
            else:
                cells += [format(float(v), ".17g") for v in row["params"]]
            fh.write(",".join(cells) + "\n")

    good = [r for r in rows if r["status"] == "ok" and r["truth"] is not None
            and r["params"] is not None
            and len(r["params"]) == len(r["truth"])]
    if good:
        ae = np.array([np.abs(np.array(r["params"]) - np.array(r["truth"]))
                       for r in good])
        with open(base / "batch_ae_stats.csv", "w") as fh:
            fh.write("param,ae_mean,ae_std\n")
            for i in range(ae.shape[1]):
                fh.write(f"p{i},{ae[:, i].mean():.17g},{ae[:, i].std():.17g}\n")
    failures = sum(1 for r in rows if r["status"] != "ok")
    print(f"batch complete: {len(rows) - failures}/{len(rows)} runs ok -> {base}")
    return EXIT_OK if failures < len(rows) else EXIT_RUNTIME


def _resolve_run_dir(path_str: str) -> Path:
    path = Path(path_str)
    if path.is_file():
        return path.parent
    return path


def cmd_analyze(args) -> int:
    run_dir = _resolve_run_dir(args.run)
    state_path = run_dir / "final_evaluated.json"
    if not state_path.exists():
        raise ConfigError(f"{state_path} not found; analyze needs a completed run")
    snap = load_snapshot(state_path)
    cfg = snap.config
    out_dir = Path(args.output) if args.output else run_dir / "analysis"
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = resolve_workers(args.workers)
    seed = args.seed if args.seed is not None else derive_seed(cfg.seed, "analysis")

    best = best_evaluated(snap.models)
    n = cfg.world.sensor_state_count
    effective = effective_model_params(cfg.case_study, best.genome, n)
    truth = truth_vector(cfg)

    if effective is not None and truth is not None \
            and len(effective) == len(truth):
        err = model_error(effective, truth)
        with open(out_dir / "param_ae.csv", "w") as fh:
            fh.write("param,ae\n")
            for i, v in enumerate(err.ae):
                fh.write(f"p{i},{v:.17g}\n")
        print(f"best-model MAE: {err.mae:.4f}")

    if args.grid:
        if snap.classifiers is None:
            raise ConfigError("run has no classifier population to post-evaluate")
        nets = [classifier_net(m.genome) for m in snap.classifiers.members]
        acc = post_evaluate_classifiers(nets, cfg, settings=args.grid,
                                        trials=args.grid_trials, seed=seed,
                                        workers=workers)
        with open(out_dir / "classifier_accuracy.csv", "w") as fh:
            fh.write("classifier,accuracy\n")
            for i, a in enumerate(acc):
                fh.write(f"{i},{a:.17g}\n")
        print(f"objectively-best classifier accuracy: {acc.max():.4f}")

    if args.dispersion:
        comp = emergent_comparison(cfg, best.genome, args.group_size,
                                   args.trials, args.duration, seed,
                                   workers=workers,
                                   measure_objects=cfg.case_study == "clustering")
        for name, disp, clus in (
                ("agents", comp.agent_dispersion, comp.agent_cluster),
                ("models", comp.model_dispersion, comp.model_cluster)):
            with open(out_dir / f"dispersion_{name}.csv", "w") as fh:
                fh.write("t,dispersion,cluster_fraction\n")
                for k, t in enumerate(comp.times):
                    fh.write(f"{t:.17g},{disp[:, k].mean():.17g},"
                             f"{clus[:, k].mean():.17g}\n")
        (out_dir / "dispersion_test.json").write_text(json.dumps({
            "p_value": comp.p_value,
            "agent_final_median": float(np.median(comp.agent_final)),
            "model_final_median": float(np.median(comp.model_final)),
        }, indent=2))
        print(f"emergent-behavior rank test p = {comp.p_value:.4f}")

    if args.occupancy:
        occ = sensor_occupancy(cfg.world, truth_controller(cfg),
                               args.trials, seed, workers=workers)
        with open(out_dir / "occupancy.csv", "w") as fh:
            fh.write("state,fraction\n")
            for i, v in enumerate(occ):
                fh.write(f"{i},{v:.17g}\n")
        print("sensor occupancy:", ", ".join(f"{v:.3f}" for v in occ))

    if args.dump_trajectory:
        world = initialize_world(cfg.world, seed)
        ctrl = truth_controller(cfg)
        traj, _ = run_trial(world, cfg.world, ctrl, ctrl)
        write_trajectory_csv(args.dump_trajectory, 0, traj, world.kinds)
        print(f"trajectory written to {args.dump_trajectory}")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.write:
        name, dest = args.write
        save_config(load_preset(name), dest)
        print(f"wrote {dest}")
        return EXIT_OK
    for name in preset_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmident",
        description="Identify swarm behaviors by coevolving models against "
                    "trajectory classifiers, or by a least-squares baseline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="override the config's output_dir")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.set_defaults(fn=cmd_run)

    p_res = sub.add_parser("resume", help="continue a run from a snapshot")
    p_res.add_argument("snapshot")
    p_res.add_argument("--generations", type=int, required=True,
                       help="additional generations to run")
    p_res.add_argument("--config", help="optional config to check against")
    p_res.add_argument("--output")
    p_res.add_argument("--workers", type=int, default=None)
    p_res.set_defaults(fn=cmd_resume)

    p_bat = sub.add_parser("batch", help="run seed+0..seed+N-1 and aggregate")
    p_bat.add_argument("config")
    p_bat.add_argument("--runs", type=int, required=True)
    p_bat.add_argument("--output")
    p_bat.add_argument("--workers", type=int, default=None)
    p_bat.set_defaults(fn=cmd_batch)

    p_ana = sub.add_parser("analyze", help="post-hoc analysis of a run")
    p_ana.add_argument("run", help="run directory (or its runlog.csv)")
    p_ana.add_argument("--grid", type=int, choices=(5, 11), default=None,
                       help="post-evaluate classifiers on a parameter grid")
    p_ana.add_argument("--grid-trials", type=int, default=10)
    p_ana.add_argument("--dispersion", action="store_true",
                       help="swarm-level validation of the best model")
    p_ana.add_argument("--occupancy", action="store_true",
                       help="sensor-state occupancy of the truth controller")
    p_ana.add_argument("--trials", type=int, default=30)
    p_ana.add_argument("--duration", type=float, default=400.0)
    p_ana.add_argument("--group-size", type=int, default=20)
    p_ana.add_argument("--seed", type=int, default=None)
    p_ana.add_argument("--dump-trajectory", metavar="FILE")
    p_ana.add_argument("--output")
    p_ana.add_argument("--workers", type=int, default=None)
    p_ana.set_defaults(fn=cmd_analyze)

    p_pre = sub.add_parser("presets", help="list or export bundled presets")
    p_pre.add_argument("--write", nargs=2, metavar=("NAME", "FILE"))
    p_pre.set_defaults(fn=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
