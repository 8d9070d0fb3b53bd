"""Command-line interface: ``mopadgan {gen-data,train,optimize,report}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import io, metrics, pipeline, plots
from .errors import MoPadGanError, TrainingDiverged
from .problems import BenchmarkId, make_cluster_data

log = logging.getLogger("mopadgan")


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _ref(text):
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from None
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("reference point needs two values")
    return vals


def _base_config(args):
    cfg = io.RunConfig()
    if getattr(args, "config", None):
        cfg = io.load_config(args.config)
    if getattr(args, "example", None):
        cfg = replace(cfg, benchmark=BenchmarkId.parse(args.example))
    return cfg


# -- gen-data ------------------------------------------------------------------

def cmd_gen_data(args):
    cfg = _base_config(args)
    data = cfg.data
    if args.n is not None:
        data = replace(data, n_points=args.n)
    if args.seed is not None:
        data = replace(data, seed=args.seed)
    points = make_cluster_data(data)
    io.write_dataset(args.out, points)
    print(f"wrote {len(points)} rows to {args.out}")
    return 0


# -- train ---------------------------------------------------------------------

def _train_config(args, cfg):
    tc = cfg.train
    updates = {
        "gamma0": args.gamma0, "gamma1_final": args.gamma1, "iterations": args.iters,
        "batch_size": args.batch, "seed": args.seed, "lr": args.lr,
        "schedule_steepness": args.schedule_steepness,
    }
    tc = replace(tc, **{k: v for k, v in updates.items() if v is not None})
    if args.realisticity:
        tc = replace(tc, realisticity_weighting=True)
    if args.saturating:
        tc = replace(tc, saturating=True)
    return tc


def cmd_train(args):
    cfg = _base_config(args)
    try:
        tc = _train_config(args, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.data:
        dataset = io.read_dataset(args.data)
    else:
        dataset = make_cluster_data(cfg.data)
    history_path = args.history or os.path.splitext(args.out)[0] + "_history.csv"
    try:
        state, history = pipeline.train_generator(cfg.benchmark, dataset, tc)
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 1
    io.save_checkpoint(args.out, io.Checkpoint.from_state(state, tc, cfg.benchmark, history))
    io.write_history(history_path, history)
    last = history.rows[-1] if history.rows else None
    print(f"trained {tc.iterations} iterations (gamma0={tc.gamma0}, gamma1={tc.gamma1_final}); "
          f"checkpoint {args.out}, history {history_path}")
    if last is not None:
        print(f"final d_loss={last.d_loss:.4f} g_adv_loss={last.g_adv_loss:.4f} "
              f"mean_quality={last.mean_quality:.4f}")
    return 0


# -- optimize --------------------------------------------------------------------

def cmd_optimize(args):
    cfg = _base_config(args)
    try:
        ckpt = io.load_checkpoint(args.ckpt)
    except (OSError, io.CheckpointError) as exc:
        print(f"error: cannot read checkpoint {args.ckpt}: {exc}", file=sys.stderr)
        return 1
    if args.example:
        bench = BenchmarkId.parse(args.example)
    elif ckpt.benchmark:
        bench = BenchmarkId.parse(ckpt.benchmark)
    else:
        bench = cfg.benchmark
    ms = cfg.mobo
    n_init = args.init if args.init is not None else ms.n_init
    n_iter = args.evals if args.evals is not None else ms.n_iter
    ref = args.ref if args.ref is not None else ms.ref
    n_seeds = args.seeds if args.seeds is not None else cfg.n_seeds
    n_cand = args.candidates if args.candidates is not None else ms.n_candidates
    mc = args.mc_samples if args.mc_samples is not None else ms.mc_samples
    os.makedirs(args.out, exist_ok=True)

    state = ckpt.to_state()
    problem = pipeline.latent_problem(state, bench)
    hv_rows, union_rows = [], []
    for seed in range(n_seeds):
        archive = pipeline.run_seeds(problem, [seed], n_init, n_iter, ref, n_cand, mc)[0]
        io.write_archive(os.path.join(args.out, f"archive_seed{seed}.csv"), archive)
        hv_rows += [(seed, r.eval_index, hv) for r, hv in zip(archive.records, archive.hv_history)]
        for i in archive.pareto:
            r = archive.records[i]
            union_rows.append([seed, r.eval_index, *r.z, *r.x, *r.f])
        log.info("seed %d: final hypervolume %.6f", seed, archive.hv_history[-1])
        print(f"seed {seed}: final hypervolume {archive.hv_history[-1]:.6f}")
    io.write_csv(os.path.join(args.out, "hv_history.csv"), ["seed", "eval_index", "hypervolume"], hv_rows)
    d, dx = problem.dim, problem.design_dim
    header = (["seed", "eval_index"] + [f"z{i + 1}" for i in range(d)]
              + [f"x{i + 1}" for i in range(dx)] + ["f1", "f2", "is_union_pareto"])
    if union_rows:
        f = np.array([row[-2:] for row in union_rows], dtype=np.float64)
        nd = set(pipeline.mobo.non_dominated(f))
        union_rows = [row + [i in nd] for i, row in enumerate(union_rows)]
    io.write_csv(os.path.join(args.out, "union_front.csv"), header, union_rows)
    with open(os.path.join(args.out, "run_meta.txt"), "w") as fh:
        fh.write(f"ckpt = {os.path.abspath(args.ckpt)}\nexample = {bench.value}\n"
                 f"n_init = {n_init}\nn_iter = {n_iter}\nseeds = {n_seeds}\n"
                 f"ref = {ref[0]!r},{ref[1]!r}\n")
    return 0


# -- report ------------------------------------------------------------------------

def _load_run(run_dir):
    if not os.path.isdir(run_dir):
        raise FileNotFoundError(f"run directory {run_dir} not found")
    names = sorted(n for n in os.listdir(run_dir) if n.startswith("archive_seed") and n.endswith(".csv"))
    if not names:
        raise FileNotFoundError(f"no archive_seed*.csv files in {run_dir}")
    archives = []
    for n in sorted(names, key=lambda s: int(s[len("archive_seed"):-4])):
        path = os.path.join(run_dir, n)
        try:
            archives.append(io.read_archive(path))
        except (ValueError, KeyError) as exc:
            raise ValueError(f"bad archive file {path}: {exc}") from exc
    meta = {}
    meta_path = os.path.join(run_dir, "run_meta.txt")
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = io.parse_config_text(fh.read())
    return archives, meta


def cmd_report(args):
    labels = args.labels or [os.path.basename(os.path.normpath(r)) for r in args.run]
    if len(labels) != len(args.run):
        raise UsageError("--labels needs one label per --run directory")
    try:
        data = io.read_dataset(args.data)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read dataset {args.data}: {exc}", file=sys.stderr)
        return 1
    runs = {}
    for label, run_dir in zip(labels, args.run):
        try:
            runs[label] = _load_run(run_dir)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    os.makedirs(args.out, exist_ok=True)
    data_spec = io.RunConfig().data
    centers = data_spec.centers()
    radius = args.radius if args.radius is not None else 2.0 * data_spec.cluster_std

    text, hv_hist, fronts, samples = [], {}, {}, {}
    bench = None
    for label, (archives, meta) in runs.items():
        lengths = {len(a["hypervolume"]) for a in archives}
        n = min(lengths)
        hv_hist[label] = np.array([a["hypervolume"][:n] for a in archives])
        fronts[label] = np.vstack([a["f"][a["is_pareto"]] for a in archives])
        designs = np.vstack([a["x"][a["is_pareto"]] for a in archives])
        designs = designs[np.all(np.isfinite(designs), axis=1)]
        novelty = np.array([metrics.novelty_indicator(x, data) for x in designs])
        prox, cov = float("nan"), -1
        if "example" in meta:
            bench = BenchmarkId.parse(meta["example"])
        ckpt_path = meta.get("ckpt")
        if ckpt_path and os.path.exists(str(ckpt_path)):
            state = io.load_checkpoint(str(ckpt_path)).to_state()
            pts = pipeline.sample_designs(state, args.n_samples)
            samples[label] = pts
            if bench is not None:
                prox = metrics.pareto_proximity(pts, bench, args.tol)
            cov = metrics.mode_coverage(pts, centers, radius)
        report = metrics.MetricReport(float(np.mean(hv_hist[label][:, -1])), prox, cov, novelty)
        text.append(report.to_text(prefix=f"{label}."))
        text.append(f"{label}.hypervolume_std = {float(np.std(hv_hist[label][:, -1]))!r}\n")
        text.append(f"{label}.n_runs = {len(archives)}\n")
    report_path = os.path.join(args.out, "metrics.txt")
    with open(report_path, "w") as fh:
        fh.write("".join(text))
    sys.stdout.write("".join(text))

    plots.hv_history_plot(os.path.join(args.out, "hv_history.svg"), hv_hist)
    plots.union_front_plot(os.path.join(args.out, "union_front.svg"), fronts)
    if samples:
        plots.samples_plot(os.path.join(args.out, "samples.svg"), data, samples,
                           bench if bench is not None else BenchmarkId.KNO1)
    return 0


# -- entry point ---------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="mopadgan", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="write a clustered synthetic dataset as CSV")
    g.add_argument("--example", choices=[b.value for b in BenchmarkId], required=True)
    g.add_argument("--n", type=_positive_int)
    g.add_argument("--seed", type=_nonneg_int)
    g.add_argument("--out", required=True)
    g.add_argument("--config")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train a GAN (gamma1 = 0) or MO-PaDGAN generator")
    t.add_argument("--config")
    t.add_argument("--example", choices=[b.value for b in BenchmarkId])
    t.add_argument("--gamma0", type=float)
    t.add_argument("--gamma1", type=float)
    t.add_argument("--iters", type=_nonneg_int)
    t.add_argument("--batch", type=_positive_int)
    t.add_argument("--seed", type=_nonneg_int)
    t.add_argument("--lr", type=float)
    t.add_argument("--schedule-steepness", type=float, dest="schedule_steepness")
    t.add_argument("--realisticity", action="store_true", help="weight quality by D(x)")
    t.add_argument("--saturating", action="store_true", help="use log(1 - D(G(z))) generator loss")
    t.add_argument("--data", help="dataset CSV (default: generate from config)")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--history", help="history CSV path (default: <out>_history.csv)")
    t.set_defaults(func=cmd_train)

    o = sub.add_parser("optimize", help="multi-objective BO over a generator's latent space")
    o.add_argument("--config")
    o.add_argument("--ckpt", required=True)
    o.add_argument("--example", choices=[b.value for b in BenchmarkId])
    o.add_argument("--evals", type=_nonneg_int, help="BO evaluations after the initial design")
    o.add_argument("--init", type=_positive_int, help="Latin hypercube initial points")
    o.add_argument("--seeds", type=_positive_int)
    o.add_argument("--ref", type=_ref)
    o.add_argument("--candidates", type=_positive_int)
    o.add_argument("--mc-samples", type=_positive_int, dest="mc_samples")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("report", help="metrics and SVG plots for one or more optimize runs")
    r.add_argument("--run", nargs="+", required=True)
    r.add_argument("--labels", nargs="+")
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--tol", type=float, default=0.05)
    r.add_argument("--radius", type=float)
    r.add_argument("--n-samples", type=_positive_int, default=1000, dest="n_samples")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mopadgan: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, MoPadGanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
