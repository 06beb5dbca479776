"""Command-line front end.

Subcommands: `atlas`, `gen-sbm`, `embed`, `train-eval`, `bench`,
`mmd-check`.  Every command is driven only by explicit flags and seeds;
reports embed their full configuration so any run can be reproduced
exactly from its output.  A key=value config file can pre-set any flag
(command-line flags win).  Exit codes: 0 success, 1 input error,
2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import KNOWN_COUNTS, canonical_values, load_or_build_atlas
from .classifier import TrainConfig, evaluate, train
from .datasets import (
    LabeledDataset,
    SbmSpec,
    generate_sbm,
    load_edge_list,
    load_tu_dataset,
    save_edge_list,
    split_indices,
)
from .embedding import (
    embed_dataset,
    exact_spectrum,
    run_concentration_trials,
    write_embeddings,
)
from .errors import InputError, InternalError
from .feature_maps import GAUSSIAN, GAUSSIAN_EIG, KINDS, MATCH, OPU, FeatureMapSpec, realize
from .graphs import Graph, induced_codes_batch, permute_graph
from .rng import RngStream
from .sampling import SamplerSpec, sample_subsets

GLOBAL_KEYS = {"seed", "out", "threads"}

HARDWARE_NOTE = (
    "optical hardware constant-time per-feature evaluation NOT reproduced; "
    "the simulated opu map scales like the gaussian map in software"
)


def _atomic_write(path, text: str) -> None:
    tmp = str(path) + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read_config(path) -> dict:
    cfg = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{ln}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            cfg[key.strip()] = val.strip()
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphlet-rf",
        description="Graphlet sampling and averaging with random-feature maps",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; results never depend on it")
    parser.add_argument("--config", default=None,
                        help="key=value file pre-setting any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("atlas", help="build and cache the k-graphlet atlas")
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("gen-sbm", help="generate a two-class SBM dataset")
    _add_sbm_flags(p)
    p.add_argument("--name", default=None, help="output file stem")

    p = sub.add_parser("embed", help="embed a dataset into feature vectors")
    _add_dataset_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--output", default="embeddings.csv")

    p = sub.add_parser("train-eval", help="embed, train, and report accuracy")
    _add_dataset_flags(p)
    _add_embedding_flags(p)
    p.add_argument("--exact-spectrum", action="store_true",
                   help="use exhaustive match histograms instead of sampling")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--report", default="report.txt")

    p = sub.add_parser("bench", help="per-subgraph timing across maps and k")
    p.add_argument("--k-list", default="4,5,6,7")
    p.add_argument("--maps", default="match,gaussian,gaussian_eig,opu")
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--sigma2", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--batch", type=int, default=200)
    p.add_argument("--output", default="bench.csv")

    p = sub.add_parser("mmd-check", help="empirical concentration of the MMD estimate")
    _add_sbm_flags(p)
    p.add_argument("--map", dest="map_kind", choices=KINDS, default=GAUSSIAN)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--m", type=int, default=4096)
    p.add_argument("--sigma2", type=float, default=0.01)
    p.add_argument("--s", type=int, default=4096)
    p.add_argument("--sampler", choices=["uniform", "rw"], default="uniform")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--permuted-pair", action="store_true",
                   help="compare a graph against a relabeled copy (true MMD = 0)")
    p.add_argument("--report", default="mmd_check.txt")
    return parser


def _add_sbm_flags(p) -> None:
    p.add_argument("--n-graphs", type=int, default=300)
    p.add_argument("--v", type=int, default=60)
    p.add_argument("--communities", type=int, default=6)
    p.add_argument("--degree", type=float, default=10.0)
    p.add_argument("--p-in1", type=float, default=0.3)
    p.add_argument("--r", type=float, default=1.1)


def _add_dataset_flags(p) -> None:
    p.add_argument("--dataset", default=None, help="edge-list dataset file")
    p.add_argument("--tu", default=None, help="TU-format dataset directory")
    p.add_argument("--sbm", action="store_true", help="generate an SBM dataset inline")
    _add_sbm_flags(p)


def _add_embedding_flags(p) -> None:
    p.add_argument("--map", dest="map_kind", choices=KINDS, default=OPU)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--sigma2", type=float, default=0.01)
    p.add_argument("--sampler", choices=["uniform", "rw"], default="uniform")
    p.add_argument("--s", type=int, default=500)


def _sbm_spec_from_args(args) -> SbmSpec:
    return SbmSpec(
        n_graphs=args.n_graphs, v=args.v, communities=args.communities,
        expected_degree=args.degree, p_in_1=args.p_in1, r=args.r, seed=args.seed,
    )


def _load_dataset(args) -> LabeledDataset:
    sources = [args.dataset is not None, args.tu is not None, args.sbm]
    if sum(sources) != 1:
        raise InputError("choose exactly one of --dataset, --tu, --sbm")
    if args.dataset is not None:
        return load_edge_list(args.dataset)
    if args.tu is not None:
        return load_tu_dataset(args.tu)
    return generate_sbm(_sbm_spec_from_args(args))


def _realize_from_args(args, out_dir):
    atlas = None
    m = args.m
    if args.map_kind == MATCH:
        atlas = load_or_build_atlas(args.k, out_dir)
        m = len(atlas)
    spec = FeatureMapSpec(args.map_kind, args.k, m, sigma2=args.sigma2,
                          seed=args.seed)
    return realize(spec, atlas=atlas), spec


def cmd_atlas(args) -> int:
    if args.k == 7:
        print(f"building the k=7 atlas ({KNOWN_COUNTS[7]} classes); this may take "
              "a few seconds", file=sys.stderr)
    t0 = time.perf_counter()
    atlas = load_or_build_atlas(args.k, args.out)
    dt = time.perf_counter() - t0
    print(f"N_{args.k} = {len(atlas)}")
    print(f"cache: {Path(args.out) / f'atlas_k{args.k}.bin'} ({dt:.2f}s)",
          file=sys.stderr)
    return 0


def cmd_gen_sbm(args) -> int:
    spec = _sbm_spec_from_args(args)
    dataset = generate_sbm(spec)
    name = args.name or f"sbm_r{spec.r}_seed{spec.seed}"
    path = Path(args.out) / f"{name}.edges"
    Path(args.out).mkdir(parents=True, exist_ok=True)
    save_edge_list(dataset, path)
    print(f"wrote {len(dataset)} graphs to {path}")
    return 0


def _embed_matrix(dataset, args, out_dir):
    rmap, spec = _realize_from_args(args, out_dir)
    sampler = SamplerSpec(kind=args.sampler, k=args.k)
    rng = RngStream(args.seed, stream=1)
    X, kept = embed_dataset(dataset.graphs, sampler, rmap, args.s, rng)
    labels = [dataset.labels[i] for i in kept]
    meta = {
        "map": spec.kind, "k": spec.k, "m": spec.m, "sigma2": spec.sigma2,
        "map_seed": spec.seed, "sampler": sampler.kind, "s": args.s,
        "dataset_seed": args.seed, "dataset": dataset.provenance,
        "skipped": len(dataset) - len(kept),
    }
    return X, kept, labels, meta


def cmd_embed(args) -> int:
    dataset = _load_dataset(args)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    X, kept, labels, meta = _embed_matrix(dataset, args, args.out)
    path = Path(args.out) / args.output
    write_embeddings(path, kept, labels, X, meta)
    print(f"wrote {X.shape[0]} x {X.shape[1]} embeddings to {path}"
          f" ({meta['skipped']} graphs skipped)")
    return 0


def _exact_embed_matrix(dataset, args, out_dir):
    atlas = load_or_build_atlas(args.k, out_dir)
    rows, kept = [], []
    for i, g in enumerate(dataset.graphs):
        if g.v < args.k:
            continue
        rows.append(exact_spectrum(g, atlas, graph_id=i).values)
        kept.append(i)
    labels = [dataset.labels[i] for i in kept]
    return np.vstack(rows), kept, labels


def cmd_train_eval(args) -> int:
    if args.map_kind == MATCH and args.k >= 7 and not args.exact_spectrum:
        print(f"warning: match map at k={args.k} canonicalizes "
              f"{math.factorial(args.k)} permutations per unseen subgraph; "
              "expect long runtimes", file=sys.stderr)
    dataset = _load_dataset(args)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    accs = []
    rows = []
    for rep in range(args.repetitions):
        rep_seed = args.seed + rep
        rep_args = argparse.Namespace(**vars(args))
        rep_args.seed = rep_seed
        t0 = time.perf_counter()
        if args.exact_spectrum:
            X, kept, labels = _exact_embed_matrix(dataset, rep_args, args.out)
        else:
            X, kept, labels, _ = _embed_matrix(dataset, rep_args, args.out)
        tr_idx, te_idx = split_indices(labels, args.train_fraction, seed=rep_seed)
        config = TrainConfig(lam=args.lam, epochs=args.epochs, seed=rep_seed)
        model = train(X[tr_idx], [labels[i] for i in tr_idx], config)
        acc = evaluate(model, X[te_idx], [labels[i] for i in te_idx])
        dt = time.perf_counter() - t0
        accs.append(acc)
        rows.append(f"{rep},{rep_seed},{acc:.17g},{dt:.3f}")
    mean = float(np.mean(accs))
    std = float(np.std(accs))
    header = [
        f"command=train-eval", f"map={args.map_kind}", f"k={args.k}",
        f"m={args.m}", f"sigma2={args.sigma2}", f"sampler={args.sampler}",
        f"s={args.s}", f"exact_spectrum={int(args.exact_spectrum)}",
        f"train_fraction={args.train_fraction}",
        f"lam={'' if args.lam is None else args.lam}", f"epochs={args.epochs}",
        f"seed={args.seed}", f"repetitions={args.repetitions}",
        f"dataset={dataset.provenance}",
        f"accuracy_mean={mean:.17g}", f"accuracy_std={std:.17g}",
        "", "rep,seed,accuracy,wallclock_s",
    ]
    report = "\n".join(header + rows) + "\n"
    path = Path(args.out) / args.report
    _atomic_write(path, report)
    print(f"accuracy = {mean:.4f} +- {std:.4f} over {args.repetitions} repetitions")
    print(f"report: {path}")
    return 0


def cmd_bench(args) -> int:
    k_list = [int(t) for t in args.k_list.split(",") if t]
    maps = [t.strip() for t in args.maps.split(",") if t.strip()]
    for mk in maps:
        if mk not in KINDS:
            raise InputError(f"unknown map kind {mk!r}")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    rng = RngStream(args.seed, stream=7)
    lines = [f"# {HARDWARE_NOTE}", "map,k,median_ns,p10_ns,p90_ns"]
    results = []
    for k in k_list:
        # one fixed random graph per k keeps sampling cost identical across maps
        spec = SbmSpec(n_graphs=2, v=60, seed=args.seed)
        g = generate_sbm(spec).graphs[0]
        sampler = SamplerSpec(kind="uniform", k=k)
        for mk in maps:
            per_ns = _bench_one(g, sampler, mk, k, args, rng)
            med, p10, p90 = (float(np.percentile(per_ns, q)) for q in (50, 10, 90))
            lines.append(f"{mk},{k},{med:.1f},{p10:.1f},{p90:.1f}")
            results.append((mk, k, med))
    path = Path(args.out) / args.output
    _atomic_write(path, "\n".join(lines) + "\n")
    for mk, k, med in results:
        print(f"{mk:12s} k={k}  {med:12.1f} ns/subgraph")
    print(f"note: {HARDWARE_NOTE}")
    print(f"table: {path}")
    return 0


def _bench_one(g, sampler, map_kind, k, args, rng) -> np.ndarray:
    from .feature_maps import phi_gaussian, phi_opu_sim
    from .graphs import induced_adjacency_batch

    atlas = load_or_build_atlas(k, args.out) if map_kind == MATCH else None
    m = len(atlas) if map_kind == MATCH else args.m
    spec = FeatureMapSpec(map_kind, k, m, sigma2=args.sigma2
                          if map_kind in (GAUSSIAN, GAUSSIAN_EIG) else 0.01,
                          seed=args.seed)
    rmap = realize(spec, atlas=atlas)
    per_ns = []
    for trial in range(args.trials + 1):  # first iteration is warm-up
        nodes = sample_subsets(g, sampler, args.batch, rng)
        codes = induced_codes_batch(g, nodes)
        t0 = time.perf_counter_ns()
        if map_kind == MATCH:
            canon = canonical_values(k, codes)  # no memoization: raw per-subgraph cost
            for c in canon.tolist():
                atlas._index[c]
        elif map_kind == GAUSSIAN_EIG:
            from .feature_maps import jacobi_eigenvalues
            from .graphs import GraphletCode

            lams = np.stack([
                jacobi_eigenvalues(GraphletCode(k, int(c)).adjacency())
                for c in codes
            ])
            phi_gaussian(rmap, lams)
        else:
            x = induced_adjacency_batch(g, nodes).reshape(len(nodes), -1)
            if map_kind == GAUSSIAN:
                phi_gaussian(rmap, x)
            else:
                phi_opu_sim(rmap, x)
        dt = time.perf_counter_ns() - t0
        if trial > 0:
            per_ns.append(dt / args.batch)
    return np.array(per_ns)


def cmd_mmd_check(args) -> int:
    spec = _sbm_spec_from_args(args)
    ds = generate_sbm(replace(spec, n_graphs=2))
    g1 = ds.graphs[0]
    if args.permuted_pair:
        perm_rng = RngStream(args.seed, stream=11)
        perm = np.argsort(perm_rng.uniform(g1.v))
        g2 = permute_graph(g1, perm)
    else:
        g2 = ds.graphs[1]
    atlas = load_or_build_atlas(args.k, args.out) if args.map_kind == MATCH else None
    m = len(atlas) if args.map_kind == MATCH else args.m
    map_spec = FeatureMapSpec(args.map_kind, args.k, m, sigma2=args.sigma2,
                              seed=args.seed)
    sampler = SamplerSpec(kind=args.sampler, k=args.k)
    rng = RngStream(args.seed, stream=13)
    report = run_concentration_trials(
        g1, g2, sampler, map_spec, args.s, args.delta, args.trials, rng, atlas=atlas,
    )
    Path(args.out).mkdir(parents=True, exist_ok=True)
    lines = [
        f"command=mmd-check", f"map={args.map_kind}", f"k={args.k}", f"m={report.m}",
        f"s={report.s}", f"delta={report.delta}", f"trials={report.trials}",
        f"sampler={args.sampler}", f"seed={args.seed}",
        f"permuted_pair={int(args.permuted_pair)}", f"r={args.r}",
        f"feature_bound={report.feature_bound:.17g}",
        f"bound={report.bound:.17g}", f"mmd_ref={report.mmd_ref:.17g}",
        f"violation_rate={report.violation_rate:.17g}",
        f"median_deviation={report.median_deviation:.17g}",
        "", "trial,distance_sq,deviation",
    ]
    for t, (d, dev) in enumerate(zip(report.distances, report.deviations)):
        lines.append(f"{t},{d:.17g},{dev:.17g}")
    path = Path(args.out) / args.report
    _atomic_write(path, "\n".join(lines) + "\n")
    print(f"violation_rate = {report.violation_rate:.3f} "
          f"(bound {report.bound:.4f}, {report.trials} trials)")
    print(f"report: {path}")
    return 0


_COMMANDS = {
    "atlas": cmd_atlas,
    "gen-sbm": cmd_gen_sbm,
    "embed": cmd_embed,
    "train-eval": cmd_train_eval,
    "bench": cmd_bench,
    "mmd-check": cmd_mmd_check,
}


def _inject_config(argv: list[str]) -> list[str]:
    """Turn config-file entries into flags placed before the user's flags."""
    if "--config" not in " ".join(argv):
        return argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    cfg = _read_config(known.config)
    cmd_pos = next((i for i, a in enumerate(argv) if a in _COMMANDS), None)
    if cmd_pos is None:
        return argv
    global_tokens = [f"--{k}={v}" for k, v in cfg.items() if k in GLOBAL_KEYS]
    sub_tokens = [f"--{k.replace('_', '-')}={v}" for k, v in cfg.items()
                  if k not in GLOBAL_KEYS]
    return global_tokens + argv[: cmd_pos + 1] + sub_tokens + argv[cmd_pos + 1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _inject_config(argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
