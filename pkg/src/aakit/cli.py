"""Command-line front end: ``aakit {fit,synth,hull,rsvd,bench}``.

Every JSON result embeds a run manifest.  With ``AAKIT_WORKERS=1`` wall-clock
fields are written as null (and reported on stderr instead) so that repeated
runs produce byte-identical files.
"""

import argparse
import csv
import itertools
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from aakit import _config, io, kernels, rng, synth
from aakit.aa import AAConfig, fit
from aakit.hull import approx_convex_hull, exact_curvature_2d, hausdorff_to_subhull
from aakit.linalg import ContractError, NumericError, spectral_norm
from aakit.pipeline import AAAConfig, ConfigError, explained_variance, fit_aaa, fit_svd_aa
from aakit.sketch import block_krylov_sketch, krylov_default_s

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

METRIC_FIELDS = ["method", "k", "p", "s", "M", "eta", "objective", "explained_variance", "T", "wall_ms"]
BENCH_FIELDS = ["cell", "repeat", "seed"] + METRIC_FIELDS + ["error"]


def build_id():
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    return f"aakit-{version}+{kernels.BACKEND}"


def _timed(value_ms):
    return None if _config.reproducible_mode() else value_ms


def manifest(command, params, seed, digest, timings):
    return {
        "command": command,
        "parameters": params,
        "seed": int(seed),
        "input_digest": digest,
        "timings": {k: _timed(v) for k, v in timings.items()},
        "workers": _config.worker_count(),
        "git_or_build_id": build_id(),
    }


def _dump_json(path, payload):
    text = json.dumps(payload, indent=1, sort_keys=True, allow_nan=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _report_timings(command, timings):
    parts = " ".join(f"{k}={v:.1f}" for k, v in timings.items())
    print(f"[aakit {command}] {parts}", file=sys.stderr)


def _seed(args):
    return _config.seed_override(args.seed)


def _load(args):
    x = io.read_matrix(args.input, header=args.header)
    return x, io.digest(x)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_metrics(path, row):
    out = sys.stdout if path in (None, "-") else Path(path).open("w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=METRIC_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerow({k: _fmt(row.get(k)) for k in METRIC_FIELDS})
    finally:
        if out is not sys.stdout:
            out.close()


def _run_method(x, method, k, seed, rank, krylov_s, projections, eta, tol, max_iter, variance_keep):
    """Fit one configuration; returns (payload dict, metrics row)."""
    aa_cfg = AAConfig(k=k, rel_tol=tol, max_outer_iters=max_iter, seed=seed)
    t0 = time.perf_counter()
    row = {"method": method, "k": k, "p": None, "s": None, "M": None, "eta": None, "T": None}
    if method == "exact":
        model = fit(x, x, aa_cfg)
        payload = {"model": model.to_dict()}
        objective = model.objective
    elif method == "svd":
        model = fit_svd_aa(x, k, variance_keep, aa_cfg, rank=rank)
        payload = {"model": model.to_dict()}
        objective = float(model.info["original_objective"])
        row["p"] = model.info["rank"]
    elif method == "aaa":
        cfg = AAAConfig(k=k, p=rank if rank is not None else 20, s=krylov_s, m=projections,
                        eta=eta, seed=seed, aa=aa_cfg)
        res = fit_aaa(x, cfg)
        model = res.model
        payload = res.to_dict(include_timings=not _config.reproducible_mode())
        objective = res.original_objective
        row.update(p=res.sketch.p, s=res.sketch.s, M=projections, eta=eta, T=int(res.support.indices.size))
    else:
        raise ContractError(f"unknown method {method!r}")
    wall = 1e3 * (time.perf_counter() - t0)
    row.update(objective=float(objective), explained_variance=explained_variance(x, model),
               wall_ms=_timed(wall))
    return payload, row, wall


def cmd_fit(args):
    try:
        x, digest = _load(args)
    except io.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    seed = _seed(args)
    params = {k: getattr(args, k) for k in
              ("method", "k", "rank", "krylov_s", "projections", "eta", "tol", "max_iter", "variance_keep")}
    try:
        payload, row, wall = _run_method(x, args.method, args.k, seed, args.rank, args.krylov_s,
                                         args.projections, args.eta, args.tol, args.max_iter,
                                         args.variance_keep)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload["metrics"] = row
    payload["manifest"] = manifest("fit", params, seed, digest, {"wall_ms": wall})
    _dump_json(args.out, payload)
    if args.metrics is not None:
        _write_metrics(args.metrics, row)
    _report_timings("fit", {"wall_ms": wall})
    return EXIT_OK


def _parse_profile(text):
    return np.array([float(v) for v in text.split(",")], dtype=np.float64)


def cmd_synth(args):
    seed = _seed(args)
    params = {k: getattr(args, k) for k in ("kind", "n", "d", "k", "rank", "noise", "profile")}
    truth = {}
    try:
        if args.kind == "polytope":
            x, vertices, slots = synth.polytope(args.n, args.d, args.k, args.noise, seed)
            truth = {"vertices": [c.tolist() for c in vertices.T], "vertex_index": [int(i) for i in slots]}
        elif args.kind == "lowrank-noise":
            x = synth.lowrank_noise(args.n, args.d, args.rank, args.noise, seed)
            truth = {"rank": args.rank}
        elif args.kind == "polygon2d":
            profile = _parse_profile(args.profile) if args.profile else synth.regular_profile(args.k)
            interior = max(0, args.n - profile.size)
            x, kappa = synth.polygon2d(profile, interior, seed)
            truth = {"kappa": [float(v) for v in kappa]}
        else:
            print(f"error: unknown kind {args.kind!r}", file=sys.stderr)
            return EXIT_INPUT
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.format == "bin":
        io.write_binary(args.out, x)
    else:
        io.write_csv(args.out, x, header=args.header)
    truth["manifest"] = manifest("synth", params, seed, io.digest(x), {})
    _dump_json(args.truth if args.truth else str(args.out) + ".json", truth)
    return EXIT_OK


def cmd_hull(args):
    try:
        x, digest = _load(args)
    except io.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    seed = _seed(args)
    t0 = time.perf_counter()
    try:
        support = approx_convex_hull(x, args.projections, args.eta, seed)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = {
        "T": [int(i) for i in support.indices],
        "eta": args.eta,
        "M": args.projections,
        "seed": seed,
        "cum_curvature_estimate": support.cum_curvature_estimate,
    }
    if args.hausdorff:
        out["hausdorff_estimate"] = hausdorff_to_subhull(x, support)
    if args.exact_2d and x.shape[0] == 2:
        out["exact_curvature"] = [float(v) for v in exact_curvature_2d(x)]
    wall = 1e3 * (time.perf_counter() - t0)
    params = {"projections": args.projections, "eta": args.eta, "hausdorff": args.hausdorff}
    out["manifest"] = manifest("hull", params, seed, digest, {"wall_ms": wall})
    _dump_json(args.out, out)
    _report_timings("hull", {"wall_ms": wall})
    return EXIT_OK


def cmd_rsvd(args):
    try:
        x, digest = _load(args)
    except io.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    seed = _seed(args)
    t0 = time.perf_counter()
    try:
        s = args.krylov_s
        if s is None:
            s = krylov_default_s(x.shape[1]) if args.log_base == "e" else max(2, int(np.ceil(np.log2(x.shape[1]))))
        sk = block_krylov_sketch(x, args.rank, s, seed)
    except (ContractError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    wall = 1e3 * (time.perf_counter() - t0)
    io.write_binary(args.out, sk.x_tilde)
    side = {
        "p": sk.p,
        "s": sk.s,
        "seed": sk.seed,
        "spectral_error_estimate": spectral_norm(x - sk.reconstruct()),
    }
    params = {"rank": args.rank, "krylov_s": args.krylov_s, "log_base": args.log_base}
    side["manifest"] = manifest("rsvd", params, seed, digest, {"wall_ms": wall})
    _dump_json(str(args.out) + ".json", side)
    _report_timings("rsvd", {"wall_ms": wall})
    return EXIT_OK


def _listify(v):
    return v if isinstance(v, list) else [v]


def _bench_data(spec, seed):
    data = spec["data"]
    if "input" in data:
        return io.read_matrix(data["input"], header=data.get("header", False))
    kind = data.get("kind", "polytope")
    if kind == "polytope":
        return synth.polytope(data["n"], data["d"], data["k"], data.get("noise", 0.0), seed)[0]
    if kind == "lowrank-noise":
        return synth.lowrank_noise(data["n"], data["d"], data["rank"], data.get("noise", 0.0), seed)
    raise ContractError(f"unknown data kind {kind!r}")


def cmd_bench(args):
    try:
        spec = json.loads(Path(args.spec).read_text())
    except (OSError, ValueError) as exc:
        print(f"error: cannot read sweep spec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    grid = spec.get("grid", {})
    axes = {
        "method": _listify(grid.get("method", ["aaa"])),
        "k": _listify(grid.get("k", [3])),
        "p": _listify(grid.get("p", [20])),
        "M": _listify(grid.get("M", [10_000])),
        "eta": _listify(grid.get("eta", [0.003])),
    }
    cells = list(itertools.product(*axes.values()))
    repeat = int(spec.get("repeat", 1))
    if not cells or repeat < 1 or "data" not in spec:
        print("error: empty grid", file=sys.stderr)
        return EXIT_INPUT
    base_seed = _config.seed_override(spec.get("seed", args.seed))
    tol = spec.get("tol", 1e-3)
    max_iter = spec.get("max_iter", 200)
    variance_keep = spec.get("variance_keep", 0.9999)

    rows = []
    for r in range(repeat):
        # repeats share data across cells so methods are compared on the same instance
        data_seed = rng.child_seed(base_seed, 0x44415441, r)
        try:
            x = _bench_data(spec, data_seed)
        except (io.InputError, ContractError, KeyError) as exc:
            print(f"error: bench data: {exc}", file=sys.stderr)
            return EXIT_INPUT
        for c, (method, k, p, m, eta) in enumerate(cells):
            seed = rng.child_seed(base_seed, c, r)
            row = {"cell": c, "repeat": r, "seed": seed, "method": method, "k": k, "p": p, "M": m,
                   "eta": eta, "error": ""}
            try:
                _, metrics, _ = _run_method(x, method, k, seed, p if method != "svd" else None, None,
                                            m, eta, tol, max_iter, variance_keep)
                row.update(metrics)
                row["error"] = ""
            except (ConfigError, ContractError, NumericError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)

    out = sys.stdout if args.out in (None, "-") else Path(args.out).open("w", newline="")
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in BENCH_FIELDS})
    finally:
        if out is not sys.stdout:
            out.close()
    if args.manifest:
        digest = io.digest(np.frombuffer(json.dumps(spec, sort_keys=True).encode(), dtype=np.uint8)[None, :])
        _dump_json(args.manifest, manifest("bench", spec, base_seed, digest, {}))
    ok = sum(1 for row in rows if not row["error"])
    return EXIT_OK if ok else 1


def _add_input(sp):
    sp.add_argument("--input", "-i", required=True, help="CSV (one observation per row) or AAKIT1 binary")
    sp.add_argument("--header", action="store_true", help="CSV has a header row")


def build_parser():
    ap = argparse.ArgumentParser(prog="aakit", description="Approximate archetypal analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit archetypes")
    _add_input(f)
    f.add_argument("--method", choices=["exact", "svd", "aaa"], default="aaa")
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--rank", type=int, default=None, help="sketch rank p (aaa) or SVD rank (svd)")
    f.add_argument("--krylov-s", type=int, default=None)
    f.add_argument("--projections", type=int, default=10_000)
    f.add_argument("--eta", type=float, default=0.003)
    f.add_argument("--tol", type=float, default=1e-3)
    f.add_argument("--max-iter", type=int, default=200)
    f.add_argument("--variance-keep", type=float, default=0.9999)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default="-")
    f.add_argument("--metrics", default=None, help="metrics CSV path")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("synth", help="generate synthetic data")
    s.add_argument("--kind", required=True, help="polytope, lowrank-noise or polygon2d")
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--d", type=int, default=20)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--rank", type=int, default=5)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--profile", default=None, help="comma-separated curvatures (polygon2d)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["csv", "bin"], default="csv")
    s.add_argument("--header", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--truth", default=None, help="ground-truth JSON path (default OUT.json)")
    s.set_defaults(func=cmd_synth)

    h = sub.add_parser("hull", help="approximate convex hull support")
    _add_input(h)
    h.add_argument("--projections", type=int, default=10_000)
    h.add_argument("--eta", type=float, default=0.003)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--hausdorff", action="store_true", help="also compute the Hausdorff estimate")
    h.add_argument("--exact-2d", action="store_true", help="include exact curvatures for 2-D input")
    h.add_argument("--out", default="-")
    h.set_defaults(func=cmd_hull)

    r = sub.add_parser("rsvd", help="block Krylov sketch")
    _add_input(r)
    r.add_argument("--rank", type=int, default=20)
    r.add_argument("--krylov-s", type=int, default=None)
    r.add_argument("--log-base", choices=["e", "2"], default="e", help="base for the default s")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_rsvd)

    b = sub.add_parser("bench", help="run a parameter sweep")
    b.add_argument("--spec", required=True, help="JSON sweep spec")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="-")
    b.add_argument("--manifest", default=None)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    _config.apply_worker_count()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
