"""Command-line front end: build systems, run experiments, emit CSV/JSON/SVG.

Subcommands: gamma (prefix-mean series), stab (stabilization report),
approx (approximation report), check (invariant suite).  All experiments
are driven by a JSON config file and a 64-bit seed; identical config plus
seed yields byte-identical CSV/JSON output.

Exit codes: 0 ok, 1 invariant failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import checks
from .approximation import (
    ApproximationReport,
    ClosedSet,
    TestFunction,
    make_transitive,
    map_mismatch_fraction,
    synthesize_permutation,
    thickening_measure_error,
    weak_star_error,
)
from .dynamics import FinitePermutation, gamma_series
from .rng import SplitMix64
from .stabilization import (
    common_stabilization_segment,
    stabilization_segment,
    stratified_start_points,
    sup_discrepancy,
)
from .systems import build_bernoulli, build_drift_system, build_rotation, grid_embedding, paper_observable

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    """12 significant digits, '.' decimal separator."""
    return format(float(x), ".12g")


# -- config resolution -----------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def _build_system(spec: dict):
    """Returns (permutation, embedding-or-None, meta dict)."""
    name = spec.get("name")
    if name == "drift":
        M = int(spec["M"])
        T, emb = build_drift_system(M)
        return T, emb, {"system": "drift", "M": M}
    if name == "rotation":
        M = int(spec["M"])
        t = spec["t"]
        if t == "1/sqrt2":
            t = float(1.0 / np.sqrt(2.0))
        elif t == "2/3":
            t = 2.0 / 3.0
        rot = build_rotation(M, float(t))
        return rot.permutation, rot.embedding, {
            "system": "rotation", "M": M, "P": rot.P, "t": rot.t, "defect": rot.defect,
        }
    if name == "bernoulli":
        sys_ = build_bernoulli(int(spec["m"]), int(spec["N"]), spec.get("mode", "debruijn"))
        return sys_.permutation, sys_.embedding, {
            "system": "bernoulli", "m": sys_.m, "N": sys_.N, "mode": sys_.mode, "M": sys_.M,
        }
    raise ConfigError(f"unknown system {name!r}")


def _build_observable(spec: dict, M: int):
    try:
        return paper_observable(spec["name"], M,
                                **{k: v for k, v in spec.items() if k != "name"})
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad observable spec: {e}") from e


def _resolve_start_points(spec: dict, M: int, seed: int) -> list[int]:
    if "explicit" in spec:
        pts = [int(y) for y in spec["explicit"]]
        if any(not 0 <= y < M for y in pts):
            raise ConfigError("explicit start point out of range")
        return pts
    if "random" in spec:
        rng = SplitMix64(seed)
        return rng.sample_points(M, int(spec["random"]))
    if "stratified" in spec:
        return stratified_start_points(M, int(spec["stratified"]),
                                       int(spec.get("extras", 0)), seed)
    raise ConfigError("start_points needs one of: explicit, random, stratified")


def _thread_count(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ERGODIA_THREADS")
    return max(1, int(env)) if env else 1


# -- output writers --------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_svg(path: Path, points: np.ndarray, k: float, title: str, timestamp: bool) -> None:
    """Self-contained scatter plot of (n/M, A_n); axes [0, k] x auto."""
    width, height, pad = 640, 480, 50
    ys = points[:, 2]
    ylo, yhi = float(np.min(ys)), float(np.max(ys))
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    span = yhi - ylo

    def sx(x):
        return pad + (x / k) * (width - 2 * pad)

    def sy(y):
        return height - pad - ((y - ylo) / span) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    if timestamp:
        import datetime

        parts.append(f"<!-- generated {datetime.datetime.now().isoformat()} -->")
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    parts.append(
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
    )
    parts.append(f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    parts.append(f'<text x="{pad}" y="{height - pad + 20}" font-size="11">0</text>')
    parts.append(f'<text x="{width - pad}" y="{height - pad + 20}" font-size="11">{_fmt(k)}</text>')
    parts.append(f'<text x="4" y="{height - pad}" font-size="11">{_fmt(ylo)}</text>')
    parts.append(f'<text x="4" y="{pad}" font-size="11">{_fmt(yhi)}</text>')
    for x, y in zip(points[:, 1], ys):
        parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(float(y)))}" r="1.2" fill="navy"/>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


# -- subcommands -----------------------------------------------------------


def cmd_gamma(config: dict, args) -> int:
    T, _, meta = _build_system(config.get("system", {}))
    F = _build_observable(config.get("observable", {}), T.size)
    seed = int(config.get("seed", args.seed or 0))
    starts = _resolve_start_points(config.get("start_points", {}), T.size, seed)
    gspec = config.get("gamma", {})
    k = float(gspec.get("k", 1.0))
    stride = gspec.get("stride")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def run_one(y: int):
        return y, gamma_series(F, T, y, k, stride)

    workers = _thread_count(args)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, starts))
    else:
        results = [run_one(y) for y in starts]

    for y, (points, used_stride) in results:
        base = out / f"gamma_{F.name.replace('/', '_')}_y{y}"
        _write_csv(base.with_suffix(".csv"), ["n", "n_over_M", "mean"],
                   ((int(n), float(x), float(a)) for n, x, a in points))
        if args.svg:
            _write_svg(base.with_suffix(".svg"), points, k,
                       f"Gamma series, y={y}, stride={used_stride}", timestamp=not args.no_timestamp)
    _write_json(out / "gamma_meta.json",
                {**meta, "observable": F.name, "k": k,
                 "stride": results[0][1][1] if results else None,
                 "start_points": starts, "seed": seed})
    return EXIT_OK


def cmd_stab(config: dict, args) -> int:
    T, _, meta = _build_system(config.get("system", {}))
    F = _build_observable(config.get("observable", {}), T.size)
    seed = int(config.get("seed", args.seed or 0))
    spec = config.get("stab", {})
    if "epsilon" not in spec or "eta" not in spec:
        raise ConfigError("stab config must pin epsilon and eta explicitly")
    eps = float(spec["epsilon"])
    eta = float(spec["eta"])
    n_min = int(spec.get("n_min", 1))
    scan_limit = int(spec.get("scan_limit", T.size))
    report: dict = {**meta, "observable": F.name, "epsilon": eps, "eta": eta,
                    "n_min": n_min, "scan_limit": scan_limit, "seed": seed}

    starts = _resolve_start_points(config.get("start_points", {"stratified": 100, "extras": 25}),
                                   T.size, seed)
    segments = []
    for y in starts[: int(spec.get("per_point_limit", 16))]:
        seg = stabilization_segment(F, T, y, n_min, eps, scan_limit)
        segments.append({"y": y, "K_star": seg.K_star, "witness": seg.witness,
                         "capped": seg.capped})
    report["per_point_segments"] = segments

    common = common_stabilization_segment(F, T, n_min, eps, eta, scan_limit, starts)
    report["common_segment"] = {
        "K_star": common.K_star, "witness": common.witness, "capped": common.capped,
        "excluded_fraction": common.excluded_fraction, "sample_size": len(starts),
    }

    pairs = []
    for K, L in spec.get("pairs", []):
        rep = sup_discrepancy(F, T, int(K), int(L))
        entry = {"K": int(K), "L": int(L), "sup_disc": rep.sup_disc}
        for e in spec.get("exceedance_epsilons", [eps]):
            entry[f"exceedance@{e}"] = rep.exceedance(float(e))
        pairs.append(entry)
    report["discrepancies"] = pairs

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "stab_report.json", report)
    return EXIT_OK


def _monomial_tests(degree: int = 3) -> list[TestFunction]:
    return [TestFunction(name=f"x^{d}", fn=lambda x, d=d: float(x) ** d,
                         integral=1.0 / (d + 1)) for d in range(degree + 1)]


def cmd_approx(config: dict, args) -> int:
    spec = config.get("approx", {})
    mode = spec.get("mode", "metrics")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = ApproximationReport()

    if mode == "metrics":
        T, emb, meta = _build_system(config.get("system", {}))
        if emb is None:
            raise ConfigError("metrics mode needs an embedded system")
        report.weak_star_errors = weak_star_error(emb, _monomial_tests(int(spec.get("degree", 3))))
        for iv in spec.get("closed_intervals", []):
            C = ClosedSet(kind="intervals", intervals=(tuple(iv),))
            eps = float(spec.get("thickening_epsilon", 2.0 / T.size))
            report.thickening_errors[tuple(iv)] = thickening_measure_error(emb, C, eps)
        target = spec.get("target")
        if target:
            tau = _target_map(target, meta)
            for eps in spec.get("mismatch_epsilons", [2.0 / T.size]):
                report.map_mismatch[eps] = map_mismatch_fraction(emb, T, tau, float(eps))
        report.cycle_lengths = [len(c) for c in T.cycles]
        _write_json(out / "approx_report.json", {**meta, **report.to_dict()})
        return EXIT_OK

    if mode == "pipeline":
        M = int(spec["M"])
        target = spec.get("target", {"name": "rotation", "t": 0.618033988749895})
        tau = _target_map(target, {"M": M})
        grid = np.arange(M) / M
        targets = np.asarray([tau(x) for x in grid])
        curve = []
        for delta in spec.get("deltas", [2.0 / M]):
            T_delta, mismatches = synthesize_permutation(M, targets, float(delta))
            C, B = make_transitive(T_delta)
            emb = grid_embedding(M)
            eps = float(spec.get("mismatch_epsilon", 10.0 * float(delta)))
            curve.append({
                "delta": float(delta),
                "matcher_mismatch_count": mismatches,
                "cycle_count_before_merge": len(T_delta.cycles),
                "transitivity_mismatch": len(B),
                "map_mismatch_fraction": map_mismatch_fraction(emb, C, tau, eps),
                "mismatch_epsilon": eps,
            })
        _write_json(out / "approx_report.json",
                    {"M": M, "target": target, "pipeline": curve})
        return EXIT_OK

    raise ConfigError(f"unknown approx mode {mode!r}")


def _target_map(spec: dict, meta: dict):
    name = spec.get("name")
    if name == "identity":
        return lambda x: x
    if name == "rotation":
        t = float(spec["t"])
        return lambda x: (x + t) % 1.0
    if name == "doubling":
        return lambda x: (2.0 * x) % 1.0
    raise ConfigError(f"unknown target map {name!r}")


def cmd_check(config: dict, args) -> int:
    fixture = None
    if config.get("fixtures", {}).get("permutation_image"):
        fixture = np.asarray(config["fixtures"]["permutation_image"], dtype=np.int64)
    results = checks.run_all(fixture)
    failed = [r for r in results if not r[1]]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    for name, ok, detail in failed:
        print(json.dumps({"invariant": name, "detail": detail}), file=sys.stderr)
    return EXIT_INVARIANT if failed else EXIT_OK


# -- entry point -----------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ergodia",
                                     description="finite ergodic-mean experiments")
    parser.add_argument("command", choices=["gamma", "stab", "approx", "check"])
    parser.add_argument("--config", required=False, help="JSON config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="64-bit seed override")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count (falls back to ERGODIA_THREADS)")
    parser.add_argument("--svg", action="store_true", help="also emit SVG plots")
    parser.add_argument("--no-timestamp", action="store_true",
                        help="suppress the timestamp comment in SVG output")
    parser.add_argument("--exact", action="store_true",
                        help="force exact rational arithmetic where supported")
    args = parser.parse_args(argv)

    try:
        config = _load_config(args.config) if args.config else {}
        if args.exact:
            config["arithmetic"] = "exact"
        if args.command == "gamma":
            return cmd_gamma(config, args)
        if args.command == "stab":
            return cmd_stab(config, args)
        if args.command == "approx":
            return cmd_approx(config, args)
        return cmd_check(config, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
