"""Command-line interface: ``bindenoise <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import binmat
from .background import MonteCarlo
from .bind import DEFAULT_TAU, DENOISE_AXES, denoise, run_pipeline
from .detect import DEFAULT_GAMMA, greedy_rank1
from .evaluate import benchmark, jaccard
from .quantile_shift import all_weights
from .synth import N_REPLICATES, ScenarioSpec, full_grid, generate, replicates, truth_uv

DEFAULT_SEED = 1
FILTER_KEYS = {"size": "pattern_size", "k": "k", "pl": "p_l", "p": "background_cap", "p0": "p0"}


class CliError(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("BIND_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise CliError(f"BIND_SEED must be an integer, got {env!r}") from None


def parse_taus(text: str) -> List[float]:
    """Parse ``0,0.05..1`` style lists; ``a..b`` steps by ``a`` unless ``a..b:step``."""
    out: List[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo_s, _, rest = part.partition("..")
            hi_s, _, step_s = rest.partition(":")
            lo, hi = float(lo_s), float(hi_s)
            step = float(step_s) if step_s else lo
            if step <= 0:
                raise CliError(f"range {part!r} needs a positive step")
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            out.extend(round(lo + i * step, 10) for i in range(count))
        else:
            out.append(float(part))
    if not out or any(t < 0 for t in out):
        raise CliError(f"invalid tau list {text!r}")
    return sorted(set(out))


def parse_filter(text: Optional[str]):
    if not text:
        return lambda spec: True
    wanted = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in FILTER_KEYS:
            raise CliError(f"bad filter {item!r}; keys are {', '.join(FILTER_KEYS)}")
        wanted[FILTER_KEYS[key]] = float(value)
    return lambda spec: all(np.isclose(getattr(spec, f), v) for f, v in wanted.items())


def _mode(args) -> Optional[MonteCarlo]:
    if args.mode == "deterministic":
        return None
    return MonteCarlo(args.seed, args.samples)


def _load(args) -> binmat.BinaryMatrix:
    if not Path(args.input).is_file():
        raise CliError(f"input file not found: {args.input}")
    try:
        return binmat.load(args.input, args.format)
    except binmat.FormatError as exc:
        raise CliError(f"{args.input}: {exc}") from None


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def _header(args) -> str:
    return f"# bindenoise {args.command} seed={args.seed}\n"


# ---------------------------------------------------------------------------

def cmd_simulate(args):
    out = _outdir(args.output)
    if args.grid:
        grid = [s for s in full_grid(args.m, args.n) if parse_filter(args.filter)(s)]
        count = 0
        for base in grid:
            for spec in replicates(base, args.replicates):
                _write_scenario(out / "grid" / spec.scenario_id / f"rep{spec.seed}", spec)
                count += 1
        print(_header(args) + f"wrote {count} matrices for {len(grid)} scenarios under {out / 'grid'}")
    else:
        spec = ScenarioSpec(args.size, args.k, args.pl, args.p, args.p0, args.m, args.n,
                            args.low, args.seed)
        _write_scenario(out, spec)
        print(_header(args) + f"wrote {spec.scenario_id} to {out}")


def _write_scenario(where: Path, spec: ScenarioSpec):
    where.mkdir(parents=True, exist_ok=True)
    X, gt = generate(spec)
    binmat.save(X, where / "X.txt", "dense01")
    _write(where / "spec.txt", spec.to_text())
    _write(where / "truth.json", json.dumps(gt.to_json()) + "\n")


def _weights_csv(s_row, s_col, axis, row_ind=None, col_ind=None) -> str:
    lines = ["axis,index,raw,normalized" + (",selected" if row_ind is not None else "")]
    for vec, ind in ((s_row, row_ind), (s_col, col_ind)):
        if axis not in ("both", vec.axis):
            continue
        for i in range(len(vec)):
            line = f"{vec.axis},{i},{vec.raw[i]:.12g},{vec.normalized[i]:.12g}"
            if ind is not None:
                line += f",{int(ind[i])}"
            lines.append(line)
    return "\n".join(lines) + "\n"


def cmd_weights(args):
    X = _load(args)
    s_row, s_col = all_weights(X, _mode(args))
    text = _weights_csv(s_row, s_col, args.axis)
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)


def _denoise(args):
    X = _load(args)
    return X, denoise(X, args.tau, _mode(args), args.scale, args.axis)


def _write_denoise(out: Path, X, res, fmt):
    binmat.save(res.X_use, out / "X_use.txt", fmt)
    _write(out / "indicators.csv", _weights_csv(res.s_row, res.s_col, "both", res.row_ind, res.col_ind))
    summary = {
        "tau": res.tau, "scale": res.scale, "axis": res.axis, "degenerate": res.degenerate,
        "selected_rows": int(res.row_ind.sum()), "selected_cols": int(res.col_ind.sum()),
        "ones_before": X.total, "ones_after": res.X_use.total,
        "regions": res.regions.as_dict(X.row_labels, X.col_labels),
    }
    _write(out / "regions.json", json.dumps(summary, indent=1) + "\n")
    return summary


def cmd_denoise(args):
    X, res = _denoise(args)
    out = _outdir(args.output)
    fmt = args.out_format or ("dense01" if args.format == "ratings_csv" else args.format)
    s = _write_denoise(out, X, res, fmt)
    print(_header(args) + f"kept {s['ones_after']} of {s['ones_before']} ones "
          f"({s['selected_rows']} rows x {s['selected_cols']} cols)"
          + ("; nothing selected" if res.degenerate else ""))


def cmd_pipeline(args):
    X = _load(args)
    U, V, res = run_pipeline(X, greedy_rank1, args.k, args.tau, _mode(args), args.scale, args.axis,
                             gamma=args.gamma)
    out = _outdir(args.output)
    _write_denoise(out, X, res, "dense01")
    binmat.save(binmat.BinaryMatrix.from_array(U), out / "U.txt")
    if V.shape[0]:
        binmat.save(binmat.BinaryMatrix.from_array(V), out / "V.txt")
    else:
        _write(out / "V.txt", "")
    stats = {"k_found": int(U.shape[1]), "pattern_rows": [np.flatnonzero(U[:, l]).tolist() for l in range(U.shape[1])],
             "pattern_cols": [np.flatnonzero(V[l]).tolist() for l in range(V.shape[0])]}
    if args.truth:
        truth = Path(args.truth)
        if not truth.is_file():
            raise CliError(f"truth file not found: {truth}")
        uv = truth_uv(json.loads(truth.read_text(encoding="utf-8")))
        found = (U.astype(np.int64) @ V.astype(np.int64)) > 0
        raw_found = greedy_rank1(X, args.k, args.gamma).reconstruct()
        stats.update(recovery_jaccard=jaccard(found, uv), recovery_jaccard_raw=jaccard(raw_found, uv),
                     data_jaccard_before=jaccard(X, uv), data_jaccard_after=jaccard(res.X_use, uv))
    _write(out / "stats.json", json.dumps(stats, indent=1) + "\n")
    print(_header(args) + json.dumps({k: v for k, v in stats.items() if not k.startswith("pattern_")}))


def cmd_benchmark(args):
    taus = parse_taus(args.tau_sweep) if args.tau_sweep else parse_taus(args.tau)
    grid = [s for s in full_grid() if parse_filter(args.filter)(s)]
    if not grid:
        raise CliError("filter matched no scenario")
    rep = benchmark(grid, args.replicates, taus, detector=args.detector, gamma=args.gamma,
                    detect_tau=args.detect_tau, scale=args.scale, jobs=args.jobs)
    header = (f"# bindenoise benchmark scenarios={len(grid)} replicates={args.replicates} "
              f"seeds=1..{args.replicates} scale={args.scale}\n")
    table_tau = DEFAULT_TAU if DEFAULT_TAU in taus else taus[-1]
    table = rep.table1(tau=table_tau)
    summary = "".join(f"pooled_fold(tau={t:g})={rep.pooled_fold(t):.4f} "
                      f"mean_fold={rep.mean_fold(t):.4f}\n" for t in taus if t > 0)
    rec = rep.recovery()
    if rec:
        improved = sum(a > b for _, b, a in rec)
        summary += (f"detector recovery before={np.mean([b for _, b, _ in rec]):.4f} "
                    f"after={np.mean([a for *_, a in rec]):.4f} improved_runs={improved}/{len(rec)}\n")
    if rep.failures:
        summary += f"failed replicates: {len(rep.failures)}\n"
    if args.output:
        out = _outdir(args.output)
        _write(out / "report.csv", rep.to_csv())
        _write(out / "table1.txt", header + table)
        _write(out / "curve.txt", header + rep.curve_text())
        if rec:
            lines = ["scenario_id,seed,recovery_before,recovery_after"]
            lines += [f"{s.scenario_id},{s.seed},{b:.6f},{a:.6f}" for s, b, a in rec]
            _write(out / "recovery.csv", "\n".join(lines) + "\n")
    sys.stdout.write(header + table + "\n" + rep.curve_text() + summary)
    if rep.failures:
        return 1
    return 0


def cmd_partition(args):
    X = _load(args)
    res = denoise(X, args.tau, _mode(args), args.scale, args.axis)
    doc = {"users": X.m, "items": X.n, "ones": X.total, "tau": args.tau, "axis": args.axis,
           "regions": res.regions.as_dict(X.row_labels, X.col_labels)}
    text = json.dumps(doc, indent=1) + "\n"
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    lines = [_header(args).rstrip()]
    for label, r in zip("1234", res.regions.regions):
        lines.append(f"region {label}: {r.rows.size} users x {r.cols.size} items, "
                     f"ones={r.ones}, density={r.density:.4f}")
    print("\n".join(lines), file=sys.stderr)


# ---------------------------------------------------------------------------

def _add_input(p, default_format="dense01"):
    p.add_argument("--input", "-i", required=True, help="input matrix file")
    p.add_argument("--format", "-f", choices=binmat.FORMATS, default=default_format,
                   help="input format (default: %(default)s)")


def _add_mode(p):
    p.add_argument("--mode", choices=("deterministic", "monte_carlo"), default="deterministic",
                   help="background distribution: closed form or sampled (default: %(default)s)")
    p.add_argument("--samples", type=int, default=None,
                   help="Monte Carlo sample count (default: 10*max(m,n))")


def _add_threshold(p):
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="weight threshold (default: %(default)s)")
    p.add_argument("--axis", choices=DENOISE_AXES, default="both",
                   help="mask rows, columns or both (default: %(default)s)")
    p.add_argument("--scale", choices=("raw", "normalized"), default="raw",
                   help="threshold raw weights or weights divided by line length (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bindenoise", description=__doc__)
    parser.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: $BIND_SEED or {DEFAULT_SEED})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic matrices with ground truth")
    p.add_argument("--output", "-o", required=True, help="output directory")
    p.add_argument("--grid", action="store_true", help="write the full 108-scenario grid")
    p.add_argument("--replicates", type=int, default=N_REPLICATES, help="replicates per grid scenario (default: %(default)s)")
    p.add_argument("--filter", help="grid subset, e.g. size=15,k=1")
    p.add_argument("--size", type=int, default=15, help="pattern size (default: %(default)s)")
    p.add_argument("--k", type=int, default=1, help="number of patterns (default: %(default)s)")
    p.add_argument("--pl", type=float, default=1.0, help="pattern observation probability (default: %(default)s)")
    p.add_argument("--p", type=float, default=0.5, help="background cap, margins ~ U[low, p) (default: %(default)s)")
    p.add_argument("--low", type=float, default=0.1, help="background lower bound (default: %(default)s)")
    p.add_argument("--p0", type=float, default=0.0, help="flip rate (default: %(default)s)")
    p.add_argument("--m", type=int, default=100, help="rows (default: %(default)s)")
    p.add_argument("--n", type=int, default=100, help="columns (default: %(default)s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("weights", help="row/column quantile-shift weights as CSV")
    _add_input(p)
    p.add_argument("--axis", choices=DENOISE_AXES, default="both", help="which weights (default: %(default)s)")
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    _add_mode(p)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("denoise", help="mask background entries")
    _add_input(p)
    _add_threshold(p)
    _add_mode(p)
    p.add_argument("--output", "-o", required=True, help="output directory")
    p.add_argument("--out-format", choices=binmat.FORMATS, help="format of X_use (default: input format)")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("pipeline", help="denoise, then run the greedy detector")
    _add_input(p)
    _add_threshold(p)
    _add_mode(p)
    p.add_argument("--k", type=int, default=1, help="patterns to find (default: %(default)s)")
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="detector inclusion ratio (default: %(default)s)")
    p.add_argument("--truth", help="ground-truth JSON written by simulate")
    p.add_argument("--output", "-o", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("benchmark", help="before/after Jaccard over the simulation grid")
    p.add_argument("--filter", help="grid subset, e.g. size=15 or size=15,k=2")
    p.add_argument("--tau", default=str(DEFAULT_TAU), help="comma-separated taus (default: %(default)s)")
    p.add_argument("--tau-sweep", help="tau list with ranges, e.g. 0,0.05..1")
    p.add_argument("--replicates", type=int, default=N_REPLICATES, help="replicates per scenario (default: %(default)s)")
    p.add_argument("--scale", choices=("raw", "normalized"), default="raw", help="weight scale (default: %(default)s)")
    p.add_argument("--detector", action="store_true", help="also score greedy pattern recovery")
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="detector inclusion ratio (default: %(default)s)")
    p.add_argument("--detect-tau", type=float, default=DEFAULT_TAU, help="tau used before the detector (default: %(default)s)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: %(default)s)")
    p.add_argument("--output", "-o", help="directory for report.csv, table1.txt, curve.txt")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("partition", help="four-region split of a ratings file")
    _add_input(p, default_format="ratings_csv")
    _add_threshold(p)
    _add_mode(p)
    p.add_argument("--output", "-o", help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_partition)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args) or 0
    except (CliError, ValueError, OSError) as exc:
        print(f"bindenoise {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
