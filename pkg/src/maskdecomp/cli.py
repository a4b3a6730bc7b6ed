"""Command-line interface: ``maskdecomp {extract,synth,eval,sweep}``.

Exit codes: 0 success, 1 usage or config error, 2 I/O error, 3 numerical
failure in at least one block.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from maskdecomp.basis import BasisFormatError, load_custom_subspace, make_dct_subspace, make_hadamard_subspace
from maskdecomp.evaluate import aggregate, confusion, metrics, write_report
from maskdecomp.imaging import SUPPORTED_SUFFIXES, ImageFormatError, load_image, save_mask
from maskdecomp.pipeline import RunConfig, extract
from maskdecomp.synth import SynthSpec, generate_corpus, write_corpus

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3
CONFIG_ECHO = "run_config.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# argparse dest -> RunConfig key
_SOLVER_FLAGS = {
    "lam": "lam",
    "kmax": "k_max",
    "k1": "k1",
    "k2": "k2",
    "threshold": "binarize_threshold",
    "strategy": "binarize_strategy",
    "seed": "seed",
    "ridge": "ridge",
    "intensity_scale": "intensity_scale",
}
_RUN_FLAGS = {"block_side": "block_side", "m1": "m1", "m2": "m2", "threads": "threads", "emit_relaxed": "emit_relaxed"}


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--config", type=Path, help="JSON file with RunConfig keys; flags override it")
    g.add_argument("--lambda", dest="lam", type=float, help="mask sparsity weight, 8-bit intensity units (default 300)")
    g.add_argument("--kmax", type=int, help="outer iterations (default 10)")
    g.add_argument("--k1", type=int, help="background sparsity (default 5)")
    g.add_argument("--k2", type=int, help="foreground sparsity (default 5)")
    g.add_argument("--block-side", type=int, help="block edge in pixels (default 64)")
    g.add_argument("--m1", type=int, help="DCT atoms (default 40)")
    g.add_argument("--m2", type=int, help="Hadamard atoms (default 10)")
    g.add_argument("--threshold", type=float, help="binarization threshold (default 0.5)")
    g.add_argument("--strategy", choices=["at-end", "per-iter"], help="when to binarize (default at-end)")
    g.add_argument("--seed", type=int, help="mask initialization seed (default 0)")
    g.add_argument("--ridge", type=float, help="fixed ridge; omit for the trace-relative default")
    g.add_argument("--intensity-scale", type=float, help="intensity range lambda refers to (default 255)")
    g.add_argument("--threads", type=int, help="worker threads (default 1)")
    g.add_argument("--emit-relaxed", action="store_true", default=None, help="also save the continuous mask and objective traces")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON: {exc}") from exc
    data = RunConfig.from_dict(data).to_dict() if data else RunConfig().to_dict()
    for dest, key in _SOLVER_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data["solver"][key] = value
    for dest, key in _RUN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    try:
        return RunConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _image_files(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.iterdir()
        if p.suffix.lower() in SUPPORTED_SUFFIXES and not p.stem.endswith(("_gt", "_relaxed"))
    )


def _write_config(config: RunConfig, path: Path) -> None:
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def _extract_one(src: Path, dst: Path, config: RunConfig) -> tuple[int, list[int]]:
    result = extract(load_image(src), config)
    save_mask(result.mask, dst)
    if config.emit_relaxed:
        save_mask(result.relaxed, dst.with_name(f"{dst.stem}_relaxed{dst.suffix}"))
        traces = {"blocks": result.n_blocks, "failed_blocks": result.failed_blocks, "objective_traces": result.traces}
        dst.with_name(f"{dst.stem}_traces.json").write_text(json.dumps(traces) + "\n")
    return result.n_blocks, result.failed_blocks


def cmd_extract(args) -> int:
    config = resolve_config(args)
    src, dst = Path(args.input), Path(args.output)
    if not src.exists():
        raise FileNotFoundError(f"input not found: {src}")
    t0 = time.perf_counter()
    if src.is_dir():
        dst.mkdir(parents=True, exist_ok=True)
        jobs = [(p, dst / p.name) for p in _image_files(src)]
        if not jobs:
            raise FileNotFoundError(f"no .pgm/.png images in {src}")
        echo = dst / CONFIG_ECHO
    else:
        if dst.suffix.lower() not in SUPPORTED_SUFFIXES:
            raise UsageError(f"output must end in .pgm or .png: {dst}")
        jobs = [(src, dst)]
        echo = dst.with_name(f"{dst.stem}.config.json")
    blocks, failed = 0, 0
    for s, d in jobs:
        nb, bad = _extract_one(s, d, config)
        blocks += nb
        failed += len(bad)
        for i in bad:
            print(f"warning: {s.name} block {i} failed numerically; marked background", file=sys.stderr)
    _write_config(config, echo)
    print(f"extracted {len(jobs)} image(s), {blocks} blocks, {failed} failed, {time.perf_counter() - t0:.2f}s")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SynthSpec(
            block_side=args.block_side,
            texture_atoms=args.texture_atoms,
            texture_amplitude=args.texture_amplitude,
            glyph_text=args.text,
            glyph_intensity=args.glyph_intensity,
            glyph_scale=args.glyph_scale,
            hard=args.hard,
            solver_m1=args.m1,
        )
        blocks = generate_corpus(spec, args.count, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.output)
    write_corpus(blocks, out)
    echo = {"count": args.count, "seed": args.seed, "template": asdict(spec)}
    (out / "synth_config.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(blocks)} blocks to {out}")
    return EXIT_OK


def pair_files(pred_dir: Path, truth_dir: Path) -> tuple[list[tuple[str, Path, Path]], list[str]]:
    """Match ``<id>.ext`` predictions with ``<id>_gt.ext`` (or ``<id>.ext``) truths."""
    truths = {
        p.stem.removesuffix("_gt"): p
        for p in sorted(truth_dir.iterdir())
        if p.suffix.lower() in SUPPORTED_SUFFIXES and p.stem.endswith("_gt")
    }
    if not truths:
        truths = {p.stem: p for p in _image_files(truth_dir)}
    preds = {p.stem: p for p in _image_files(pred_dir)}
    pairs = [(k, preds[k], truths[k]) for k in sorted(preds.keys() & truths.keys())]
    unpaired = sorted(preds.keys() ^ truths.keys())
    return pairs, unpaired


def _binary_pixels(path: Path) -> np.ndarray:
    return (load_image(path).pixels >= 0.5).astype(np.float64)


def evaluate_dirs(pred_dir: Path, truth_dir: Path):
    pairs, unpaired = pair_files(pred_dir, truth_dir)
    if unpaired:
        raise UsageError("unpaired files: " + ", ".join(unpaired))
    if not pairs:
        raise FileNotFoundError(f"no mask pairs found in {pred_dir} and {truth_dir}")
    rows = []
    for block_id, pred, truth in pairs:
        p, t = _binary_pixels(pred), _binary_pixels(truth)
        if p.shape != t.shape:
            raise UsageError(f"{block_id}: prediction and truth sizes differ")
        rows.append((block_id, confusion(p, t)))
    return rows


def cmd_eval(args) -> int:
    pred_dir, truth_dir = Path(args.pred), Path(args.truth)
    for d in (pred_dir, truth_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"not a directory: {d}")
    rows = evaluate_dirs(pred_dir, truth_dir)
    out = Path(args.out) if args.out else pred_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = write_report(rows, out / "metrics.csv", out / "summary.json")
    m = summary["macro"]
    print(f"macro precision={m['precision']:.4f} recall={m['recall']:.4f} f1={m['f1']:.4f} ({len(rows)} blocks)")
    return EXIT_OK


def _parse_list(text: str, cast):
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from exc


def sweep_corpus(corpus: Path, base: RunConfig, lambdas, thresholds, strategies) -> tuple[list[dict], int]:
    """Run the full pipeline per grid point; return the rows and the count of failed blocks."""
    pairs, _ = pair_files(corpus, corpus)
    if not pairs:
        raise FileNotFoundError(f"no image/ground-truth pairs in {corpus}")
    images = [(block_id, load_image(img), _binary_pixels(gt)) for block_id, img, gt in pairs]
    rows = []
    failed = 0
    for strategy in strategies:
        for lam in lambdas:
            for thr in thresholds:
                config = base.with_solver(lam=lam, binarize_threshold=thr, binarize_strategy=strategy)
                per_block, finals = [], []
                for _, image, truth in images:
                    res = extract(image, config)
                    failed += len(res.failed_blocks)
                    per_block.append(metrics(confusion((res.mask.pixels >= 0.5).astype(float), truth)))
                    finals += [t[-1] for t in res.traces if t]
                agg = aggregate(per_block)
                rows.append({
                    "lambda": lam,
                    "threshold": thr,
                    "strategy": strategy,
                    "precision": agg.precision,
                    "recall": agg.recall,
                    "f1": agg.f1,
                    "mean_objective": float(np.mean(finals)) if finals else float("nan"),
                })
    return rows, failed


def cmd_sweep(args) -> int:
    base = resolve_config(args)
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise FileNotFoundError(f"not a directory: {corpus}")
    rows, failed = sweep_corpus(
        corpus,
        base,
        _parse_list(args.lambdas, float),
        _parse_list(args.thresholds, float),
        _parse_list(args.strategies, str),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    _write_config(base, out.with_name(f"{out.stem}.config.json"))
    best = max(rows, key=lambda r: r["f1"])
    print(
        f"best: lambda={best['lambda']:g} threshold={best['threshold']:g} "
        f"strategy={best['strategy']} f1={best['f1']:.4f}"
    )
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_oracle(args) -> int:
    from maskdecomp.oracle import exhaustive_solve

    image = load_image(args.input)
    if image.width != image.height:
        raise UsageError("oracle input must be square")
    side = image.width
    try:
        P1 = load_custom_subspace(args.basis1, side) if args.basis1 else make_dct_subspace(side, args.m1)
        P2 = load_custom_subspace(args.basis2, side) if args.basis2 else make_hadamard_subspace(side, args.m2)
        res = exhaustive_solve(image.pixels, P1, P2, args.k1, args.k2, args.lam)
    except (ValueError, BasisFormatError) as exc:
        raise UsageError(str(exc)) from exc
    print(json.dumps({
        "best_mask": res.best_mask.values.astype(int).tolist(),
        "best_objective": res.best_objective,
        "evaluated": res.evaluated,
        "exact": res.exact,
    }))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maskdecomp", description="Segment overlaid text from textured images by masked decomposition.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser, metavar="{extract,synth,eval,sweep}"
    )

    p = sub.add_parser("extract", help="segment text from an image or a directory of images")
    p.add_argument("input", help="image file (.pgm/.png) or directory")
    p.add_argument("output", help="mask file, or directory when input is a directory")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="generate a synthetic text-on-texture corpus")
    p.add_argument("output", help="output directory")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--block-side", type=int, default=64)
    p.add_argument("--texture-atoms", type=int, default=4)
    p.add_argument("--texture-amplitude", type=float, default=0.15)
    p.add_argument("--text", default="TXT")
    p.add_argument("--glyph-intensity", type=float, default=0.1)
    p.add_argument("--glyph-scale", type=int, default=3)
    p.add_argument("--m1", type=int, default=40, help="solver DCT prefix the texture stays inside")
    p.add_argument("--hard", action="store_true", help="draw texture atoms outside the solver prefix")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("pred", help="directory of predicted masks")
    p.add_argument("truth", help="directory of ground-truth masks")
    p.add_argument("--out", help="report directory (default: pred)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="grid search lambda / threshold / strategy on a corpus")
    p.add_argument("corpus", help="directory written by `synth`")
    p.add_argument("--lambdas", default="300")
    p.add_argument("--thresholds", default="0.5")
    p.add_argument("--strategies", default="at-end,per-iter")
    p.add_argument("--out", default="sweep.csv")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    p.add_argument("input")
    p.add_argument("--basis1")
    p.add_argument("--basis2")
    p.add_argument("--m1", type=int, default=2)
    p.add_argument("--m2", type=int, default=2)
    p.add_argument("--k1", type=int, default=2)
    p.add_argument("--k2", type=int, default=2)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.set_defaults(func=cmd_oracle)
    # hide from the subcommand listing
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
