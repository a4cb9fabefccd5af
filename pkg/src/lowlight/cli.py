"""Batch command-line front end.

Subcommands
-----------
synthesize  bright PNG -> degraded PNG plus A/t side-channel files
degrade     apply the forward model with saved A/t maps
enhance     invert the model, either from saved maps or by estimating
            them (dark channel -> light -> transmission -> refine)
evaluate    saliency maps vs ground-truth masks -> JSON report (+ CSV)
pr-export   write the mean PR curve as CSV
gradcheck   finite-difference check of the attention block gradients
consensus   annotator boxes JSON -> consensus regions JSON
split       retag a manifest into train/test with a seeded shuffle

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation or
invariant failure, 4 gradient-check failure.

Side-channel format: A and t are stored as single-channel PNGs (values
times 255, round-half-up) next to a JSON sidecar {"t_min": ..,
"alpha": ..} so degrade/enhance round trips are reproducible from disk.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attention import gradient_check
from .dataset import (BoundingBox, consensus_region, load_manifest,
                      save_manifest, split_manifest, split_summary,
                      synthesize_pair)
from .errors import DomainError
from .estimate import (DEFAULT_OMEGA, DEFAULT_RADIUS, DEFAULT_TOP_FRACTION,
                       RefineConfig, dark_channel, estimate_atmospheric_light,
                       init_transmission, refine_transmission)
from .grid import ImageGrid, load_png, save_png
from .lighting import (DEFAULT_T_MIN, AtmosphericLightMap, ScatterParams,
                       TransmissionMap, degrade, enhance)
from .metrics import (DEFAULT_BETA_SQ, DEFAULT_N_THRESHOLDS, binarize,
                      evaluate_dataset)

DEFAULT_ALPHA = 0.5
GRADCHECK_TOLERANCE = 1e-4

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_GRADCHECK = 4


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation; numeric defaults match the library's."""

    command: str
    input: str | None = None
    output: str | None = None
    pred_dir: str | None = None
    gt_dir: str | None = None
    a_map: str | None = None
    t_map: str | None = None
    sidecar: str | None = None
    pr_csv: str | None = None
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    t_min: float = DEFAULT_T_MIN
    omega: float = DEFAULT_OMEGA
    radius: int = DEFAULT_RADIUS
    t_smoothness: int = 8
    n_thresholds: int = DEFAULT_N_THRESHOLDS
    beta_sq: float = DEFAULT_BETA_SQ
    top_fraction: float = DEFAULT_TOP_FRACTION
    refine_lambda: float = 0.5
    refine_steps: int = 60
    refine_step_size: float = 0.2
    threshold: float = 0.8
    train_fraction: float = 0.8
    channels: int = 4
    size: int = 4
    jobs: int = 1
    tolerance: float = GRADCHECK_TOLERANCE


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lowlight", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("synthesize", help="degrade a bright image with random A and t")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-smoothness", type=int, default=8,
                   help="box-blur radius of the transmission field")
    p.add_argument("--t-min", type=float, default=DEFAULT_T_MIN)

    p = sub.add_parser("degrade", help="apply the forward model with saved maps")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--a-map", required=True)
    p.add_argument("--t-map", required=True)
    p.add_argument("--sidecar", help="JSON sidecar with t_min (else --t-min)")
    p.add_argument("--t-min", type=float, default=DEFAULT_T_MIN)

    p = sub.add_parser("enhance", help="invert the model (saved or estimated maps)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--a-map")
    p.add_argument("--t-map")
    p.add_argument("--sidecar")
    p.add_argument("--t-min", type=float, default=DEFAULT_T_MIN)
    p.add_argument("--omega", type=float, default=DEFAULT_OMEGA)
    p.add_argument("--radius", type=int, default=DEFAULT_RADIUS)
    p.add_argument("--top-fraction", type=float, default=DEFAULT_TOP_FRACTION)
    p.add_argument("--refine-lambda", type=float, default=0.5)
    p.add_argument("--refine-steps", type=int, default=60)
    p.add_argument("--refine-step-size", type=float, default=0.2)

    for name, help_text in (("evaluate", "score saliency maps, write a JSON report"),
                            ("pr-export", "write the mean PR curve as CSV")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--pred-dir", required=True)
        p.add_argument("--gt-dir", required=True)
        p.add_argument("--output", required=True)
        p.add_argument("--n-thresholds", type=int, default=DEFAULT_N_THRESHOLDS)
        p.add_argument("--beta-sq", type=float, default=DEFAULT_BETA_SQ)
        p.add_argument("--jobs", type=int, default=1)
        if name == "evaluate":
            p.add_argument("--pr-csv", help="also write the curve as CSV")

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--channels", type=int, default=4)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE)

    p = sub.add_parser("consensus", help="merge annotator boxes into regions")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--threshold", type=float, default=0.8)

    p = sub.add_parser("split", help="retag a manifest into train/test")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--train-fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if v is not None}
    return RunConfig(**fields)


# ---------------------------------------------------------------------------
# side-channel helpers
# ---------------------------------------------------------------------------

def _scalar_grid(values: np.ndarray) -> ImageGrid:
    return ImageGrid(values[:, :, None])


def _sidecar_paths(output: str) -> tuple[Path, Path, Path]:
    out = Path(output)
    stem = out.with_suffix("")
    return (stem.with_name(stem.name + ".a.png"),
            stem.with_name(stem.name + ".t.png"),
            stem.with_name(stem.name + ".meta.json"))


def _load_scalar_map(path: str) -> np.ndarray:
    grid = load_png(path)
    if grid.channels != 1:
        raise DomainError(f"{path} must be a single-channel PNG")
    return grid.data[:, :, 0]


def _load_maps(cfg: RunConfig) -> tuple[AtmosphericLightMap, TransmissionMap]:
    t_min = cfg.t_min
    if cfg.sidecar:
        with open(cfg.sidecar, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        t_min = float(meta["t_min"])
    a = AtmosphericLightMap(_load_scalar_map(cfg.a_map))
    # byte quantization can land just under the floor; restore the invariant
    t_vals = np.clip(_load_scalar_map(cfg.t_map), t_min, 1.0)
    t = TransmissionMap(t_vals, t_min=t_min)
    return a, t


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_synthesize(cfg: RunConfig) -> int:
    bright = load_png(cfg.input)
    params = ScatterParams(alpha=cfg.alpha, seed=cfg.seed)
    degraded, a, t = synthesize_pair(bright, params, cfg.t_smoothness,
                                     seed=cfg.seed + 1, t_min=cfg.t_min)
    save_png(degraded, cfg.output)
    a_path, t_path, meta_path = _sidecar_paths(cfg.output)
    save_png(_scalar_grid(a.values), a_path)
    save_png(_scalar_grid(t.values), t_path)
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump({"t_min": cfg.t_min, "alpha": cfg.alpha}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {cfg.output} (+ {a_path.name}, {t_path.name}, {meta_path.name})")
    return EXIT_OK


def _cmd_degrade(cfg: RunConfig) -> int:
    bright = load_png(cfg.input)
    a, t = _load_maps(cfg)
    save_png(degrade(bright, t, a), cfg.output)
    print(f"wrote {cfg.output}")
    return EXIT_OK


def _cmd_enhance(cfg: RunConfig) -> int:
    observed = load_png(cfg.input)
    if bool(cfg.a_map) != bool(cfg.t_map):
        raise DomainError("provide both --a-map and --t-map, or neither")
    if cfg.a_map and cfg.t_map:
        a, t = _load_maps(cfg)
    else:
        dc = dark_channel(observed, cfg.radius)
        a = estimate_atmospheric_light(observed, dc, cfg.top_fraction)
        t0 = init_transmission(observed, a, omega=cfg.omega,
                               radius=cfg.radius, t_min=cfg.t_min)
        refine_cfg = RefineConfig(lambda_smooth=cfg.refine_lambda,
                                  steps=cfg.refine_steps,
                                  step_size=cfg.refine_step_size)
        t = refine_transmission(t0, refine_cfg)
    save_png(enhance(observed, t, a), cfg.output)
    print(f"wrote {cfg.output}")
    return EXIT_OK


def _collect_pairs(cfg: RunConfig):
    pred_dir = Path(cfg.pred_dir)
    gt_dir = Path(cfg.gt_dir)
    names = sorted(p.name for p in pred_dir.glob("*.png"))
    if not names:
        raise DomainError(f"no PNG files in {pred_dir}")

    def load_one(name: str):
        s = load_png(pred_dir / name)
        gt = binarize(load_png(gt_dir / name), 0.5)
        return s, gt

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            pairs = list(pool.map(load_one, names))
    else:
        pairs = [load_one(n) for n in names]
    return names, pairs


def _write_pr_csv(curve, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,precision,recall\n")
        for t, p, r in curve.points():
            fh.write(f"{t:.6f},{p:.6f},{r:.6f}\n")


def _cmd_evaluate(cfg: RunConfig) -> int:
    names, pairs = _collect_pairs(cfg)
    report = evaluate_dataset(pairs, n_thresholds=cfg.n_thresholds,
                              beta_sq=cfg.beta_sq, ids=names,
                              jobs=cfg.jobs)
    doc = {
        "mae": report.mae,
        "max_f_beta": report.max_f_beta,
        "beta_sq": report.beta_sq,
        "n_images": len(pairs),
        "curve": [[t, p, r] for t, p, r in report.curve.points()],
    }
    with open(cfg.output, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    if cfg.pr_csv:
        _write_pr_csv(report.curve, cfg.pr_csv)
    print(f"mae={report.mae:.6f} max_f_beta={report.max_f_beta:.6f} "
          f"({len(pairs)} images) -> {cfg.output}")
    return EXIT_OK


def _cmd_pr_export(cfg: RunConfig) -> int:
    names, pairs = _collect_pairs(cfg)
    report = evaluate_dataset(pairs, n_thresholds=cfg.n_thresholds,
                              beta_sq=cfg.beta_sq, ids=names,
                              jobs=cfg.jobs)
    _write_pr_csv(report.curve, cfg.output)
    print(f"wrote {cfg.output} ({len(report.curve.thresholds)} thresholds)")
    return EXIT_OK


def _cmd_gradcheck(cfg: RunConfig) -> int:
    worst = gradient_check(channels=cfg.channels, size=cfg.size,
                           seed=cfg.seed)
    print(f"max relative error: {worst:.3e} (tolerance {cfg.tolerance:.1e})")
    if worst >= cfg.tolerance:
        print("gradient check FAILED", file=sys.stderr)
        return EXIT_GRADCHECK
    return EXIT_OK


def _cmd_consensus(cfg: RunConfig) -> int:
    with open(cfg.input, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    out_rows = []
    for rec in records:
        boxes = [BoundingBox(*entry["box"]) for entry in rec["boxes"]]
        region = consensus_region(boxes, threshold=cfg.threshold)
        out_rows.append({
            "image_id": rec["image_id"],
            "accepted": region is not None,
            "consensus": None if region is None else
                         [region.x, region.y, region.w, region.h],
        })
    with open(cfg.output, "w", encoding="utf-8") as fh:
        json.dump(out_rows, fh, indent=2)
        fh.write("\n")
    kept = sum(1 for r in out_rows if r["accepted"])
    print(f"{kept}/{len(out_rows)} objects kept -> {cfg.output}")
    return EXIT_OK


def _cmd_split(cfg: RunConfig) -> int:
    manifest = load_manifest(cfg.input)
    tagged = split_manifest(manifest, cfg.train_fraction, cfg.seed)
    save_manifest(tagged, cfg.output)
    summary = split_summary(tagged)
    for split, row in summary.items():
        stages = " ".join(f"{k}={v}" for k, v in row["stage"].items())
        types = " ".join(f"{k}={v}" for k, v in row["object_type"].items())
        print(f"{split}: {row['count']} entries | {stages} | {types}")
    return EXIT_OK


_COMMANDS = {
    "synthesize": _cmd_synthesize,
    "degrade": _cmd_degrade,
    "enhance": _cmd_enhance,
    "evaluate": _cmd_evaluate,
    "pr-export": _cmd_pr_export,
    "gradcheck": _cmd_gradcheck,
    "consensus": _cmd_consensus,
    "split": _cmd_split,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a parsed configuration; returns the process exit code."""
    return _COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args)
    try:
        return run(cfg)
    except OSError as exc:
        print(f"lowlight: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"lowlight: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
