"""The idforge command line: generation pipeline and evaluation metrics.

Exit codes: 0 success, 1 validation/invariant failure, 2 usage error,
3 I/O error, 4 supply exhausted. Logs go to stderr; data goes to files or
stdout only, so commands stay pipeline-composable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, compose, embedstats, padmetrics, qualitygate
from .errors import Exhausted, IdforgeError, SchemaError
from .layout import load_layout, validate_layout
from .persona import (
    build_card_prompt,
    build_face_prompt,
    generate_face_attributes,
    generate_persona,
)

logger = logging.getLogger("idforge")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_EXHAUSTED = 4

PROFILE_ENV_VAR = "IDFORGE_PROFILE"


def _load_profile(flag_value: str | None) -> qualitygate.ThresholdProfile:
    """Threshold profile precedence: --profile flag > env var > builtin."""
    path = flag_value or os.environ.get(PROFILE_ENV_VAR)
    if path is None:
        return qualitygate.default_profile()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or not all(
            isinstance(k, str) and isinstance(v, (int, float)) for k, v in raw.items()):
        raise SchemaError(f"profile {path} must map measure names to minimums")
    return qualitygate.ThresholdProfile({k: float(v) for k, v in raw.items()})


def cmd_generate(args: argparse.Namespace) -> int:
    layout = load_layout(args.layout)
    profile = _load_profile(args.profile)

    reports, rejected_rows = qualitygate.read_ofiq_csv(args.ofiq_csv)
    for note in rejected_rows:
        logger.warning("rejected OFIQ row: %s", note)
    passed_ids, failed = qualitygate.filter_batch(reports, profile)
    logger.info("face gate: %d accepted, %d rejected", len(passed_ids), len(failed))

    accepted = set(passed_ids)
    faces = [(path, img) for path, img in compose.load_image_pool(args.faces_dir, to_rgba=True)
             if Path(path).name in accepted]
    signatures = compose.load_image_pool(args.signatures_dir, to_rgba=False)

    manifest = compose.generate_batch(args.seed, args.count, layout, faces,
                                      signatures, args.out, jobs=args.jobs)
    logger.info("wrote %d documents to %s", len(manifest.entries), args.out)
    return EXIT_OK


def cmd_pad_metrics(args: argparse.Namespace) -> int:
    records = padmetrics.read_scores_csv(args.scores, invert_polarity=args.invert_polarity)
    report = padmetrics.pad_report(records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "pad_report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    padmetrics.write_det_csv(padmetrics.det_curve(records), out / "det_curve.csv")
    logger.info("report written to %s", out)
    return EXIT_OK


def cmd_fid(args: argparse.Namespace) -> int:
    fa = embedstats.load_features(args.features_a)
    fb = embedstats.load_features(args.features_b)
    print(f"{embedstats.fid_from_features(fa, fb):.4f}")
    return EXIT_OK


def cmd_tsne(args: argparse.Namespace) -> int:
    fs = embedstats.load_features(args.features)
    cfg = embedstats.TsneConfig(perplexity=args.perplexity, iterations=args.iters,
                                seed=args.seed)
    embedding = embedstats.tsne(fs, cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for row in embedding:
            fh.write(f"{row[0]:.9g},{row[1]:.9g}\n")
    logger.info("embedding written to %s", args.out)
    return EXIT_OK


def cmd_det_export(args: argparse.Namespace) -> int:
    records = padmetrics.read_scores_csv(args.scores)
    points = padmetrics.det_curve(records)
    padmetrics.write_det_csv(points, args.out)
    if args.svg:
        Path(args.svg).write_text(padmetrics.det_svg(points), encoding="utf-8")
    logger.info("DET curve written to %s", args.out)
    return EXIT_OK


def cmd_validate_layout(args: argparse.Namespace) -> int:
    spec = load_layout(args.layout)
    problems = validate_layout(spec)
    if problems:
        for p in problems:
            print(p)
        return EXIT_VALIDATION
    print("OK")
    return EXIT_OK


def cmd_prompts(args: argparse.Namespace) -> int:
    if args.mode == "face":
        positive, negative = build_face_prompt(generate_face_attributes(args.seed))
        print(positive)
        print()
        print(negative)
    else:
        persona = generate_persona(args.seed, args.layout_profile)
        print(build_card_prompt(persona))
    return EXIT_OK


def cmd_embed(args: argparse.Namespace) -> int:
    fs = embedstats.embed_directory(args.images)
    embedstats.save_features(fs, args.out)
    logger.info("embedded %d images (d=%d) to %s", fs.n, fs.d, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idforge",
        description="Simulated bona fide ID-document generation and PAD evaluation.")
    parser.add_argument("--version", action="version", version=f"idforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="filter faces and compose a document batch")
    p.add_argument("--layout", required=True,
                   help="builtin template name (citizen/extranjero) or layout JSON path")
    p.add_argument("--seed", type=int, default=0, help="master seed for the batch")
    p.add_argument("--count", type=int, required=True, help="number of documents")
    p.add_argument("--faces-dir", required=True, help="directory of candidate face images")
    p.add_argument("--signatures-dir", required=True, help="directory of signature images")
    p.add_argument("--ofiq-csv", required=True, help="OFIQ measures CSV for the face pool")
    p.add_argument("--profile", default=None,
                   help=f"threshold profile JSON (overrides ${PROFILE_ENV_VAR} and builtin)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel compositing workers")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pad-metrics", help="EER/BPCER/APCER report from a score CSV")
    p.add_argument("--scores", required=True, help="CSV with id,true_class,score")
    p.add_argument("--invert-polarity", action="store_true",
                   help="negate scores (use when higher means more bona fide)")
    p.add_argument("--out", required=True, help="output directory for report + DET CSV")
    p.set_defaults(func=cmd_pad_metrics)

    p = sub.add_parser("fid", help="Frechet distance between two feature files")
    p.add_argument("--features-a", required=True)
    p.add_argument("--features-b", required=True)
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("tsne", help="2-D embedding of a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_tsne)

    p = sub.add_parser("det-export", help="DET curve CSV (and optional SVG)")
    p.add_argument("--scores", required=True, help="CSV with id,true_class,score")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--svg", default=None, help="also write an SVG plot here")
    p.set_defaults(func=cmd_det_export)

    p = sub.add_parser("validate-layout", help="check a layout against its invariants")
    p.add_argument("--layout", required=True)
    p.set_defaults(func=cmd_validate_layout)

    p = sub.add_parser("prompts", help="print generation prompts for a seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("face", "card"), required=True)
    p.add_argument("--layout-profile", choices=("citizen", "extranjero"),
                   default="citizen", help="persona profile for card prompts")
    p.set_defaults(func=cmd_prompts)

    p = sub.add_parser("embed", help="stub patch-histogram embeddings for a directory")
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True, help="output .fset path")
    p.set_defaults(func=cmd_embed)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exhausted as exc:
        logger.error("%s", exc)
        return EXIT_EXHAUSTED
    except (OSError, json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except IdforgeError as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
