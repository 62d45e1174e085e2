"""ISO/IEC 30107-3 detection metrics over score records.

Scores follow the convention "higher means more attack-like"; a record is
classified attack iff score >= threshold. Under that rule APCER (attacks
slipping through) is nondecreasing in the threshold and BPCER (bona fide
flagged) is nonincreasing.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyClassError, NonFiniteError, SchemaError

BONAFIDE = "bonafide"


@dataclass(frozen=True)
class ScoreRecord:
    id: str
    true_class: str  # BONAFIDE or a PAIS label such as print/screen/pvc
    score: float


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    apcer: float  # worst case over PAIS
    bpcer: float


@dataclass(frozen=True)
class PadReport:
    threshold: float
    apcer_by_pais: dict[str, float]
    apcer_worst: float
    worst_pais: str
    bpcer: float
    eer: float
    eer_threshold: float
    bpcer10: float
    bpcer20: float
    bpcer100: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "apcer_by_pais": dict(sorted(self.apcer_by_pais.items())),
            "apcer_worst": self.apcer_worst,
            "worst_pais": self.worst_pais,
            "bpcer": self.bpcer,
            "eer": self.eer,
            "eer_threshold": self.eer_threshold,
            "bpcer10": self.bpcer10,
            "bpcer20": self.bpcer20,
            "bpcer100": self.bpcer100,
        }


def decide(record: ScoreRecord, threshold: float) -> str:
    """'attack' iff score >= threshold (inclusive boundary), else 'bonafide'."""
    return "attack" if record.score >= threshold else "bonafide"


def _split(records: Sequence[ScoreRecord]) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    bonafide = np.array([r.score for r in records if r.true_class == BONAFIDE], dtype=np.float64)
    grouped: dict[str, list[float]] = {}
    for r in records:
        if r.true_class != BONAFIDE:
            grouped.setdefault(r.true_class, []).append(r.score)
    return bonafide, {k: np.asarray(v, dtype=np.float64) for k, v in grouped.items()}


def apcer_pais(records: Sequence[ScoreRecord], pais: str, threshold: float) -> float:
    """Fraction of `pais` attack records misclassified as bona fide."""
    scores = np.array([r.score for r in records if r.true_class == pais], dtype=np.float64)
    if scores.size == 0:
        raise EmptyClassError(f"no records of PAIS {pais!r}")
    return float(np.count_nonzero(scores < threshold) / scores.size)


def bpcer(records: Sequence[ScoreRecord], threshold: float) -> float:
    """Fraction of bona fide records misclassified as attack."""
    scores = np.array([r.score for r in records if r.true_class == BONAFIDE], dtype=np.float64)
    if scores.size == 0:
        raise EmptyClassError("no bona fide records")
    return float(np.count_nonzero(scores >= threshold) / scores.size)


def apcer_worst(records: Sequence[ScoreRecord], threshold: float) -> tuple[float, str]:
    """Maximum per-PAIS APCER; ties broken by lexicographic PAIS label."""
    _, by_pais = _split(records)
    if not by_pais:
        raise EmptyClassError("no attack records")
    best_rate, best_pais = -1.0, ""
    for pais in sorted(by_pais):
        rate = float(np.count_nonzero(by_pais[pais] < threshold) / by_pais[pais].size)
        if rate > best_rate:
            best_rate, best_pais = rate, pais
    return best_rate, best_pais


def apcer_pooled(records: Sequence[ScoreRecord], threshold: float) -> float:
    """APCER over all attack records pooled regardless of PAIS."""
    scores = np.array([r.score for r in records if r.true_class != BONAFIDE], dtype=np.float64)
    if scores.size == 0:
        raise EmptyClassError("no attack records")
    return float(np.count_nonzero(scores < threshold) / scores.size)


def det_curve(records: Sequence[ScoreRecord]) -> list[DetPoint]:
    """One (threshold, worst-case APCER, BPCER) point per distinct score,
    plus -inf/+inf sentinels covering the all-attack/all-bonafide decisions."""
    bonafide_scores, by_pais = _split(records)
    if bonafide_scores.size == 0:
        raise EmptyClassError("no bona fide records")
    if not by_pais:
        raise EmptyClassError("no attack records")

    all_scores = np.array([r.score for r in records], dtype=np.float64)
    thresholds = np.concatenate(([-np.inf], np.unique(all_scores), [np.inf]))

    bonafide_sorted = np.sort(bonafide_scores)
    pais_sorted = {k: np.sort(v) for k, v in by_pais.items()}

    points = []
    for t in thresholds:
        # count(score >= t) via searchsorted on the sorted array
        n_bf_attack = bonafide_sorted.size - np.searchsorted(bonafide_sorted, t, side="left")
        bp = n_bf_attack / bonafide_sorted.size
        ap = 0.0
        for pais in sorted(pais_sorted):
            arr = pais_sorted[pais]
            missed = np.searchsorted(arr, t, side="left") / arr.size
            ap = max(ap, float(missed))
        points.append(DetPoint(float(t), ap, float(bp)))
    return points


def eer(records: Sequence[ScoreRecord]) -> tuple[float, float]:
    """Equal error rate using the worst-case APCER.

    Locates the adjacent DET points where APCER-BPCER changes sign and
    interpolates both curves linearly between them.
    """
    points = det_curve(records)
    diffs = [p.apcer - p.bpcer for p in points]
    for i, (d0, d1) in enumerate(zip(diffs, diffs[1:])):
        if d0 == 0.0:
            return points[i].apcer, points[i].threshold
        if d0 < 0.0 <= d1:
            p0, p1 = points[i], points[i + 1]
            lam = -d0 / (d1 - d0)
            rate = p0.apcer + lam * (p1.apcer - p0.apcer)
            if math.isinf(p0.threshold) or math.isinf(p1.threshold):
                threshold = p1.threshold if math.isinf(p0.threshold) else p0.threshold
            else:
                threshold = p0.threshold + lam * (p1.threshold - p0.threshold)
            return rate, threshold
    # diffs run from -1 to +1, so a crossing always exists; defensive only
    last = points[-1]
    return last.apcer, last.threshold


def bpcer_at_apcer(records: Sequence[ScoreRecord], alpha: float) -> tuple[float, float]:
    """Lowest BPCER achievable while keeping worst-case APCER <= alpha.

    Returns (bpcer, threshold) at the most permissive feasible threshold;
    (1.0, +inf) if no threshold satisfies the constraint (cannot happen for
    finite scores, kept for robustness).
    """
    if not (0.0 < alpha < 1.0):
        raise EmptyClassError(f"alpha must be in (0, 1), got {alpha}")
    feasible = [p for p in det_curve(records) if p.apcer <= alpha]
    if not feasible:
        return 1.0, math.inf
    best = min(feasible, key=lambda p: p.bpcer)
    return best.bpcer, best.threshold


def pad_report(records: Sequence[ScoreRecord]) -> PadReport:
    """Full report at the EER operating point plus fixed-APCER points."""
    rate, threshold = eer(records)
    _, by_pais = _split(records)
    by_pais_rates = {pais: apcer_pais(records, pais, threshold) for pais in by_pais}
    worst_rate, worst_label = apcer_worst(records, threshold)
    b10, _ = bpcer_at_apcer(records, 0.10)
    b20, _ = bpcer_at_apcer(records, 0.05)
    b100, _ = bpcer_at_apcer(records, 0.01)
    return PadReport(
        threshold=threshold,
        apcer_by_pais=by_pais_rates,
        apcer_worst=worst_rate,
        worst_pais=worst_label,
        bpcer=bpcer(records, threshold),
        eer=rate,
        eer_threshold=threshold,
        bpcer10=b10,
        bpcer20=b20,
        bpcer100=b100,
    )


def read_scores_csv(path: str | Path | io.TextIOBase,
                    invert_polarity: bool = False) -> list[ScoreRecord]:
    """Parse `id,true_class,score` CSV with a header row.

    Non-finite scores are rejected at parse time. invert_polarity negates
    scores for systems where higher means more bona fide.
    """
    if isinstance(path, (str, Path)):
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = path.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip().lower() for c in rows[0]] != ["id", "true_class", "score"]:
        raise SchemaError("score file must start with header 'id,true_class,score'")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise SchemaError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            score = float(row[2])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: bad score {row[2]!r}") from exc
        if not math.isfinite(score):
            raise NonFiniteError(lineno, f"line {lineno}: score must be finite, got {row[2]}")
        if invert_polarity:
            score = -score
        records.append(ScoreRecord(row[0].strip(), row[1].strip(), score))
    return records


def write_det_csv(points: Sequence[DetPoint], path: str | Path) -> None:
    """DET curve as CSV with 9-significant-digit floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("threshold,apcer,bpcer\n")
        for p in points:
            fh.write(f"{p.threshold:.9g},{p.apcer:.9g},{p.bpcer:.9g}\n")


def _probit(p: float, eps: float = 1e-4) -> float:
    from statistics import NormalDist

    return NormalDist().inv_cdf(min(max(p, eps), 1.0 - eps))


def det_svg(points: Sequence[DetPoint], width: int = 480, height: int = 480) -> str:
    """Minimal DET plot (normal-deviate axes) as a standalone SVG string."""
    lo, hi = _probit(1e-4), _probit(1.0 - 1e-4)
    margin = 48.0

    def sx(p: float) -> float:
        return margin + (_probit(p) - lo) / (hi - lo) * (width - 2 * margin)

    def sy(p: float) -> float:
        return height - margin - (_probit(p) - lo) / (hi - lo) * (height - 2 * margin)

    path = " ".join(f"{sx(p.apcer):.2f},{sy(p.bpcer):.2f}" for p in points)
    ticks = (0.001, 0.01, 0.05, 0.1, 0.2, 0.4)
    tick_lines = []
    for t in ticks:
        x, y = sx(t), sy(t)
        tick_lines.append(
            f'<line x1="{x:.2f}" y1="{height - margin:.2f}" x2="{x:.2f}" '
            f'y2="{height - margin + 5:.2f}" stroke="black"/>'
            f'<text x="{x:.2f}" y="{height - margin + 18:.2f}" font-size="9" '
            f'text-anchor="middle">{t * 100:g}%</text>'
            f'<line x1="{margin - 5:.2f}" y1="{y:.2f}" x2="{margin:.2f}" '
            f'y2="{y:.2f}" stroke="black"/>'
            f'<text x="{margin - 8:.2f}" y="{y + 3:.2f}" font-size="9" '
            f'text-anchor="end">{t * 100:g}%</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>\n'
        f'<polyline points="{path}" fill="none" stroke="crimson" stroke-width="1.5"/>\n'
        + "\n".join(tick_lines)
        + f'\n<text x="{width / 2:.0f}" y="{height - 8}" font-size="11" '
        f'text-anchor="middle">APCER</text>\n'
        f'<text x="12" y="{height / 2:.0f}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 12 {height / 2:.0f})">BPCER</text>\n'
        "</svg>\n"
    )
