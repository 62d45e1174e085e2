"""Face image quality gating against OFIQ-style measure reports.

Reports score each image on a 0-100 scale per measure; a threshold profile
names the measures that matter and their minimum acceptable scores. The
default profile carries the published 8-measure operating point.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .errors import Exhausted, InvariantError, SchemaError

DEFAULT_THRESHOLDS = {
    "UnifiedQualityScore.scalar": 75.0,
    "BackgroundUniformity.scalar": 70.0,
    "IlluminationUniformity.scalar": 65.0,
    "LuminanceVariance.scalar": 65.0,
    "OverExposurePrevention.scalar": 80.0,
    "InterEyeDistance.scalar": 80.0,
    "HeadSize.scalar": 30.0,
    "MarginAboveOfTheFaceImage.scalar": 35.0,
}


@dataclass(frozen=True)
class QualityReport:
    image_id: str
    measures: dict[str, float]


@dataclass(frozen=True)
class ThresholdProfile:
    minimums: dict[str, float]

    def __post_init__(self):
        bad = {k: v for k, v in self.minimums.items() if not (0.0 <= v <= 100.0)}
        if bad:
            raise InvariantError(f"threshold minimums outside [0, 100]: {bad}")


@dataclass(frozen=True)
class GateDecision:
    """Pass/fail for one report; `failures` is empty iff the image passed."""

    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def default_profile() -> ThresholdProfile:
    return ThresholdProfile(dict(DEFAULT_THRESHOLDS))


def evaluate(report: QualityReport, profile: ThresholdProfile) -> GateDecision:
    """Pass iff every profiled measure is present and >= its minimum.

    The comparison is inclusive so the published threshold values are
    themselves admissible. Measures in the report but not the profile are
    ignored.
    """
    failures = []
    for name, minimum in profile.minimums.items():
        score = report.measures.get(name)
        if score is None:
            failures.append(f"{name}: missing")
        elif score < minimum:
            failures.append(name)
    return GateDecision(tuple(failures))


def filter_batch(reports: Sequence[QualityReport], profile: ThresholdProfile,
                 ) -> tuple[list[str], list[tuple[str, tuple[str, ...]]]]:
    """Partition reports into (passed ids, failed (id, reasons)) in input order."""
    passed, failed = [], []
    for report in reports:
        decision = evaluate(report, profile)
        if decision.passed:
            passed.append(report.image_id)
        else:
            failed.append((report.image_id, decision.failures))
    return passed, failed


def read_ofiq_csv(path: str | Path | io.TextIOBase, delimiter: str | None = None,
                  ) -> tuple[list[QualityReport], list[str]]:
    """Parse an OFIQ output CSV: first column image id, rest measure scores.

    delimiter=None sniffs between ',' and ';' (OFIQ emits either). Rows with
    non-numeric or out-of-range scores are rejected, not fatal; the returned
    notes say why each rejected row was dropped.
    """
    if isinstance(path, (str, Path)):
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = path.read()
    if not text.strip():
        raise SchemaError("empty OFIQ report")
    header_line = text.splitlines()[0]
    if delimiter is None:
        delimiter = ";" if header_line.count(";") > header_line.count(",") else ","

    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    header = rows[0]
    if len(header) < 2:
        raise SchemaError("OFIQ report needs an id column and at least one measure")
    measure_names = [name.strip() for name in header[1:]]

    reports: list[QualityReport] = []
    rejected: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        image_id = row[0].strip()
        measures: dict[str, float] = {}
        problem = None
        for name, cell in zip(measure_names, row[1:]):
            try:
                value = float(cell)
            except ValueError:
                problem = f"line {lineno} ({image_id}): non-numeric score for {name}: {cell!r}"
                break
            if not (0.0 <= value <= 100.0):
                problem = f"line {lineno} ({image_id}): {name} out of [0, 100]: {value}"
                break
            measures[name] = value
        if problem:
            rejected.append(problem)
        else:
            reports.append(QualityReport(image_id, measures))
    return reports, rejected


class FaceSource(Protocol):
    """Supplier of candidate faces with their quality reports.

    next_batch() returns the next batch of (image_id, report) pairs, or an
    empty sequence when the supply is exhausted. Generative sources are out
    of scope; the in-repo implementation reads a directory.
    """

    def next_batch(self) -> Sequence[tuple[str, QualityReport]]: ...


class ListFaceSource:
    """Serve a fixed list of (id, report) pairs in batches; test/stub source."""

    def __init__(self, items: Iterable[tuple[str, QualityReport]], batch_size: int = 64):
        if batch_size < 1:
            raise InvariantError("batch_size must be >= 1")
        self._items = list(items)
        self._batch_size = batch_size
        self._cursor = 0

    def next_batch(self) -> Sequence[tuple[str, QualityReport]]:
        batch = self._items[self._cursor:self._cursor + self._batch_size]
        self._cursor += len(batch)
        return batch


class DirectoryFaceSource(ListFaceSource):
    """Faces from a directory paired with rows of an OFIQ report.

    Only images that appear in the report are served; ordering follows the
    sorted file names so runs are reproducible.
    """

    IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

    def __init__(self, faces_dir: str | Path, ofiq_csv: str | Path,
                 batch_size: int = 64):
        reports, _rejected = read_ofiq_csv(ofiq_csv)
        by_id = {r.image_id: r for r in reports}
        items = []
        for file in sorted(Path(faces_dir).iterdir()):
            if file.suffix.lower() in self.IMAGE_SUFFIXES and file.name in by_id:
                items.append((str(file), by_id[file.name]))
        super().__init__(items, batch_size)


def acquire_until(n: int, source: FaceSource, profile: ThresholdProfile,
                  max_rounds: int = 16) -> list[str]:
    """Pull batches from `source` until `n` images pass the gate.

    Raises Exhausted (carrying everything accepted so far) when the source
    dries up or `max_rounds` rounds were not enough.
    """
    if n < 0:
        raise InvariantError("n must be >= 0")
    accepted: list[str] = []
    if n == 0:
        return accepted
    for _ in range(max_rounds):
        batch = source.next_batch()
        if not batch:
            raise Exhausted(accepted, f"face source empty with {len(accepted)}/{n} accepted")
        for image_id, report in batch:
            if evaluate(report, profile).passed:
                accepted.append(image_id)
        if len(accepted) >= n:
            return accepted
    raise Exhausted(accepted, f"{max_rounds} rounds yielded {len(accepted)}/{n} accepted")
