"""Action-vs-privacy trade-off scoring, ranking, and template selection.

Accuracies come in as percentages; the trade-off score normalizes them
to [0, 1] and combines them as

    f_lambda = (1 - lambda) * a + lambda * (1 - p)

so lambda = 0 scores pure action utility and lambda = 1 pure privacy
protection.  Printed scores are rounded half away from zero to two
decimals; ranking always uses the unrounded value.
"""

from __future__ import annotations

import csv
import decimal
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import StorageError, ValidationError, VeilkitWarning

RESULTS_HEADER = ["method", "dataset", "action_acc", "privacy_acc"]
TEMPLATE_HEADER = ["template", "action_acc", "privacy_acc"]


def _check_percent(label, value):
    if not (math.isfinite(value) and 0.0 <= value <= 100.0):
        raise ValidationError(f"{label} must be in [0, 100], got {value}")


@dataclass(frozen=True)
class MetricRecord:
    """One method's accuracy pair on one dataset, in percent."""

    method: str
    dataset: str
    action_acc: float
    privacy_acc: float

    def __post_init__(self):
        _check_percent(f"action_acc for {self.method!r}", self.action_acc)
        _check_percent(f"privacy_acc for {self.method!r}", self.privacy_acc)


@dataclass(frozen=True)
class TemplateRecord:
    """Accuracy pair measured when obfuscating a single template."""

    template: str
    action_acc: float
    privacy_acc: float

    def __post_init__(self):
        _check_percent(f"action_acc for {self.template!r}", self.action_acc)
        _check_percent(f"privacy_acc for {self.template!r}", self.privacy_acc)


def f_lambda(record, lam):
    """Trade-off score (1 - lam)*a + lam*(1 - p) with a, p in [0, 1].

    Evaluated in percent space with one final division so that
    two-decimal table inputs stay exact as long as possible (e.g.
    76/65 at lam=0.5 gives exactly 55.5 before the divide).
    """
    if not (math.isfinite(lam) and 0.0 <= lam <= 1.0):
        raise ValidationError(f"lambda must be in [0, 1], got {lam}")
    score = (1.0 - lam) * record.action_acc + lam * (100.0 - record.privacy_acc)
    return score / 100.0


def round_score(value, places=2):
    """Round half away from zero, the convention used for printed tables.

    Rounds the shortest decimal form of the float so that values like
    0.555 (stored as 0.55499...) still round up to 0.56.
    """
    if not math.isfinite(value):
        raise ValidationError(f"cannot round non-finite score {value}")
    quantum = decimal.Decimal(1).scaleb(-places)
    rounded = decimal.Decimal(repr(float(value))).quantize(
        quantum, rounding=decimal.ROUND_HALF_UP
    )
    return float(rounded)


def sweep(records, lambdas):
    """Score every record at every lambda; rows ordered method-major."""
    lambdas = list(lambdas)
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValidationError("lambda grid must be sorted ascending")
    rows = []
    for record in records:
        for lam in lambdas:
            rows.append((record.method, record.dataset, lam, f_lambda(record, lam)))
    return rows


def rank(records, lam):
    """Order records by descending score; ties prefer lower privacy
    accuracy, then lexicographic method name."""
    records = list(records)
    if not records:
        raise ValidationError("rank needs at least one record")
    return sorted(
        records, key=lambda r: (-f_lambda(r, lam), r.privacy_acc, r.method)
    )


def select_templates(records, k, published=None):
    """Pick the k templates with the lowest privacy accuracy.

    Ties prefer higher action accuracy, then name.  When a published
    reference selection is supplied and disagrees, a warning reports the
    difference (the strict privacy sort is kept either way).
    """
    records = list(records)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > len(records):
        raise ValidationError(f"k={k} exceeds the {len(records)} available templates")
    ordered = sorted(
        records, key=lambda r: (r.privacy_acc, -r.action_acc, r.template)
    )
    names = [r.template for r in ordered[:k]]
    if published is not None and set(published) != set(names):
        extra = sorted(set(published) - set(names))
        missing = sorted(set(names) - set(published))
        warnings.warn(
            f"published selection {sorted(published)} differs from the "
            f"privacy-sorted selection {names} (swaps {extra} for {missing}); "
            f"keeping the privacy-sorted result",
            VeilkitWarning,
            stacklevel=2,
        )
    return names


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise StorageError(f"cannot read results {path}: {exc}") from exc


def _parse_percent(path, line_no, label, text):
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(
            f"{path}: line {line_no}: {label} is not a number: {text!r}"
        )
    if not (math.isfinite(value) and 0.0 <= value <= 100.0):
        raise ValidationError(
            f"{path}: line {line_no}: {label} out of [0, 100]: {value}"
        )
    return value


def _ingest(path, header, build):
    path = Path(path)
    rows = _read_rows(path)
    rows = [(i + 1, row) for i, row in enumerate(rows) if row and any(row)]
    if not rows:
        warnings.warn(f"{path}: no records found", VeilkitWarning, stacklevel=3)
        return []
    first_no, first = rows[0]
    if [cell.strip() for cell in first] != header:
        raise ValidationError(
            f"{path}: line {first_no}: expected header {','.join(header)}"
        )
    records = []
    for line_no, row in rows[1:]:
        if len(row) != len(header):
            raise ValidationError(
                f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}"
            )
        records.append(build(line_no, [cell.strip() for cell in row]))
    if not records:
        warnings.warn(f"{path}: no records found", VeilkitWarning, stacklevel=3)
    return records


def ingest_results(path):
    """Read method,dataset,action_acc,privacy_acc rows into MetricRecords."""

    def build(line_no, row):
        return MetricRecord(
            row[0],
            row[1],
            _parse_percent(path, line_no, "action_acc", row[2]),
            _parse_percent(path, line_no, "privacy_acc", row[3]),
        )

    return _ingest(path, RESULTS_HEADER, build)


def ingest_template_results(path):
    """Read template,action_acc,privacy_acc rows into TemplateRecords."""

    def build(line_no, row):
        return TemplateRecord(
            row[0],
            _parse_percent(path, line_no, "action_acc", row[1]),
            _parse_percent(path, line_no, "privacy_acc", row[2]),
        )

    return _ingest(path, TEMPLATE_HEADER, build)


def sniff_results_kind(path):
    """Peek at a CSV header: 'methods' or 'templates'."""
    rows = _read_rows(Path(path))
    for row in rows:
        if row and any(row):
            cells = [cell.strip() for cell in row]
            if cells == RESULTS_HEADER:
                return "methods"
            if cells == TEMPLATE_HEADER:
                return "templates"
            raise ValidationError(
                f"{path}: unrecognized header {','.join(cells)}; expected "
                f"{','.join(RESULTS_HEADER)} or {','.join(TEMPLATE_HEADER)}"
            )
    return "empty"
