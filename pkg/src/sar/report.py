"""JSONL/CSV record sinks and sweep summaries."""

import csv
import json
import math
from dataclasses import dataclass, field


def _plain(rec):
    return rec.to_dict() if hasattr(rec, "to_dict") else dict(rec)


class JsonlSink:
    """One JSON object per line, keys in the record's own order.

    Floats use Python's shortest round-trip ``repr``; non-finite values are
    written as ``Infinity``/``NaN``, which ``json.loads`` reads back.
    """

    def __init__(self, fh):
        self.fh = fh
        self.count = 0

    def write(self, rec):
        self.fh.write(json.dumps(_plain(rec), separators=(", ", ": ")) + "\n")
        self.count += 1


class CsvSink:
    """Header once, comma separated, minimal RFC 4180 quoting."""

    def __init__(self, fh, fields=None):
        self.fh = fh
        self.fields = fields
        self.writer = None
        self.count = 0

    def write(self, rec):
        row = _plain(rec)
        if self.writer is None:
            self.fields = self.fields or list(row)
            self.writer = csv.DictWriter(self.fh, fieldnames=self.fields, lineterminator="\n")
            self.writer.writeheader()
        self.writer.writerow({k: _csv_value(row[k]) for k in self.fields})
        self.count += 1


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def make_sink(fh, fmt="jsonl", fields=None):
    fmt = fmt.lower()
    if fmt == "jsonl":
        return JsonlSink(fh)
    if fmt == "csv":
        return CsvSink(fh, fields)
    raise ValueError(f"unknown format {fmt!r}")


def emit_record(sink, record):
    sink.write(record)


def write_records(path, records, fmt="jsonl"):
    try:
        with open(path, "w", newline="") as fh:
            sink = make_sink(fh, fmt)
            for r in records:
                sink.write(r)
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc
    return sink.count


@dataclass
class SummaryReport:
    totalChecks: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    minMarginByLemma: dict = field(default_factory=dict)
    skipRateByLemma: dict = field(default_factory=dict)
    maxGradRelErr: float = math.nan
    failures: list = field(default_factory=list)
    wallTime: float = 0.0

    def to_dict(self):
        return {
            "totalChecks": self.totalChecks,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "minMarginByLemma": self.minMarginByLemma,
            "skipRateByLemma": self.skipRateByLemma,
            "maxGradRelErr": self.maxGradRelErr,
            "failures": self.failures,
            "wallTime": self.wallTime,
        }


def summarize_records(records, informational=frozenset(), max_failures=50):
    """Aggregate CertRecord-like or ShiftResult-like objects.

    Ids in ``informational`` are counted and reported but never as failures.
    """
    s = SummaryReport()
    counts = {}
    for r in records:
        d = _plain(r)
        key = d.get("lemmaId") or d.get("variant")
        c = counts.setdefault(key, [0, 0])
        c[0] += 1
        s.totalChecks += 1
        if d.get("skipped"):
            s.skipped += 1
            c[1] += 1
            continue
        margin = d.get("margin")
        if margin is None and hasattr(r, "boundMargin"):
            margin = r.boundMargin
        if margin is not None:
            prev = s.minMarginByLemma.get(key, math.inf)
            s.minMarginByLemma[key] = min(prev, margin)
        if d["pass"] or key in informational:
            s.passed += 1
        else:
            s.failed += 1
            if len(s.failures) < max_failures:
                s.failures.append(d)
    s.skipRateByLemma = {k: v[1] / v[0] for k, v in counts.items()}
    return s
