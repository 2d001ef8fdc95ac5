"""Loan record I/O, validation, default rates, and a synthetic generator.

The record schema is a five-column CSV: loan_id, grant_month, district,
product, defaulted.  The generator exists because real lending data of
this shape is never shareable; it spreads loans uniformly over a span and
over the product x district grid, with optional "risky segments" that
boost a segment's default probability inside an active month range so the
pipeline has a planted signal to find.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .months import format_month, parse_month

CSV_HEADER = ["loan_id", "grant_month", "district", "product", "defaulted"]


@dataclass(frozen=True)
class LoanRecord:
    loan_id: str
    grant_month: str  # "YYYY-MM"
    district: str
    product: str
    defaulted: bool


@dataclass(frozen=True)
class RiskySegment:
    """Default-probability multiplier for a product and/or district slice.

    ``start_offset``/``end_offset`` are months from the span start,
    inclusive.  A None product or district matches everything.
    """

    multiplier: float
    product: str | None = None
    district: str | None = None
    start_offset: int = 0
    end_offset: int = 10**6

    def matches(self, product: str, district: str, month_offset: int) -> bool:
        if self.product is not None and product != self.product:
            return False
        if self.district is not None and district != self.district:
            return False
        return self.start_offset <= month_offset <= self.end_offset


@dataclass(frozen=True)
class SynthConfig:
    n_loans: int
    n_products: int
    n_districts: int
    span_months: int
    base_default_rate: float
    risky_segments: tuple[RiskySegment, ...] = ()
    seed: int = 0
    start_month: str = "2000-01"

    def __post_init__(self):
        if min(self.n_loans, self.n_products, self.n_districts) < 1:
            raise ValidationError("loan/product/district counts must be >= 1")
        if self.span_months < 1:
            raise ValidationError("span_months must be >= 1")
        if not 0.0 <= self.base_default_rate <= 1.0:
            raise ValidationError("base_default_rate must be in [0, 1]")
        for seg in self.risky_segments:
            if seg.multiplier <= 0:
                raise ValidationError("segment multiplier must be positive")
            if seg.end_offset < seg.start_offset:
                raise ValidationError("segment month range is empty")
        parse_month(self.start_month)


def parse_records(stream_or_path) -> list[LoanRecord]:
    """Read and validate records from a CSV stream or path.

    Raises ValidationError naming the offending line on the first
    malformed row, bad month, bad default flag, or duplicate loan id.
    """
    if hasattr(stream_or_path, "read"):
        return _parse_stream(stream_or_path)
    with open(stream_or_path, newline="", encoding="utf-8") as stream:
        return _parse_stream(stream)


def _parse_stream(stream) -> list[LoanRecord]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty file: expected a header row") from None
    if header != CSV_HEADER:
        raise ValidationError(
            f"line 1: bad header {header!r}, expected {CSV_HEADER!r}"
        )
    records: list[LoanRecord] = []
    seen_ids: set[str] = set()
    for row in reader:
        line = reader.line_num
        if len(row) != 5:
            raise ValidationError(f"line {line}: expected 5 fields, got {len(row)}")
        loan_id, month, district, product, flag = row
        if not loan_id:
            raise ValidationError(f"line {line}: empty loan_id")
        if loan_id in seen_ids:
            raise ValidationError(f"line {line}: duplicate loan_id {loan_id!r}")
        seen_ids.add(loan_id)
        try:
            parse_month(month)
        except ValidationError as exc:
            raise ValidationError(f"line {line}: {exc}") from None
        if not district or not product:
            raise ValidationError(f"line {line}: empty district or product label")
        if flag not in ("0", "1"):
            raise ValidationError(
                f"line {line}: defaulted must be 0 or 1, got {flag!r}"
            )
        records.append(LoanRecord(loan_id, month, district, product, flag == "1"))
    return records


def write_records(records: Iterable[LoanRecord], stream_or_path) -> None:
    if hasattr(stream_or_path, "write"):
        _write_stream(records, stream_or_path)
    else:
        with open(stream_or_path, "w", newline="", encoding="utf-8") as stream:
            _write_stream(records, stream)


def _write_stream(records: Iterable[LoanRecord], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(
            [rec.loan_id, rec.grant_month, rec.district, rec.product,
             "1" if rec.defaulted else "0"]
        )


def generate_synthetic(cfg: SynthConfig) -> list[LoanRecord]:
    """Deterministic synthetic dataset for a seed."""
    rng = np.random.default_rng(cfg.seed)
    start = parse_month(cfg.start_month)
    # sorted so loan ids follow grant order and the CSV reads chronologically
    offsets = np.sort(rng.integers(0, cfg.span_months, size=cfg.n_loans))
    district_ids = rng.integers(0, cfg.n_districts, size=cfg.n_loans)
    product_ids = rng.integers(0, cfg.n_products, size=cfg.n_loans)
    draws = rng.random(cfg.n_loans)

    records = []
    for i in range(cfg.n_loans):
        district = f"D{district_ids[i] + 1:02d}"
        product = f"P{product_ids[i] + 1:02d}"
        offset = int(offsets[i])
        prob = cfg.base_default_rate
        for seg in cfg.risky_segments:
            if seg.matches(product, district, offset):
                prob *= seg.multiplier
        if prob > 1.0:
            raise ValidationError(
                f"infeasible config: default probability {prob} > 1 for "
                f"({product}, {district}) at month offset {offset}"
            )
        records.append(
            LoanRecord(
                loan_id=f"L{i + 1:06d}",
                grant_month=format_month(start + offset),
                district=district,
                product=product,
                defaulted=bool(draws[i] < prob),
            )
        )
    return records


@dataclass(frozen=True)
class DefaultRate:
    rate: float
    n_matched: int
    n_defaulted: int

    @property
    def empty(self) -> bool:
        return self.n_matched == 0


def default_rate(
    records: Sequence[LoanRecord],
    district: str | None = None,
    product: str | None = None,
    month_range: tuple[str, str] | None = None,
) -> DefaultRate:
    """Fraction of matching loans that defaulted; 0 matches gives rate 0."""
    lo = hi = None
    if month_range is not None:
        lo, hi = parse_month(month_range[0]), parse_month(month_range[1])
    matched = defaulted = 0
    for rec in records:
        if district is not None and rec.district != district:
            continue
        if product is not None and rec.product != product:
            continue
        if lo is not None and not lo <= parse_month(rec.grant_month) <= hi:
            continue
        matched += 1
        defaulted += rec.defaulted
    rate = defaulted / matched if matched else 0.0
    return DefaultRate(rate, matched, defaulted)


def load_synth_config(path) -> SynthConfig:
    """Generator config from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    segments = tuple(
        RiskySegment(
            multiplier=seg["multiplier"],
            product=seg.get("product"),
            district=seg.get("district"),
            start_offset=seg.get("start_offset", 0),
            end_offset=seg.get("end_offset", 10**6),
        )
        for seg in raw.pop("risky_segments", [])
    )
    try:
        return SynthConfig(risky_segments=segments, **raw)
    except TypeError as exc:
        raise ValidationError(f"bad generator config: {exc}") from None
