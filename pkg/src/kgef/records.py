"""Parsing and validation of per-source bibliographic record files.

One JSON object per line, one file per (source, record kind):
``<source>.authors.jsonl``, ``<source>.works.jsonl``,
``<source>.editions.jsonl``. Malformed lines are collected as warnings,
never silently dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import isbn

SOURCES = ("WD", "OL", "GR", "GB")
GENDERS = ("male", "female", "nonbinary", "unknown")
KINDS = ("authors", "works", "editions")

BIRTH_YEAR_CUTOFF = 1808


class IngestError(Exception):
    """Fatal ingest failure (unreadable file, undeclarable schema)."""


@dataclass
class ParseWarning:
    line_no: int
    message: str
    level: str = "warning"  # "warning" for skipped lines, "debug" for notes


@dataclass
class RawAuthorRecord:
    source_id: str
    source: str
    name: str
    birth_year: int | None = None
    death_year: int | None = None
    country_of_birth: str | None = None
    ethnic_group: str | None = None
    gender: str = "unknown"
    external_ids: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "source": self.source,
            "name": self.name,
            "birth_year": self.birth_year,
            "death_year": self.death_year,
            "country_of_birth": self.country_of_birth,
            "ethnic_group": self.ethnic_group,
            "gender": self.gender,
            "external_ids": self.external_ids,
        }


@dataclass
class RawWorkRecord:
    source_id: str
    source: str
    title: str
    author_source_ids: list = field(default_factory=list)
    language: str | None = None
    subjects: list = field(default_factory=list)
    blurb: str | None = None
    publish_year: int | None = None
    isbn_list: list = field(default_factory=list)  # canonical ISBN-13 only
    invalid_isbns: list = field(default_factory=list)  # checksum failures, kept flagged
    field_provenance: dict = field(default_factory=dict)  # field name -> source of fill

    def __post_init__(self):
        # canonicalize to ISBN-13, keeping checksum failures flagged
        valid, invalid = [], []
        for raw in list(self.isbn_list) + list(self.invalid_isbns):
            canon = isbn.canonicalize(str(raw))
            if canon is None:
                invalid.append(str(raw))
            elif canon not in valid:
                valid.append(canon)
        self.isbn_list = valid
        self.invalid_isbns = invalid

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "source": self.source,
            "title": self.title,
            "author_source_ids": self.author_source_ids,
            "language": self.language,
            "subjects": self.subjects,
            "blurb": self.blurb,
            "publish_year": self.publish_year,
            "isbn_list": self.isbn_list,
            "invalid_isbns": self.invalid_isbns,
            "field_provenance": self.field_provenance,
        }


@dataclass
class RawEditionRecord:
    source_id: str
    source: str
    work_source_id: str
    publisher: str | None = None
    publish_year: int | None = None
    publish_country: str | None = None
    isbn: str | None = None

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "source": self.source,
            "work_source_id": self.work_source_id,
            "publisher": self.publisher,
            "publish_year": self.publish_year,
            "publish_country": self.publish_country,
            "isbn": self.isbn,
        }


_AUTHOR_KEYS = set(RawAuthorRecord("x", "WD", "x").to_dict())
_WORK_KEYS = set(RawWorkRecord("x", "WD", "x").to_dict())
_EDITION_KEYS = set(RawEditionRecord("x", "WD", "x").to_dict())


def record_to_line(record) -> str:
    """Serialize a record to its one-line JSON form."""
    return json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True)


def _opt_int(obj, key, lo=None, hi=None):
    v = obj.get(key)
    if v is None:
        return None
    if not isinstance(v, int) or isinstance(v, bool):
        raise ValueError(f"{key} must be an integer, got {v!r}")
    if lo is not None and not (lo <= v <= hi):
        raise ValueError(f"{key} {v} outside [{lo}, {hi}]")
    return v


def _req_str(obj, key):
    v = obj.get(key)
    if not isinstance(v, str) or not v:
        raise ValueError(f"missing or empty {key}")
    return v


def _author_from_obj(obj, source) -> RawAuthorRecord:
    gender = obj.get("gender") or "unknown"
    if gender not in GENDERS:
        raise ValueError(f"unknown gender {gender!r}")
    ext = obj.get("external_ids") or {}
    if not isinstance(ext, dict):
        raise ValueError("external_ids must be an object")
    return RawAuthorRecord(
        source_id=_req_str(obj, "source_id"),
        source=source,
        name=_req_str(obj, "name"),
        birth_year=_opt_int(obj, "birth_year", 1000, 2100),
        death_year=_opt_int(obj, "death_year", 1000, 2200),
        country_of_birth=obj.get("country_of_birth"),
        ethnic_group=obj.get("ethnic_group"),
        gender=gender,
        external_ids=dict(ext),
    )


def _work_from_obj(obj, source) -> RawWorkRecord:
    return RawWorkRecord(
        source_id=_req_str(obj, "source_id"),
        source=source,
        title=_req_str(obj, "title"),
        author_source_ids=list(obj.get("author_source_ids") or []),
        language=obj.get("language"),
        subjects=list(obj.get("subjects") or []),
        blurb=obj.get("blurb"),
        publish_year=_opt_int(obj, "publish_year"),
        isbn_list=list(obj.get("isbn_list") or []),
        invalid_isbns=list(obj.get("invalid_isbns") or []),
        field_provenance=dict(obj.get("field_provenance") or {}),
    )


def _edition_from_obj(obj, source) -> RawEditionRecord:
    return RawEditionRecord(
        source_id=_req_str(obj, "source_id"),
        source=source,
        work_source_id=_req_str(obj, "work_source_id"),
        publisher=obj.get("publisher"),
        publish_year=_opt_int(obj, "publish_year"),
        publish_country=obj.get("publish_country"),
        isbn=obj.get("isbn"),
    )


_PARSERS = {
    "authors": (_author_from_obj, _AUTHOR_KEYS),
    "works": (_work_from_obj, _WORK_KEYS),
    "editions": (_edition_from_obj, _EDITION_KEYS),
}


@dataclass
class ParseResult:
    records: list
    warnings: list

    @property
    def errors(self):
        return [w for w in self.warnings if w.level == "warning"]


def parse_lines(lines, source: str, kind: str) -> ParseResult:
    """Parse an iterable of JSON lines into records of the given kind."""
    if source not in SOURCES:
        raise IngestError(f"unknown source {source!r}")
    if kind not in _PARSERS:
        raise IngestError(f"unknown record kind {kind!r}")
    build, known_keys = _PARSERS[kind]
    records, warnings = [], []
    seen_ids = set()
    for line_no, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                warnings.append(ParseWarning(line_no, "not valid UTF-8"))
                continue
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            warnings.append(ParseWarning(line_no, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            warnings.append(ParseWarning(line_no, "line is not a JSON object"))
            continue
        for key in sorted(set(obj) - known_keys):
            warnings.append(ParseWarning(line_no, f"ignored unknown field {key!r}", level="debug"))
        try:
            rec = build(obj, source)
        except ValueError as exc:
            warnings.append(ParseWarning(line_no, str(exc)))
            continue
        if (source, rec.source_id) in seen_ids:
            warnings.append(ParseWarning(line_no, f"duplicate source_id {rec.source_id!r}"))
            continue
        seen_ids.add((source, rec.source_id))
        records.append(rec)
    return ParseResult(records, warnings)


def infer_kind(path) -> str:
    name = Path(path).name
    for kind in KINDS:
        if f".{kind}." in name or name.endswith(f".{kind}"):
            return kind
    raise IngestError(f"cannot infer record kind from file name {name!r}")


def parse_source_file(path, source: str, kind: str | None = None) -> ParseResult:
    """Parse one line-delimited record file.

    The record kind is taken from the file name
    (``<source>.<kind>.jsonl``) unless given explicitly.
    """
    if kind is None:
        kind = infer_kind(path)
    try:
        with open(path, "rb") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return parse_lines(lines, source, kind)


def filter_by_birth_year(records, cutoff: int = BIRTH_YEAR_CUTOFF):
    """Keep authors with a known birth year >= cutoff.

    Authors without a birth year cannot be certified eligible and are
    removed. Returns (kept, removed_count).
    """
    kept = [r for r in records if r.birth_year is not None and r.birth_year >= cutoff]
    return kept, len(records) - len(kept)


def check_edition_references(editions, works) -> list:
    """Flag editions whose work_source_id is absent from the batch."""
    work_ids = {w.source_id for w in works}
    return [e for e in editions if e.work_source_id not in work_ids]
