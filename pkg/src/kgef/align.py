"""Cross-source author matching and ISBN-keyed work enrichment.

Two heuristics link Wikidata authors to external ids: OpenLibrary by
exact normalized name plus birth year, Goodreads by name alone after
removing homonyms. Ambiguity is never resolved by guessing; any
candidate set with more than one member on either side produces no link.
"""

from __future__ import annotations

import csv
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from . import isbn

# unmatched-author reason codes
MATCHED = "matched"
NO_NAME_MATCH = "no-name-match"
NO_BIRTH_YEAR = "no-birth-year"
YEAR_MISMATCH = "year-mismatch"
AMBIGUOUS = "ambiguous"


def normalize_name(name: str) -> str:
    """Casefold and collapse whitespace; diacritics are preserved."""
    return " ".join(unicodedata.normalize("NFC", name).casefold().split())


@dataclass(frozen=True)
class AlignmentKey:
    normalized_name: str
    birth_year: int | None = None


@dataclass
class AuthorEntity:
    canonical_id: str
    name: str
    birth_year: int
    cross_ids: dict = field(default_factory=dict)  # source -> source_id, WD always present
    country_of_birth: str | None = None
    ethnic_group: str | None = None
    gender: str = "unknown"
    death_year: int | None = None
    work_source: str | None = None  # OL | GR | None; which source collects works

    def to_dict(self) -> dict:
        return {
            "canonical_id": self.canonical_id,
            "name": self.name,
            "birth_year": self.birth_year,
            "cross_ids": self.cross_ids,
            "country_of_birth": self.country_of_birth,
            "ethnic_group": self.ethnic_group,
            "gender": self.gender,
            "death_year": self.death_year,
            "work_source": self.work_source,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuthorEntity":
        return cls(**d)


@dataclass
class MatchResult:
    pairs: list  # (wd_id, other_id), sorted by wd_id
    unmatched: list  # (wd_id, reason), sorted by wd_id


def match_openlibrary(wd_authors, ol_authors) -> MatchResult:
    """Pair WD and OL authors on exact normalized name + equal birth year."""
    ol_index = defaultdict(set)
    for a in ol_authors:
        ol_index[normalize_name(a.name)].add(a.source_id)
    ol_years = {a.source_id: a.birth_year for a in ol_authors}

    # WD-side key multiplicity: two WD authors competing for the same
    # (name, year) key would both claim one OL id, so neither links.
    wd_key_counts = Counter(
        (normalize_name(a.name), a.birth_year) for a in wd_authors if a.birth_year is not None
    )

    pairs, unmatched = [], []
    for a in wd_authors:
        name = normalize_name(a.name)
        candidates = ol_index.get(name)
        if not candidates:
            unmatched.append((a.source_id, NO_NAME_MATCH))
            continue
        if a.birth_year is None:
            unmatched.append((a.source_id, NO_BIRTH_YEAR))
            continue
        year_hits = sorted(c for c in candidates if ol_years[c] == a.birth_year)
        if not year_hits:
            unmatched.append((a.source_id, YEAR_MISMATCH))
            continue
        if len(year_hits) > 1 or wd_key_counts[(name, a.birth_year)] > 1:
            unmatched.append((a.source_id, AMBIGUOUS))
            continue
        pairs.append((a.source_id, year_hits[0]))
    return MatchResult(sorted(pairs), sorted(unmatched))


def match_goodreads(wd_authors, gr_names) -> MatchResult:
    """Pair WD and GR authors on name alone, after discarding homonyms.

    GR names occurring more than once are dropped up front; a GR name
    matching more than one WD author links to none of them.
    """
    name_counts = Counter(normalize_name(a.name) for a in gr_names)
    gr_unique = {}
    for a in gr_names:
        name = normalize_name(a.name)
        if name_counts[name] == 1:
            gr_unique[name] = a.source_id

    wd_name_counts = Counter(normalize_name(a.name) for a in wd_authors)

    pairs, unmatched = [], []
    for a in wd_authors:
        name = normalize_name(a.name)
        gr_id = gr_unique.get(name)
        if gr_id is None:
            unmatched.append((a.source_id, NO_NAME_MATCH))
            continue
        if wd_name_counts[name] > 1:
            unmatched.append((a.source_id, AMBIGUOUS))
            continue
        pairs.append((a.source_id, gr_id))
    return MatchResult(sorted(pairs), sorted(unmatched))


def resolve_precedence(wd_authors, ol_pairs, gr_pairs) -> list:
    """Build AuthorEntities, giving OpenLibrary ids precedence.

    Authors with an OL match collect works from OL; GR ids are attached
    only as the work source for authors without one. A GR id on an
    OL-matched author is kept in cross_ids as metadata.
    """
    ol_by_wd = dict(ol_pairs)
    gr_by_wd = dict(gr_pairs)
    entities = []
    for a in sorted(wd_authors, key=lambda r: r.source_id):
        cross = {"WD": a.source_id}
        work_source = None
        if a.source_id in ol_by_wd:
            cross["OL"] = ol_by_wd[a.source_id]
            work_source = "OL"
        if a.source_id in gr_by_wd:
            cross["GR"] = gr_by_wd[a.source_id]
            if work_source is None:
                work_source = "GR"
        entities.append(
            AuthorEntity(
                canonical_id=a.source_id,
                name=a.name,
                birth_year=a.birth_year,
                cross_ids=cross,
                country_of_birth=a.country_of_birth,
                ethnic_group=a.ethnic_group,
                gender=a.gender,
                death_year=a.death_year,
                work_source=work_source,
            )
        )
    return entities


_FILLABLE = ("blurb", "subjects", "publish_year", "publisher")


def join_isbn(work_records, gb_by_isbn) -> int:
    """Fill missing fields from Google Books records keyed by ISBN-13.

    Existing values are never overwritten; every fill is provenance-
    tagged GB on the record. Returns the number of fields filled.
    Accepts both work and edition records (each is enriched on the
    fillable fields it actually has).
    """
    filled = 0
    for rec in work_records:
        isbns = getattr(rec, "isbn_list", None)
        if isbns is None:
            one = getattr(rec, "isbn", None)
            canon = isbn.canonicalize(one) if one else None
            isbns = [canon] if canon else []
        gb = next((gb_by_isbn[i] for i in isbns if i in gb_by_isbn), None)
        if gb is None:
            continue
        for name in _FILLABLE:
            if not hasattr(rec, name):
                continue
            current = getattr(rec, name)
            value = getattr(gb, name, None)
            if value in (None, [], "") or current not in (None, [], ""):
                continue
            setattr(rec, name, value)
            if hasattr(rec, "field_provenance"):
                rec.field_provenance[name] = "GB"
            filled += 1
    return filled


def write_alignment_report(path, ol_result: MatchResult, gr_result: MatchResult) -> None:
    """CSV of matched and unmatched authors: wd_id, matched_source, matched_id, reason."""
    rows = []
    for wd_id, ol_id in ol_result.pairs:
        rows.append((wd_id, "OL", ol_id, MATCHED))
    for wd_id, reason in ol_result.unmatched:
        rows.append((wd_id, "OL", "", reason))
    for wd_id, gr_id in gr_result.pairs:
        rows.append((wd_id, "GR", gr_id, MATCHED))
    for wd_id, reason in gr_result.unmatched:
        rows.append((wd_id, "GR", "", reason))
    rows.sort()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["wd_id", "matched_source", "matched_id", "reason"])
        writer.writerows(rows)
