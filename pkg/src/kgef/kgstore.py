"""Typed triple graph with per-statement provenance.

Biographical facts are reified: an author's birth place, time, and
status hang off a BirthSituation node, never directly off the author.
Editions likewise group publisher/year/country under a Publication
node. Serialization is a line-based quad format (subject, predicate,
object, provenance) with entity declarations up front.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

ENTITY_KINDS = (
    "Author", "Work", "Edition", "BirthSituation", "Publication",
    "Subject", "Publisher", "Place", "TimeInterval",
)

RELATIONS = frozenset({
    "hasBirthSituation", "birthPlace", "birthTime", "hasStatus",
    "attributedTo", "embodiedIn", "hasPublication", "publishedBy",
    "publicationYear", "publicationCountry", "hasSubject", "hasBlurb",
    "gender", "sameAsExternal",
})

PROVENANCES = ("WD", "OL", "GR", "GB")


class GraphError(Exception):
    """Build or load failure (dangling id, malformed line)."""


@dataclass(frozen=True)
class Entity:
    id: str
    kind: str
    provenance: str = "WD"


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    obj: str
    provenance: str
    obj_is_literal: bool = False

    def __post_init__(self):
        if self.predicate not in RELATIONS:
            raise GraphError(f"predicate {self.predicate!r} outside relation vocabulary")
        if self.provenance not in PROVENANCES:
            raise GraphError(f"provenance {self.provenance!r} must be one of {PROVENANCES}")


@dataclass
class Graph:
    entities: dict = field(default_factory=dict)  # id -> Entity
    triples: list = field(default_factory=list)  # sorted, deduplicated

    def triple_set(self):
        return set(self.triples)

    def validate(self) -> None:
        """Referential closure: every id in any triple exists."""
        for t in self.triples:
            if t.subject not in self.entities:
                raise GraphError(f"dangling subject {t.subject!r}")
            if not t.obj_is_literal and t.obj not in self.entities:
                raise GraphError(f"dangling object {t.obj!r}")


_ID_CLEAN = re.compile(r"\s+")


def _safe_id(text: str) -> str:
    return _ID_CLEAN.sub(" ", text).strip()


def _sort_key(t: Triple):
    return (t.subject, t.predicate, t.obj, t.provenance)


class _Builder:
    def __init__(self):
        self.entities = {}
        self.triples = set()

    def entity(self, id_, kind, provenance):
        existing = self.entities.get(id_)
        if existing is None:
            self.entities[id_] = Entity(id_, kind, provenance)
        elif existing.kind != kind:
            raise GraphError(f"entity {id_!r} declared as both {existing.kind} and {kind}")
        return id_

    def add(self, subject, predicate, obj, provenance, literal=False):
        self.triples.add(Triple(subject, predicate, obj, provenance, literal))

    def graph(self) -> Graph:
        g = Graph(dict(self.entities), sorted(self.triples, key=_sort_key))
        g.validate()
        return g


def work_entity_id(source: str, source_id: str) -> str:
    return _safe_id(f"work:{source}:{source_id}")


def edition_entity_id(source: str, source_id: str) -> str:
    return _safe_id(f"edition:{source}:{source_id}")


def build_graph(authors, assignments, works, editions) -> Graph:
    """Materialize aligned authors, classified statuses, works, and
    editions as a referentially closed graph.

    authors: AuthorEntity list; assignments: canonical_id ->
    StatusAssignment; works: RawWorkRecord list; editions:
    RawEditionRecord list. A work naming an unknown author id or an
    edition naming an unknown work aborts the build.
    """
    b = _Builder()
    by_source_id = {}
    for a in authors:
        for src, sid in a.cross_ids.items():
            by_source_id[(src, sid)] = a.canonical_id

    for a in authors:
        author_id = b.entity(a.canonical_id, "Author", "WD")
        birth_id = b.entity(f"{a.canonical_id}#birth", "BirthSituation", "WD")
        b.add(author_id, "hasBirthSituation", birth_id, "WD")
        year_id = b.entity(f"year:{a.birth_year}", "TimeInterval", "WD")
        b.add(birth_id, "birthTime", year_id, "WD")
        if a.country_of_birth:
            place_id = b.entity(f"place:{a.country_of_birth}", "Place", "WD")
            b.add(birth_id, "birthPlace", place_id, "WD")
        assignment = assignments.get(a.canonical_id)
        if assignment is not None:
            b.add(birth_id, "hasStatus", assignment.status, "WD", literal=True)
        if a.gender and a.gender != "unknown":
            b.add(author_id, "gender", a.gender, "WD", literal=True)
        for src in ("OL", "GR"):
            if src in a.cross_ids:
                b.add(author_id, "sameAsExternal", f"{src}:{a.cross_ids[src]}",
                      src, literal=True)

    work_ids = {}
    for w in works:
        wid = b.entity(work_entity_id(w.source, w.source_id), "Work", w.source)
        work_ids[(w.source, w.source_id)] = wid
        for author_sid in w.author_source_ids:
            canonical = by_source_id.get((w.source, author_sid))
            if canonical is None:
                raise GraphError(
                    f"work {w.source_id!r} references unknown author {author_sid!r}"
                )
            b.add(wid, "attributedTo", canonical, w.source)
        subj_prov = w.field_provenance.get("subjects", w.source)
        for subject in w.subjects:
            sid = b.entity(f"subject:{_safe_id(subject)}", "Subject", subj_prov)
            b.add(wid, "hasSubject", sid, subj_prov)
        if w.blurb:
            b.add(wid, "hasBlurb", w.blurb,
                  w.field_provenance.get("blurb", w.source), literal=True)

    for e in editions:
        wid = work_ids.get((e.source, e.work_source_id))
        if wid is None:
            raise GraphError(
                f"edition {e.source_id!r} references unknown work {e.work_source_id!r}"
            )
        eid = b.entity(edition_entity_id(e.source, e.source_id), "Edition", e.source)
        b.add(wid, "embodiedIn", eid, e.source)
        pub_id = b.entity(f"{eid}#pub", "Publication", e.source)
        b.add(eid, "hasPublication", pub_id, e.source)
        if e.publisher:
            p_id = b.entity(f"publisher:{_safe_id(e.publisher)}", "Publisher", e.source)
            b.add(pub_id, "publishedBy", p_id, e.source)
        if e.publish_year is not None:
            b.add(pub_id, "publicationYear", str(e.publish_year), e.source, literal=True)
        if e.publish_country:
            b.add(pub_id, "publicationCountry", e.publish_country, e.source, literal=True)

    return b.graph()


def serialize(graph: Graph, path) -> None:
    """Deterministic quad file: entity declarations, then statements
    sorted by subject, predicate, object. Literals are JSON-quoted."""
    lines = []
    for e in sorted(graph.entities.values(), key=lambda e: e.id):
        lines.append(f"#entity\t{e.id}\t{e.kind}\t{e.provenance}")
    for t in sorted(graph.triples, key=_sort_key):
        obj = json.dumps(t.obj, ensure_ascii=False) if t.obj_is_literal else t.obj
        lines.append(f"{t.subject}\t{t.predicate}\t{obj}\t{t.provenance}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def deserialize(path) -> Graph:
    entities = {}
    triples = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            try:
                if parts[0] == "#entity":
                    _, id_, kind, prov = parts
                    if kind not in ENTITY_KINDS:
                        raise ValueError(f"unknown entity kind {kind!r}")
                    entities[id_] = Entity(id_, kind, prov)
                else:
                    subject, predicate, obj, prov = parts
                    literal = obj.startswith('"')
                    if literal:
                        obj = json.loads(obj)
                    triples.add(Triple(subject, predicate, obj, prov, literal))
            except (ValueError, GraphError) as exc:
                raise GraphError(f"{path}:{line_no}: malformed line ({exc})") from exc
    g = Graph(entities, sorted(triples, key=_sort_key))
    g.validate()
    return g


def count_stats(graph: Graph) -> dict:
    """Entity counts per kind split Wikidata vs external, plus blurbs.

    Returns {kind: {"wikidata": n, "external": m, "total": n + m}} with
    a synthetic "Blurb" kind counted from hasBlurb triples.
    """
    stats = {kind: {"wikidata": 0, "external": 0, "total": 0} for kind in ENTITY_KINDS}
    for e in graph.entities.values():
        bucket = "wikidata" if e.provenance == "WD" else "external"
        stats[e.kind][bucket] += 1
        stats[e.kind]["total"] += 1
    blurb = {"wikidata": 0, "external": 0, "total": 0}
    for t in graph.triples:
        if t.predicate == "hasBlurb":
            blurb["wikidata" if t.provenance == "WD" else "external"] += 1
            blurb["total"] += 1
    stats["Blurb"] = blurb
    return stats


def check_patterns(graph: Graph) -> list:
    """Pattern completeness violations, empty when the graph is sound.

    Every Author has exactly one BirthSituation, every Edition exactly
    one Publication, every embodiedIn object is an Edition.
    """
    problems = []
    birth_count = {}
    pub_count = {}
    for t in graph.triples:
        if t.predicate == "hasBirthSituation":
            birth_count[t.subject] = birth_count.get(t.subject, 0) + 1
        elif t.predicate == "hasPublication":
            pub_count[t.subject] = pub_count.get(t.subject, 0) + 1
        elif t.predicate == "embodiedIn":
            if graph.entities[t.obj].kind != "Edition":
                problems.append(f"embodiedIn object {t.obj!r} is not an Edition")
    for e in graph.entities.values():
        if e.kind == "Author" and birth_count.get(e.id, 0) != 1:
            problems.append(f"author {e.id!r} has {birth_count.get(e.id, 0)} birth situations")
        if e.kind == "Edition" and pub_count.get(e.id, 0) != 1:
            problems.append(f"edition {e.id!r} has {pub_count.get(e.id, 0)} publications")
    return problems
