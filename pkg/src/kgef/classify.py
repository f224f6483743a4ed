"""Western/Transnational status assignment and representation statistics.

An author is Transnational if born in a former colony, or born in a
Western country and belonging to one of that country's ethnic
minorities. The country taxonomy and minority lists are editable
configuration files, not code.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass

WESTERN = "Western"
TRANSNATIONAL = "Transnational"

BASIS_BIRTH_COUNTRY = "birth_country"
BASIS_ETHNIC_MINORITY = "ethnic_minority"

GENERATIONS = (
    ("Silent", 1928, 1945),
    ("Boomer", 1946, 1964),
    ("GenX", 1965, 1980),
    ("Millennial", 1981, 1996),
)


class ClassificationError(Exception):
    """Author country missing from the taxonomy."""


@dataclass
class CountryTaxonomy:
    classes: dict  # country-code -> "western" | "former_colony"
    note: str = ""

    def __post_init__(self):
        bad = {v for v in self.classes.values()} - {"western", "former_colony"}
        if bad:
            raise ValueError(f"invalid taxonomy classes: {sorted(bad)}")


@dataclass
class StatusAssignment:
    canonical_id: str
    status: str  # Western | Transnational
    basis: str  # birth_country | ethnic_minority
    generation: str | None = None
    gender: str = "unknown"


def load_taxonomy(path) -> CountryTaxonomy:
    classes = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            classes[row["country_code"]] = row["class"]
    return CountryTaxonomy(classes, note=f"loaded from {path}")


def load_minorities(path) -> dict:
    minorities: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            minorities.setdefault(row["country_code"], set()).add(row["ethnic_group"])
    return minorities


def assign_generation(birth_year: int) -> str:
    for label, lo, hi in GENERATIONS:
        if lo <= birth_year <= hi:
            return label
    return "Other"


def classify_author(author, taxonomy: CountryTaxonomy, minorities: dict) -> StatusAssignment:
    """Pure function of (country, ethnic_group, taxonomy, minorities).

    Raises ClassificationError when the birth country is absent from
    the taxonomy; callers collect those authors into a report rather
    than defaulting them to either status.
    """
    country = author.country_of_birth
    if country is None or country not in taxonomy.classes:
        raise ClassificationError(
            f"{author.canonical_id}: country {country!r} not in taxonomy"
        )
    country_class = taxonomy.classes[country]
    if country_class == "former_colony":
        status, basis = TRANSNATIONAL, BASIS_BIRTH_COUNTRY
    elif author.ethnic_group and author.ethnic_group in minorities.get(country, ()):
        status, basis = TRANSNATIONAL, BASIS_ETHNIC_MINORITY
    else:
        status, basis = WESTERN, BASIS_BIRTH_COUNTRY
    return StatusAssignment(
        canonical_id=author.canonical_id,
        status=status,
        basis=basis,
        generation=assign_generation(author.birth_year),
        gender=author.gender,
    )


def classify_corpus(authors, taxonomy, minorities):
    """Classify every author; returns (assignments, error messages)."""
    assignments, errors = [], []
    for author in authors:
        try:
            assignments.append(classify_author(author, taxonomy, minorities))
        except ClassificationError as exc:
            errors.append(str(exc))
    return assignments, errors


def works_ratio(western_works: int, transnational_works: int) -> str:
    """Ratio of works expressed as 1:x, x rounded to one decimal."""
    if transnational_works == 0:
        return "1:∞"
    return f"1:{western_works / transnational_works:.1f}"


@dataclass
class RepresentationReport:
    status_counts: dict  # status -> count
    status_percents: dict  # status -> float percent of classified
    cells: dict  # (generation, gender, status) -> (count, percent of classified)
    works_counts: dict  # status -> work count
    ratio: str
    unclassified: int  # total authors minus classified


def representation_stats(assignments, works_per_author=None, total_authors=None,
                         works_counts=None) -> RepresentationReport:
    """Counts and percentages per status and per (generation x gender) cell.

    works_counts may be given directly as {status: count}; otherwise it
    is accumulated from works_per_author (canonical_id -> work count).
    """
    status_counts = Counter(a.status for a in assignments)
    classified = len(assignments)
    status_percents = {
        s: (100.0 * c / classified if classified else math.nan)
        for s, c in status_counts.items()
    }
    cells = {}
    cell_counts = Counter((a.generation, a.gender, a.status) for a in assignments)
    for key, count in cell_counts.items():
        cells[key] = (count, 100.0 * count / classified)

    if works_counts is None:
        works_counts = Counter()
        by_id = {a.canonical_id: a.status for a in assignments}
        for canonical_id, n in (works_per_author or {}).items():
            status = by_id.get(canonical_id)
            if status is not None:
                works_counts[status] += n
        works_counts = dict(works_counts)

    unclassified = (total_authors - classified) if total_authors is not None else 0
    return RepresentationReport(
        status_counts=dict(status_counts),
        status_percents=status_percents,
        cells=cells,
        works_counts=dict(works_counts),
        ratio=works_ratio(
            works_counts.get(WESTERN, 0), works_counts.get(TRANSNATIONAL, 0)
        ),
        unclassified=unclassified,
    )


def representation_stats_from_counts(status_counts: dict, works_counts: dict,
                                     total_authors: int | None = None) -> RepresentationReport:
    """Same report computed from pre-aggregated counts."""
    classified = sum(status_counts.values())
    status_percents = {
        s: (100.0 * c / classified if classified else math.nan)
        for s, c in status_counts.items()
    }
    return RepresentationReport(
        status_counts=dict(status_counts),
        status_percents=status_percents,
        cells={},
        works_counts=dict(works_counts),
        ratio=works_ratio(
            works_counts.get(WESTERN, 0), works_counts.get(TRANSNATIONAL, 0)
        ),
        unclassified=(total_authors - classified) if total_authors is not None else 0,
    )


def write_stats_report(path, report: RepresentationReport) -> None:
    """CSV with status totals, generation x gender x status cells, works ratio."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["section", "generation", "gender", "status", "count", "percent"])
        for status in sorted(report.status_counts):
            writer.writerow([
                "status_total", "", "", status,
                report.status_counts[status],
                f"{report.status_percents[status]:.1f}",
            ])
        writer.writerow(["unclassified", "", "", "", report.unclassified, ""])
        for (gen, gender, status), (count, pct) in sorted(report.cells.items()):
            writer.writerow(["cell", gen, gender, status, count, f"{pct:.1f}"])
        for status in sorted(report.works_counts):
            writer.writerow(["works_total", "", "", status, report.works_counts[status], ""])
        writer.writerow(["works_ratio", "", "", "", report.ratio, ""])
