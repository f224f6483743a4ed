#!/usr/bin/env python3
"""Generate the bundled 100-author fixture corpus.

Deterministic (seeded) synthetic JSONL exports emulating the upstream
services: Wikidata authors/works, OpenLibrary authors/works/editions,
Goodreads authors/works, and Google Books records keyed by ISBN. The
corpus deliberately contains year mismatches, ambiguous duplicates,
and Goodreads homonyms so the alignment heuristics have something to
reject.

Usage: python scripts/make_fixture.py [outdir]   (default: fixtures/)
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

GIVEN = [
    "Amara", "Beatriz", "Chinwe", "Daniel", "Elena", "Farid", "Grace",
    "Hiro", "Ines", "Jamal", "Kaja", "Liam", "Mariama", "Nadia", "Oisin",
    "Priya", "Quentin", "Rosa", "Samuel", "Teresa",
]
SURNAME = [
    "Achebe", "Baldwin", "Castellanos", "Dumas", "Eriksen", "Farah",
    "Garcia", "Hansen", "Iyer", "Jansen", "Keller", "Lispector",
    "Mistry", "Ndiaye", "Okri", "Pessoa", "Quiroga", "Rossi", "Souza",
    "Tagore", "Ulrich", "Vargas", "Walcott", "Xenakis", "Yanez",
]
WESTERN = ["US", "GB", "FR", "DE", "IT", "ES", "CA", "AU", "SE", "IE", "NL", "PT"]
COLONY = ["NG", "IN", "BR", "JM", "DZ", "KE", "MX", "CO", "LK", "SN", "CU", "PH"]
MINORITY = {"US": "African American", "GB": "Black British", "FR": "Maghrebi French"}
GENDERS = ["male", "female", "male", "female", "nonbinary"]
PUBLISHERS = ["Harbor Press", "Rio Books", "Lagos House", "Calder & Finch",
              "Imprenta Azul", "Northlight"]
SUBJECTS = ["fiction", "poetry", "history", "memoir", "colonialism",
            "diaspora", "family saga", "politics", "love", "exile"]
WORDS = ["River", "Season", "House", "Shadow", "Salt", "Harvest", "Letters",
         "Crossing", "Garden", "Atlas", "Chorus", "Tide", "Ember", "Maps"]


def isbn13(rng) -> str:
    first12 = "978" + "".join(str(rng.randrange(10)) for _ in range(9))
    total = sum(int(c) * (1 if i % 2 == 0 else 3) for i, c in enumerate(first12))
    return first12 + str((10 - total % 10) % 10)


def title(rng) -> str:
    return f"The {rng.choice(WORDS)} of {rng.choice(WORDS)}"


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def main(outdir: str = "fixtures") -> None:
    rng = random.Random(20230217)
    out = Path(outdir)

    names = [f"{g} {s}" for g in GIVEN for s in SURNAME]
    rng.shuffle(names)

    wd_authors = []
    for i in range(100):
        western = i < 70
        country = rng.choice(WESTERN if western else COLONY)
        ethnic = None
        if western and country in MINORITY and rng.random() < 0.2:
            ethnic = MINORITY[country]
        birth = rng.randrange(1850, 1996)
        wd_authors.append({
            "source_id": f"Q{1000 + i}",
            "name": names[i],
            "birth_year": birth,
            "death_year": birth + rng.randrange(40, 85) if birth < 1940 else None,
            "country_of_birth": country,
            "ethnic_group": ethnic,
            "gender": rng.choice(GENDERS),
            "external_ids": {},
        })
    # one pre-cutoff author the ingest filter must drop
    wd_authors.append({
        "source_id": "Q9999", "name": "Early Example", "birth_year": 1790,
        "country_of_birth": "GB", "gender": "male", "external_ids": {},
    })

    # OpenLibrary: 55 clean matches, 5 year mismatches, 2 ambiguous
    # (duplicate OL entries under the same name+year), 8 OL-only extras.
    ol_authors = []
    ol_matched = wd_authors[:55]
    for j, a in enumerate(ol_matched):
        ol_authors.append({"source_id": f"OL{100 + j}A", "name": a["name"],
                           "birth_year": a["birth_year"]})
    for j, a in enumerate(wd_authors[55:60]):
        ol_authors.append({"source_id": f"OL{200 + j}A", "name": a["name"],
                           "birth_year": a["birth_year"] + 1})
    for j, a in enumerate(wd_authors[60:62]):
        for copy in range(2):
            ol_authors.append({"source_id": f"OL{300 + 2 * j + copy}A",
                               "name": a["name"], "birth_year": a["birth_year"]})
    for j in range(8):
        ol_authors.append({"source_id": f"OL{400 + j}A",
                           "name": names[200 + j], "birth_year": 1900 + j})

    # Goodreads: names for 30 authors (10 overlap the OL-matched block,
    # 20 are OL-unmatched), plus 2 homonym names listed twice.
    gr_authors = []
    gr_matched = wd_authors[45:75]
    for j, a in enumerate(gr_matched):
        gr_authors.append({"source_id": f"GR{100 + j}", "name": a["name"]})
    for j, a in enumerate(wd_authors[75:77]):
        for copy in range(2):
            gr_authors.append({"source_id": f"GR{300 + 2 * j + copy}",
                               "name": a["name"]})

    wd_works = []
    for i, a in enumerate(wd_authors[:80]):
        for k in range(rng.randrange(1, 3)):
            wd_works.append({
                "source_id": f"W{i}_{k}",
                "title": title(rng),
                "author_source_ids": [a["source_id"]],
                "language": rng.choice(["en", "fr", "es", "pt"]),
                "subjects": rng.sample(SUBJECTS, rng.randrange(0, 3)),
                "blurb": f"A novel about {rng.choice(SUBJECTS)}." if rng.random() < 0.3 else None,
                "publish_year": a["birth_year"] + rng.randrange(25, 60),
                "isbn_list": [],
            })

    ol_works, ol_editions, all_isbns = [], [], []
    for j, a in enumerate(ol_matched):
        ol_id = f"OL{100 + j}A"
        for k in range(rng.randrange(1, 4)):
            isbns = [isbn13(rng)]
            all_isbns += isbns
            wid = f"OLW{j}_{k}"
            ol_works.append({
                "source_id": wid,
                "title": title(rng),
                "author_source_ids": [ol_id],
                "language": rng.choice(["en", "fr", "es"]),
                "subjects": rng.sample(SUBJECTS, rng.randrange(0, 2)),
                "blurb": None,
                "publish_year": None,
                "isbn_list": isbns,
            })
            for m in range(rng.randrange(1, 3)):
                ol_editions.append({
                    "source_id": f"{wid}E{m}",
                    "work_source_id": wid,
                    "publisher": rng.choice(PUBLISHERS),
                    "publish_year": a["birth_year"] + rng.randrange(25, 60),
                    "publish_country": rng.choice(WESTERN + COLONY),
                    "isbn": isbns[0],
                })

    gr_works = []
    for j, a in enumerate(gr_matched):
        if j < 10:
            continue  # these authors have OL precedence; GR works stay uncollected
        gr_id = f"GR{100 + j}"
        for k in range(rng.randrange(1, 3)):
            isbns = [isbn13(rng)] if rng.random() < 0.7 else []
            all_isbns += isbns
            gr_works.append({
                "source_id": f"GRW{j}_{k}",
                "title": title(rng),
                "author_source_ids": [gr_id],
                "subjects": rng.sample(SUBJECTS, rng.randrange(0, 2)),
                "blurb": None,
                "publish_year": None,
                "isbn_list": isbns,
            })

    gb_works = []
    for n, i in enumerate(sorted(rng.sample(range(len(all_isbns)),
                                            int(len(all_isbns) * 0.7)))):
        gb_works.append({
            "source_id": f"GB{n}",
            "title": f"gb-record-{n}",
            "author_source_ids": [],
            "subjects": rng.sample(SUBJECTS, 2),
            "blurb": f"Publisher synopsis {n}: {rng.choice(SUBJECTS)} and {rng.choice(SUBJECTS)}.",
            "publish_year": rng.randrange(1900, 2020),
            "isbn_list": [all_isbns[i]],
        })

    write_jsonl(out / "WD.authors.jsonl", wd_authors)
    write_jsonl(out / "WD.works.jsonl", wd_works)
    write_jsonl(out / "OL.authors.jsonl", ol_authors)
    write_jsonl(out / "OL.works.jsonl", ol_works)
    write_jsonl(out / "OL.editions.jsonl", ol_editions)
    write_jsonl(out / "GR.authors.jsonl", gr_authors)
    write_jsonl(out / "GR.works.jsonl", gr_works)
    write_jsonl(out / "GB.works.jsonl", gb_works)
    print(f"fixture corpus written to {out}/")


if __name__ == "__main__":
    main(*sys.argv[1:])
