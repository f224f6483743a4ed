"""Stage-per-command pipeline driver.

    kgef <command> --config <path> [--model <name>] [--portion <label>]
         [--seed <n>] [--out <dir>]

Commands run in order ingest, align, classify, build, stats, train,
expose, report (or `run` for all). Each stage checks its predecessor's
artifacts through a manifest of input hashes, and is idempotent: same
inputs and seed, byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import shutil
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import align, classify, embed, expose, kgstore, records, svg
from .embed import TrainConfig

STAGES = ("ingest", "align", "classify", "build", "stats", "train", "expose", "report")

# per-source input config keys -> (source, kind)
_SOURCE_FILES = {
    "wd_authors": ("WD", "authors"),
    "wd_works": ("WD", "works"),
    "wd_editions": ("WD", "editions"),
    "ol_authors": ("OL", "authors"),
    "ol_works": ("OL", "works"),
    "ol_editions": ("OL", "editions"),
    "gr_authors": ("GR", "authors"),
    "gr_works": ("GR", "works"),
    "gr_editions": ("GR", "editions"),
    "gb_works": ("GB", "works"),
}


class CliError(Exception):
    pass


@dataclass
class PipelineConfig:
    source_files: dict  # config key -> Path
    taxonomy: Path
    minorities: Path
    continents: Path
    out: Path
    seed: int = 0
    sample_size: int = 20
    k_levels: tuple = (0.01, 0.05, 0.10)
    models: tuple = embed.MODELS
    portion: str | None = None
    relation_whitelist: tuple | None = None
    birth_year_cutoff: int = records.BIRTH_YEAR_CUTOFF
    train: TrainConfig = field(default_factory=TrainConfig)


def parse_config(path) -> PipelineConfig:
    """Flat key = value config file; paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    values = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{line_no}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    def path_of(key, required=False):
        if key not in values:
            if required:
                raise CliError(f"config missing required key {key!r}")
            return None
        return (base / values[key]).resolve()

    source_files = {}
    for key in _SOURCE_FILES:
        p = path_of(key)
        if p is not None:
            source_files[key] = p
    if "wd_authors" not in source_files:
        raise CliError("config must provide wd_authors (Wikidata is the graph spine)")

    k_levels = tuple(
        float(v) / 100.0 for v in values.get("k_levels", "1,5,10").split(","))
    models = tuple(values.get("models", ",".join(embed.MODELS)).split(","))
    for m in models:
        if m not in embed.MODELS:
            raise CliError(f"unknown model {m!r}")
    whitelist = values.get("relation_whitelist")

    seed = int(values.get("seed", 0))
    train_cfg = TrainConfig(
        epochs=int(values.get("epochs", 200)),
        learning_rate=float(values.get("learning_rate", 0.01)),
        margin=float(values.get("margin", 1.0)),
        negatives_per_positive=int(values.get("negatives", 1)),
        batch_size=int(values.get("batch_size", 32)),
        seed=seed,
        reg_lambda=float(values.get("reg_lambda", 1e-4)),
        dim=int(values.get("dim", 64)),
    )
    return PipelineConfig(
        source_files=source_files,
        taxonomy=path_of("taxonomy", required=True),
        minorities=path_of("minorities", required=True),
        continents=path_of("continents", required=True),
        out=path_of("out", required=True),
        seed=seed,
        sample_size=int(values.get("sample_size", 20)),
        k_levels=k_levels,
        models=models,
        portion=values.get("portion") or None,
        relation_whitelist=tuple(whitelist.split(",")) if whitelist else None,
        birth_year_cutoff=int(values.get("birth_year_cutoff", records.BIRTH_YEAR_CUTOFF)),
        train=train_cfg,
    )


# ---------------------------------------------------------------------------
# manifest

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json"


def _load_manifest(out: Path) -> dict:
    p = _manifest_path(out)
    if p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    return {"stages": {}}


def _record_stage(out: Path, stage: str, inputs, outputs) -> None:
    manifest = _load_manifest(out)

    def input_key(p: Path) -> str:
        try:
            return str(p.relative_to(out))
        except ValueError:
            return str(p)

    manifest["stages"][stage] = {
        "inputs": {input_key(Path(p)): _sha256(Path(p))
                   for p in sorted(map(str, inputs))},
        "outputs": {str(Path(p).relative_to(out)): _sha256(Path(p))
                    for p in sorted(map(str, outputs))},
    }
    _manifest_path(out).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _require_stage(out: Path, stage: str) -> None:
    manifest = _load_manifest(out)
    entry = manifest["stages"].get(stage)
    if entry is None:
        raise CliError(f"missing predecessor stage: {stage}")
    for rel in entry["outputs"]:
        if not (out / rel).exists():
            raise CliError(f"missing predecessor stage: {stage} (artifact {rel} gone)")


# ---------------------------------------------------------------------------
# stage helpers

def _ingested_path(out: Path, source: str, kind: str) -> Path:
    return out / "ingested" / f"{source}.{kind}.jsonl"


def _write_records(path: Path, recs) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in recs:
            fh.write(records.record_to_line(rec))
            fh.write("\n")


def _read_records(path: Path, source: str, kind: str):
    return records.parse_source_file(path, source, kind).records


def cmd_ingest(cfg: PipelineConfig) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    inputs, outputs = [], []
    report_rows = []
    for key, path in sorted(cfg.source_files.items()):
        source, kind = _SOURCE_FILES[key]
        result = records.parse_source_file(path, source, kind)
        recs = result.records
        if source == "WD" and kind == "authors":
            recs, removed = records.filter_by_birth_year(recs, cfg.birth_year_cutoff)
            report_rows.append((f"{source}.{kind}", "filtered_pre_cutoff", removed))
        for w in result.warnings:
            report_rows.append((f"{source}.{kind}", f"line {w.line_no} [{w.level}]", w.message))
        out_path = _ingested_path(cfg.out, source, kind)
        _write_records(out_path, recs)
        inputs.append(path)
        outputs.append(out_path)
    report = cfg.out / "ingest_report.csv"
    with open(report, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["file", "note", "detail"])
        writer.writerows(sorted(report_rows, key=lambda r: (r[0], str(r[1]), str(r[2]))))
    outputs.append(report)
    _record_stage(cfg.out, "ingest", inputs, outputs)


def _load_ingested(cfg: PipelineConfig, key: str):
    source, kind = _SOURCE_FILES[key]
    path = _ingested_path(cfg.out, source, kind)
    if key not in cfg.source_files or not path.exists():
        return []
    return _read_records(path, source, kind)


def cmd_align(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "ingest")
    wd = _load_ingested(cfg, "wd_authors")
    ol = _load_ingested(cfg, "ol_authors")
    gr = _load_ingested(cfg, "gr_authors")
    ol_result = align.match_openlibrary(wd, ol)
    gr_result = align.match_goodreads(wd, gr)
    entities = align.resolve_precedence(wd, ol_result.pairs, gr_result.pairs)

    entities_path = cfg.out / "entities.jsonl"
    with open(entities_path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entities:
            fh.write(json.dumps(e.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    report_path = cfg.out / "alignment.csv"
    align.write_alignment_report(report_path, ol_result, gr_result)
    inputs = [_ingested_path(cfg.out, "WD", "authors")]
    if ol:
        inputs.append(_ingested_path(cfg.out, "OL", "authors"))
    if gr:
        inputs.append(_ingested_path(cfg.out, "GR", "authors"))
    _record_stage(cfg.out, "align", inputs, [entities_path, report_path])


def _load_entities(cfg: PipelineConfig):
    path = cfg.out / "entities.jsonl"
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(align.AuthorEntity.from_dict(json.loads(line)))
    return out


def cmd_classify(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "align")
    entities = _load_entities(cfg)
    taxonomy = classify.load_taxonomy(cfg.taxonomy)
    minorities = classify.load_minorities(cfg.minorities)
    assignments, errors = classify.classify_corpus(entities, taxonomy, minorities)

    a_path = cfg.out / "assignments.csv"
    with open(a_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["canonical_id", "status", "basis", "generation", "gender"])
        for a in sorted(assignments, key=lambda a: a.canonical_id):
            writer.writerow([a.canonical_id, a.status, a.basis, a.generation, a.gender])
    e_path = cfg.out / "classify_errors.csv"
    with open(e_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["error"])
        for err in sorted(errors):
            writer.writerow([err])
    _record_stage(cfg.out, "classify",
                  [cfg.out / "entities.jsonl", cfg.taxonomy, cfg.minorities],
                  [a_path, e_path])


def _load_assignments(cfg: PipelineConfig) -> dict:
    out = {}
    with open(cfg.out / "assignments.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["canonical_id"]] = classify.StatusAssignment(
                canonical_id=row["canonical_id"], status=row["status"],
                basis=row["basis"], generation=row["generation"],
                gender=row["gender"])
    return out


def _collectable_works(entities, works):
    """Work-collection policy: WD works always; external works only via
    the author's designated work source, with all author ids mappable."""
    by_source_id = {}
    work_source = {}
    for e in entities:
        for src, sid in e.cross_ids.items():
            by_source_id[(src, sid)] = e.canonical_id
            work_source[(src, sid)] = e.work_source
    kept, dropped = [], 0
    for w in works:
        mapped = [(w.source, a) in by_source_id for a in w.author_source_ids]
        if not w.author_source_ids or not all(mapped):
            dropped += 1
            continue
        if w.source != "WD" and any(
                work_source[(w.source, a)] != w.source for a in w.author_source_ids):
            dropped += 1
            continue
        kept.append(w)
    return kept, dropped


def cmd_build(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "classify")
    entities = _load_entities(cfg)
    assignments = _load_assignments(cfg)
    works = (_load_ingested(cfg, "wd_works") + _load_ingested(cfg, "ol_works")
             + _load_ingested(cfg, "gr_works"))
    editions = (_load_ingested(cfg, "wd_editions") + _load_ingested(cfg, "ol_editions")
                + _load_ingested(cfg, "gr_editions"))
    gb_works = _load_ingested(cfg, "gb_works")
    gb_by_isbn = {}
    for g in gb_works:
        for i in g.isbn_list:
            gb_by_isbn.setdefault(i, g)

    works, dropped = _collectable_works(entities, works)
    kept_ids = {(w.source, w.source_id) for w in works}
    editions = [e for e in editions if (e.source, e.work_source_id) in kept_ids]
    align.join_isbn(works + editions, gb_by_isbn)

    graph = kgstore.build_graph(entities, assignments, works, editions)
    graph_path = cfg.out / "graph.nq"
    kgstore.serialize(graph, graph_path)
    note_path = cfg.out / "build_notes.csv"
    with open(note_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["note", "value"])
        writer.writerow(["works_dropped_by_collection_policy", dropped])
        writer.writerow(["entities", len(graph.entities)])
        writer.writerow(["triples", len(graph.triples)])
    _record_stage(cfg.out, "build", [cfg.out / "entities.jsonl"],
                  [graph_path, note_path])


def cmd_stats(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "build")
    graph = kgstore.deserialize(cfg.out / "graph.nq")
    assignments = _load_assignments(cfg)
    entities = _load_entities(cfg)

    works_per_author = Counter()
    seen = set()
    for t in graph.triples:
        if t.predicate == "attributedTo" and (t.subject, t.obj) not in seen:
            seen.add((t.subject, t.obj))
            works_per_author[t.obj] += 1
    report = classify.representation_stats(
        list(assignments.values()), works_per_author, total_authors=len(entities))
    stats_path = cfg.out / "stats.csv"
    classify.write_stats_report(stats_path, report)

    counts = kgstore.count_stats(graph)
    counts_path = cfg.out / "counts.csv"
    with open(counts_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["entity_type", "wikidata", "external", "total"])
        for kind in sorted(counts):
            c = counts[kind]
            writer.writerow([kind, c["wikidata"], c["external"], c["total"]])
    _record_stage(cfg.out, "stats",
                  [cfg.out / "graph.nq", cfg.out / "assignments.csv"],
                  [stats_path, counts_path])


def cmd_train(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "build")
    graph = kgstore.deserialize(cfg.out / "graph.nq")
    triples, entity_labels, relation_labels = embed.graph_to_triples(
        graph, cfg.relation_whitelist, cfg.portion)
    if not triples:
        raise CliError("no triples selected for training (check portion/whitelist)")

    ent_path = cfg.out / "entities.tsv"
    with open(ent_path, "w", encoding="utf-8", newline="\n") as fh:
        for i, label in enumerate(entity_labels):
            fh.write(f"{i}\t{label}\n")
    rel_path = cfg.out / "relations.tsv"
    with open(rel_path, "w", encoding="utf-8", newline="\n") as fh:
        for i, label in enumerate(relation_labels):
            fh.write(f"{i}\t{label}\n")

    outputs = [ent_path, rel_path]
    for model in cfg.models:
        params, _losses = embed.train(
            triples, len(entity_labels), len(relation_labels), model, cfg.train)
        p_path = cfg.out / f"params_{model}.npz"
        embed.save_params(p_path, params, cfg.train.seed)
        outputs.append(p_path)
    _record_stage(cfg.out, "train", [cfg.out / "graph.nq"], outputs)


def _load_entity_index(cfg: PipelineConfig) -> dict:
    index = {}
    with open(cfg.out / "entities.tsv", encoding="utf-8") as fh:
        for line in fh:
            i, label = line.rstrip("\n").split("\t", 1)
            index[label] = int(i)
    return index


def cmd_expose(cfg: PipelineConfig) -> None:
    _require_stage(cfg.out, "train")
    _require_stage(cfg.out, "classify")
    index = _load_entity_index(cfg)
    assignments = {cid: a.status for cid, a in _load_assignments(cfg).items()
                   if cid in index}
    country_of = {e.canonical_id: e.country_of_birth for e in _load_entities(cfg)}
    continent_map = {}
    with open(cfg.continents, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            continent_map[row["country_code"]] = row["continent"]

    western = sorted(a for a, s in assignments.items() if s == classify.WESTERN)
    if cfg.sample_size > len(western):
        raise CliError(
            f"sample_size {cfg.sample_size} exceeds Western population {len(western)}")
    rng = np.random.default_rng(cfg.seed)
    sample = sorted(rng.choice(western, size=cfg.sample_size, replace=False).tolist())

    reports = []
    flows_rows = []
    for model in cfg.models:
        params = embed.load_params(cfg.out / f"params_{model}.npz")
        rep = expose.exposure_ratios(
            params.entity_vecs, index, assignments, sample, model=model,
            portion_label=cfg.portion or "ALL", k_levels=cfg.k_levels)
        reports.append(rep)
        flows = expose.continent_flows(
            params.entity_vecs, index, assignments, sample, country_of, continent_map)
        for (west, trans), count in sorted(flows.items()):
            flows_rows.append([model, west, trans, count])

    exposure_path = cfg.out / "exposure.csv"
    expose.write_exposure_report(exposure_path, reports, cfg.k_levels)
    flows_path = cfg.out / "flows.csv"
    with open(flows_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "western_continent", "transnational_continent", "count"])
        writer.writerows(flows_rows)
    inputs = [cfg.out / f"params_{m}.npz" for m in cfg.models]
    inputs += [cfg.out / "assignments.csv", cfg.continents]
    _record_stage(cfg.out, "expose", inputs, [exposure_path, flows_path])


def cmd_report(cfg: PipelineConfig) -> None:
    for stage in ("stats", "expose"):
        _require_stage(cfg.out, stage)
    report_dir = cfg.out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name in ("stats.csv", "exposure.csv", "flows.csv"):
        dst = report_dir / name
        shutil.copyfile(cfg.out / name, dst)
        outputs.append(dst)

    gen_counts = []
    works_counts = {}
    with open(cfg.out / "stats.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["section"] == "cell":
                label = f"{row['generation']}/{row['gender']}/{row['status']}"
                gen_counts.append((label, int(row["count"])))
            elif row["section"] == "works_total":
                works_counts[row["status"]] = int(row["count"])
    gen_svg = report_dir / "generations.svg"
    gen_svg.write_text(
        svg.bar_chart(sorted(gen_counts), "Authors by generation, gender, status"),
        encoding="utf-8")
    treemap_svg = report_dir / "works_treemap.svg"
    treemap_svg.write_text(
        svg.treemap(sorted(works_counts.items()), "Works by author status"),
        encoding="utf-8")
    outputs += [gen_svg, treemap_svg]
    _record_stage(cfg.out, "report",
                  [cfg.out / "stats.csv", cfg.out / "exposure.csv", cfg.out / "flows.csv"],
                  outputs)


_COMMANDS = {
    "ingest": cmd_ingest,
    "align": cmd_align,
    "classify": cmd_classify,
    "build": cmd_build,
    "stats": cmd_stats,
    "train": cmd_train,
    "expose": cmd_expose,
    "report": cmd_report,
}


def run_pipeline(cfg: PipelineConfig) -> None:
    for stage in STAGES:
        _COMMANDS[stage](cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kgef", description="writers-and-works knowledge graph pipeline")
    parser.add_argument("command", choices=list(_COMMANDS) + ["run"])
    parser.add_argument("--config", required=True)
    parser.add_argument("--model", help="restrict training/exposure to one model "
                        "(or 'all')")
    parser.add_argument("--portion", help="train on one provenance portion (WD/OL/GR)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="override output directory")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        if args.out:
            cfg.out = Path(args.out).resolve()
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.train.seed = args.seed
        if args.portion:
            cfg.portion = args.portion
        if args.model and args.model != "all":
            if args.model not in embed.MODELS:
                raise CliError(f"unknown model {args.model!r}")
            cfg.models = (args.model,)
        if args.command == "run":
            run_pipeline(cfg)
        else:
            _COMMANDS[args.command](cfg)
    except (CliError, records.IngestError, kgstore.GraphError,
            embed.TrainingError) as exc:
        print(f"kgef: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
