import csv
import json
from pathlib import Path

import pytest

from kgef import cli, embed
from kgef.cli import CliError

from conftest import pipeline_config_text


def write_config(tmp_path, fixture_dir, configs_dir, out, **overrides) -> Path:
    cfg_path = tmp_path / "pipeline.cfg"
    cfg_path.write_text(
        pipeline_config_text(fixture_dir, configs_dir, out, **overrides))
    return cfg_path


# --- config parsing -----------------------------------------------------------

def test_parse_config_basics(tmp_path, fixture_dir, configs_dir):
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, tmp_path / "out",
                            seed=3, k_levels="1,5,10", models="TransE,DistMult")
    cfg = cli.parse_config(cfg_path)
    assert cfg.seed == 3 and cfg.train.seed == 3
    assert cfg.k_levels == (0.01, 0.05, 0.10)
    assert cfg.models == ("TransE", "DistMult")
    assert cfg.out == (tmp_path / "out").resolve()
    assert cfg.train.dim == 16 and cfg.train.epochs == 25


def test_relative_paths_resolve_against_config_dir(tmp_path, fixture_dir, configs_dir):
    rel = tmp_path / "rel.cfg"
    rel.write_text(
        "wd_authors = wd.jsonl\ntaxonomy = t.csv\nminorities = m.csv\n"
        "continents = c.csv\nout = out\n")
    for name in ("wd.jsonl", "t.csv", "m.csv", "c.csv"):
        (tmp_path / name).write_text("")
    cfg = cli.parse_config(rel)
    assert cfg.source_files["wd_authors"] == (tmp_path / "wd.jsonl").resolve()


def test_missing_required_key_fatal(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("wd_authors = x.jsonl\n")
    with pytest.raises(CliError, match="taxonomy"):
        cli.parse_config(p)


def test_wd_authors_required(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("taxonomy = t.csv\nminorities = m.csv\ncontinents = c.csv\nout = o\n")
    with pytest.raises(CliError, match="wd_authors"):
        cli.parse_config(p)


def test_unknown_model_in_config_fatal(tmp_path, fixture_dir, configs_dir):
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, tmp_path / "out",
                            models="TransZ")
    with pytest.raises(CliError, match="TransZ"):
        cli.parse_config(cfg_path)


def test_malformed_line_fatal(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("just some words\n")
    with pytest.raises(CliError, match=":1"):
        cli.parse_config(p)


# --- full pipeline on the bundled fixture ---------------------------------------

@pytest.fixture(scope="module")
def pipeline_out(tmp_path_factory, fixture_dir, configs_dir):
    tmp = tmp_path_factory.mktemp("pipeline")
    out = tmp / "out"
    cfg_path = write_config(tmp, fixture_dir, configs_dir, out,
                            models="TransE,DistMult", epochs=5)
    rc = cli.main(["run", "--config", str(cfg_path)])
    assert rc == 0
    return out, cfg_path


def test_all_stage_artifacts_present(pipeline_out):
    out, _ = pipeline_out
    for name in ("ingest_report.csv", "entities.jsonl", "alignment.csv",
                 "assignments.csv", "graph.nq", "stats.csv", "counts.csv",
                 "entities.tsv", "relations.tsv", "params_TransE.npz",
                 "params_DistMult.npz", "exposure.csv", "flows.csv",
                 "manifest.json", "report/generations.svg",
                 "report/works_treemap.svg"):
        assert (out / name).exists(), name


def test_manifest_records_every_stage(pipeline_out):
    out, _ = pipeline_out
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["stages"]) == set(cli.STAGES)
    for entry in manifest["stages"].values():
        assert entry["inputs"] and entry["outputs"]


def test_pre_cutoff_author_filtered(pipeline_out):
    out, _ = pipeline_out
    ingested = (out / "ingested" / "WD.authors.jsonl").read_text()
    assert "Q9999" not in ingested  # fixture's pre-cutoff author
    report = (out / "ingest_report.csv").read_text()
    assert "filtered_pre_cutoff" in report


def test_exposure_rows_per_model(pipeline_out):
    out, _ = pipeline_out
    with open(out / "exposure.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert sorted(r["model"] for r in rows) == ["DistMult", "TransE"]
    assert all(r["sample_size"] == "20" for r in rows)


def test_stage_rerun_is_idempotent(pipeline_out):
    out, cfg_path = pipeline_out
    before = (out / "assignments.csv").read_bytes()
    rc = cli.main(["classify", "--config", str(cfg_path)])
    assert rc == 0
    assert (out / "assignments.csv").read_bytes() == before


def test_seed_override_changes_exposure_sample(pipeline_out):
    out, cfg_path = pipeline_out
    before = (out / "exposure.csv").read_bytes()
    rc = cli.main(["expose", "--config", str(cfg_path), "--seed", "99"])
    assert rc == 0
    after = (out / "exposure.csv").read_bytes()
    # restore for the other tests in this module
    cli.main(["expose", "--config", str(cfg_path)])
    assert after != before


def test_missing_predecessor_stage_fails(tmp_path, fixture_dir, configs_dir, capsys):
    out = tmp_path / "out"
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, out)
    rc = cli.main(["train", "--config", str(cfg_path)])
    assert rc == 1
    assert "missing predecessor stage" in capsys.readouterr().err


def test_unknown_model_flag_fails(tmp_path, fixture_dir, configs_dir, capsys):
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, tmp_path / "out")
    rc = cli.main(["train", "--config", str(cfg_path), "--model", "FancyNet"])
    assert rc == 1
    assert "FancyNet" in capsys.readouterr().err


def test_single_model_flag_trains_one_file(tmp_path, fixture_dir, configs_dir):
    out = tmp_path / "out"
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, out, epochs=2)
    assert cli.main(["ingest", "--config", str(cfg_path)]) == 0
    assert cli.main(["align", "--config", str(cfg_path)]) == 0
    assert cli.main(["classify", "--config", str(cfg_path)]) == 0
    assert cli.main(["build", "--config", str(cfg_path)]) == 0
    assert cli.main(["train", "--config", str(cfg_path), "--model", "DistMult"]) == 0
    assert (out / "params_DistMult.npz").exists()
    assert not (out / "params_TransE.npz").exists()
    params = embed.load_params(out / "params_DistMult.npz")
    assert params.model == "DistMult" and params.dim == 16


def test_portion_flag_restricts_training_graph(tmp_path, fixture_dir, configs_dir):
    out = tmp_path / "out"
    cfg_path = write_config(tmp_path, fixture_dir, configs_dir, out, epochs=2,
                            models="DistMult")
    for stage in ("ingest", "align", "classify", "build"):
        assert cli.main([stage, "--config", str(cfg_path)]) == 0
    assert cli.main(["train", "--config", str(cfg_path)]) == 0
    full = len((out / "entities.tsv").read_text().splitlines())
    assert cli.main(["train", "--config", str(cfg_path), "--portion", "WD"]) == 0
    wd_only = len((out / "entities.tsv").read_text().splitlines())
    assert 0 < wd_only < full
