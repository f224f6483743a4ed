import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"
CONFIGS = REPO / "configs"

sys.path.insert(0, str(REPO / "scripts"))


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    if not (FIXTURES / "WD.authors.jsonl").exists():
        import make_fixture

        make_fixture.main(str(FIXTURES))
    return FIXTURES


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIGS


def pipeline_config_text(fixture_dir: Path, configs_dir: Path, out: Path,
                         seed: int = 7, **overrides) -> str:
    values = {
        "wd_authors": fixture_dir / "WD.authors.jsonl",
        "wd_works": fixture_dir / "WD.works.jsonl",
        "ol_authors": fixture_dir / "OL.authors.jsonl",
        "ol_works": fixture_dir / "OL.works.jsonl",
        "ol_editions": fixture_dir / "OL.editions.jsonl",
        "gr_authors": fixture_dir / "GR.authors.jsonl",
        "gr_works": fixture_dir / "GR.works.jsonl",
        "gb_works": fixture_dir / "GB.works.jsonl",
        "taxonomy": configs_dir / "taxonomy.csv",
        "minorities": configs_dir / "minorities.csv",
        "continents": configs_dir / "continents.csv",
        "out": out,
        "seed": seed,
        "sample_size": 20,
        "dim": 16,
        "epochs": 25,
        "batch_size": 32,
    }
    values.update(overrides)
    return "\n".join(f"{k} = {v}" for k, v in values.items()) + "\n"
