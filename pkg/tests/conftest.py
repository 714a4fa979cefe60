import os
from pathlib import Path

import pytest

from specious.dataset import Dataset, load

# criterion name -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}

DATA_DIR = Path(os.environ.get("SPECIOUS_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def find_benchmark(stem: str):
    for ext in (".dat", ".csv", ".data"):
        p = DATA_DIR / (stem + ext)
        if p.exists():
            return p
    return None


def load_benchmark(path: Path) -> Dataset:
    """FIMI/CSV via the loaders; UCI ``name,attr,attr,...`` lists (plants.data) here."""
    if path.suffix != ".data":
        return load(path)
    rows = [line.strip().split(",")[1:] for line in
            path.read_text(encoding="latin-1").splitlines() if line.strip()]
    names = sorted({a for r in rows for a in r})
    index = {a: i for i, a in enumerate(names)}
    cols = [[] for _ in names]
    for i, r in enumerate(rows):
        for a in set(r):
            cols[index[a]].append(i)
    return Dataset.from_columns(len(rows), names, cols, source=str(path))


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE


@pytest.fixture
def three_line(tmp_path):
    p = tmp_path / "three.dat"
    p.write_text("1 2\n2 3\n1 2 3\n")
    return p


@pytest.fixture(scope="session")
def f1():
    from specious.synthgen import PlantSpec, plant_simpson
    return plant_simpson(PlantSpec(n=40, p_x=0.5, q_given_x=0.75, q_given_not_x=0.25,
                                   c_given_x=0.75, c_given_not_x=0.25,
                                   delta1=-0.00625, delta2=-0.00625, noise=0))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        tag = "N/A " if ok is None else ("PASS" if ok else "FAIL")
        tr.write_line(f"{tag}  {name}: {detail}")
