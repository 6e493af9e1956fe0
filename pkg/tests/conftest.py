import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the naive oracle module

from soe import Dataset, MissingPolicy

TOY_COLUMNS = {"A1": list("aaabc"), "A2": list("xxyxy")}


@pytest.fixture
def toy_dataset() -> Dataset:
    """5x2 dataset with column frequencies {a:3,b:1,c:1} and {x:3,y:2}."""
    return Dataset.from_tokens(TOY_COLUMNS)


@pytest.fixture
def toy_csv(tmp_path: Path) -> Path:
    path = tmp_path / "toy.csv"
    rows = zip(*TOY_COLUMNS.values())
    lines = [",".join(TOY_COLUMNS)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def random_token_columns(
    rng: random.Random,
    n_max: int = 200,
    d_max: int = 8,
    alphabet: int = 5,
    missing_rate: float = 0.0,
) -> list[list[str]]:
    """Random categorical token columns, optionally salted with '?' cells."""
    n = rng.randint(1, n_max)
    d = rng.randint(1, d_max)
    cols = []
    for _ in range(d):
        col = []
        for _ in range(n):
            if missing_rate and rng.random() < missing_rate:
                col.append("?")
            else:
                col.append(f"v{rng.randrange(alphabet)}")
        cols.append(col)
    return cols


def dataset_from_columns(
    cols: list[list[str]], policy: MissingPolicy = MissingPolicy.SPECIAL
) -> Dataset:
    return Dataset.from_tokens(
        {f"A{i + 1}": col for i, col in enumerate(cols)}, policy=policy
    )
