import random
from pathlib import Path
from typing import List

import pytest
from hypothesis import strategies as st

from semgraft.tools.toydata import write_toy
from semgraft.tools.treebank import Tree, leaf, parse_tree

DATA_DIR = Path(__file__).parent / "data"

LEBANON = "(S (NP (NNP Lebanon)) (VP (VBZ stands)))"
MAYOR = "(NP (DT the) (NNP New) (NNP York) (NN mayor))"
MAN_EATS = "(S (NP (DT the) (NN man)) (VP (VBZ eats)))"
STUDENTS = "(S (NP (DT The) (NNS students)) (VP (VBP are) (ADJP (JJ able) (S (VP (TO to) (VP (VB swim)))))))"


@pytest.fixture
def lebanon() -> Tree:
    return parse_tree(LEBANON)


@pytest.fixture
def toy_files(tmp_path):
    """Toy and demo corpora written to a temp dir."""
    return write_toy(tmp_path / "toy")


@pytest.fixture(autouse=True)
def no_runlog(monkeypatch):
    monkeypatch.delenv("SEMGRAFT_RUNLOG", raising=False)


# ---------- random trees ----------
LABELS = ["S", "NP", "VP", "PP", "ADJP"]
POS = ["NN", "NNP", "VBZ", "DT", "JJ"]


def random_tree(rng: random.Random, n_tokens: int, depth: int = 0) -> Tree:
    """Random well-formed tree over tokens w0 .. w{n-1}; unary chains allowed."""
    counter = iter(range(n_tokens))

    def build(n: int, d: int) -> Tree:
        if n == 1 and (d > 3 or rng.random() < 0.5):
            return leaf(rng.choice(POS), f"w{next(counter)}")
        if n == 1:
            return Tree(rng.choice(LABELS), (build(1, d + 1),))
        k = rng.randint(2, min(n, 4))
        cuts = sorted(rng.sample(range(1, n), k - 1))
        sizes = [b - a for a, b in zip([0] + cuts, cuts + [n])]
        return Tree(rng.choice(LABELS), tuple(build(s, d + 1) for s in sizes))

    return build(n_tokens, depth)


@st.composite
def trees(draw, max_tokens: int = 8) -> Tree:
    n = draw(st.integers(min_value=1, max_value=max_tokens))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_tree(random.Random(seed), n)


def token_spans(n: int) -> List:
    return [(s, e) for s in range(n) for e in range(s + 1, n + 1)]
