import math
import random
from functools import lru_cache

import pytest

from semgraft.errors import ConfigError, ScoringError
from semgraft.tools.corpus import pairs_from_lines
from semgraft.tools.decoder import (
    DecoderConfig,
    WeightVector,
    decode,
    decode_corpus,
    derivation_to_string,
    format_kbest,
    read_weights,
    score_derivation,
    source_annotations,
)
from semgraft.tools.extraction import ExtractionConfig, Grammar, NonTerminal, ScfgRule, extract_corpus, score_grammar
from semgraft.tools.grafting import graft_corpus
from semgraft.tools.semtags import SemanticTag, TagKind
from semgraft.tools.toydata import semantic_demo, toy_corpus
from semgraft.tools.treebank import Span

P1 = {"p_tgt_given_src": 1.0, "p_src_given_tgt": 1.0}


def nt(label, k):
    return NonTerminal(label, k)


def rule(lhs, source, target, **features):
    return ScfgRule(lhs, tuple(source), tuple(target), {**P1, **features})


SOV = Grammar([
    rule("NP", ["admi"], ["man"]),
    rule("NP", ["roti"], ["bread"]),
    rule("V", ["khata"], ["eats"]),
    rule("S", [nt("NP", 1), nt("NP", 2), nt("V", 3)], [nt("NP", 1), nt("V", 3), nt("NP", 2)]),
])


# ---------- decoding ----------
def test_single_rule():
    result = decode(["a"], Grammar([rule("S", ["a"], ["x"])]))
    assert result.best_string() == "x"
    assert derivation_to_string(result.best) == ["x"]
    # one unary glue rule at weight -1
    assert result.best.score == pytest.approx(-1.0)


def test_sov_reordering():
    result = decode("admi roti khata".split(), SOV)
    assert derivation_to_string(result.best) == ["man", "eats", "bread"]


def test_kbest_ordered_by_score():
    grammar = Grammar([
        rule("X", ["a"], ["x"], p_tgt_given_src=0.75),
        rule("X", ["a"], ["y"], p_tgt_given_src=0.25),
    ])
    result = decode(["a"], grammar, config=DecoderConfig(k=2))
    assert [derivation_to_string(d) for d in result.derivations] == [["x"], ["y"]]
    scores = [d.score for d in result.derivations]
    assert scores == sorted(scores, reverse=True)
    assert scores[0] - scores[1] == pytest.approx(math.log(0.75) - math.log(0.25))


def test_score_matches_recomputation():
    weights = WeightVector()
    result = decode("admi roti khata".split(), SOV, weights, DecoderConfig(k=5))
    for d in result.derivations:
        assert score_derivation(d, weights) == pytest.approx(d.score)


def test_zero_weights_zero_score():
    result = decode(["a"], Grammar([rule("S", ["a"], ["x"])]), WeightVector(weights={}))
    assert result.best.score == 0.0


def test_oov_passthrough():
    result = decode(["a", "zz"], Grammar([rule("S", ["a"], ["x"])]))
    assert result.best_string() == "x zz"


def test_untranslatable_reports_uncovered():
    config = DecoderConfig(oov_passthrough=False)
    result = decode(["a", "zz"], Grammar([rule("S", ["a"], ["x"])]), config=config, sentence_id=4)
    assert not result.translatable
    assert result.uncovered == [Span(1, 2)]
    assert format_kbest(result) == ["4 ||| 0 |||  ||| untranslatable uncovered=[1,2)"]


def test_empty_sentence_untranslatable():
    assert not decode([], SOV).translatable


def test_nonpositive_probability_rejected():
    grammar = Grammar([rule("S", ["a"], ["x"], p_tgt_given_src=0.0)])
    with pytest.raises(ScoringError):
        decode(["a"], grammar)


def test_kbest_lines():
    result = decode(["a"], Grammar([rule("S", ["a"], ["x"])]), sentence_id=2)
    assert format_kbest(result) == ["2 ||| 0 ||| x ||| -1.000000"]


# ---------- exhaustive oracle ----------
def random_grammar(rng: random.Random) -> Grammar:
    labels = ["A", "B"]
    rules = {}
    for word in "abc":
        for out in rng.sample(["x", "y", "z"], 2):
            r = rule(rng.choice(labels), [word], [out], p_tgt_given_src=rng.uniform(0.05, 1.0))
            rules[r] = r
    for _ in range(4):
        l1, l2, lhs = rng.choice(labels), rng.choice(labels), rng.choice(labels)
        word = rng.choice("abc")
        shape = rng.choice([
            ([nt(l1, 1), word, nt(l2, 2)], [nt(l2, 2), nt(l1, 1)]),
            ([word, nt(l1, 1)], [nt(l1, 1), "w"]),
            ([nt(l1, 1), nt(l2, 2)], [nt(l2, 2), nt(l1, 1)]),
        ])
        r = rule(lhs, *shape, p_tgt_given_src=rng.uniform(0.05, 1.0))
        rules[r] = r
    return Grammar(list(rules.values()))


def oracle_best(tokens, grammar: Grammar, weights: WeightVector) -> float:
    """Best goal score by plain recursion over all rule applications."""
    n = len(tokens)
    labels = {r.lhs for r in grammar.rules}

    @lru_cache(maxsize=None)
    def best(label, i, j) -> float:
        top = -math.inf
        for r in grammar.rules:
            if r.lhs == label:
                top = max(top, weights.score_rule(r) + fill(r.source, 0, i, j))
        return top

    def fill(symbols, s, i, j) -> float:
        if s == len(symbols):
            return 0.0 if i == j else -math.inf
        sym = symbols[s]
        if not isinstance(sym, NonTerminal):
            if i < j and tokens[i] == sym:
                return fill(symbols, s + 1, i + 1, j)
            return -math.inf
        top = -math.inf
        for q in range(i + 1, j + 1):
            head = best(sym.label, i, q)
            if head > -math.inf:
                top = max(top, head + fill(symbols, s + 1, q, j))
        return top

    @lru_cache(maxsize=None)
    def goal(j) -> float:
        top = max(best(label, 0, j) for label in labels) - 1.0
        for m in range(1, j):
            top = max(top, goal(m) + max(best(label, m, j) for label in labels) - 1.0)
        return top

    return goal(n)


def test_one_best_matches_exhaustive_oracle():
    rng = random.Random(3)
    weights = WeightVector()
    for _ in range(60):
        grammar = random_grammar(rng)
        tokens = [rng.choice("abc") for _ in range(rng.randint(1, 5))]
        result = decode(tokens, grammar, weights, DecoderConfig(k=1))
        assert result.best.score == pytest.approx(oracle_best(tokens, grammar, weights))


# ---------- grammars from corpora ----------
def extracted(corpus, trees=None, mode="samt"):
    pairs = pairs_from_lines(corpus.source, corpus.target, corpus.alignment, trees or corpus.trees)
    config = ExtractionConfig(label_mode=mode)
    return score_grammar(extract_corpus(pairs, config), config.echo())


def test_training_sentences_round_trip():
    corpus = toy_corpus()
    grammar = extracted(corpus)
    results = decode_corpus([s.split() for s in corpus.source], grammar, config=DecoderConfig(k=100))
    found = sum(
        1 for result, target in zip(results, corpus.target)
        if target in {" ".join(derivation_to_string(d)) for d in result.derivations}
    )
    assert found >= 0.95 * len(corpus)


def test_entity_tag_changes_reordering():
    corpus, heldout = semantic_demo()
    tokens = heldout.source[0].split()

    samt = decode(tokens, extracted(corpus))
    assert samt.best_string() == "mayor of Karachi"

    grafted, _ = graft_corpus(corpus.trees, corpus.tags_by_sentence())
    sem = decode(tokens, extracted(corpus, grafted))
    assert sem.best_string() == heldout.references[0][0] == "Karachi mayor"

    tags = source_annotations(sem.best, sentence_id=0)
    assert SemanticTag(0, Span(0, 1), TagKind.NAMED_ENTITY, "GPE") in tags


def test_one_best_matches_oracle_on_toy_grammars():
    corpus = toy_corpus()
    grafted, _ = graft_corpus(corpus.trees, corpus.tags_by_sentence())
    weights = WeightVector()
    short = [s.split() for s in corpus.source if len(s.split()) <= 5]
    assert short
    for grammar in (extracted(corpus), extracted(corpus, grafted)):
        for tokens in short:
            result = decode(tokens, grammar, weights, DecoderConfig(k=1))
            assert result.best.score == pytest.approx(oracle_best(tokens, grammar, weights))


def test_annotations_use_extra_entity_labels():
    result = decode(["bandooq"], Grammar([rule("NP-WEAPON", ["bandooq"], ["gun"])]))
    assert source_annotations(result.best) == []
    assert source_annotations(result.best, sentence_id=3, extra_ne_labels=["WEAPON"]) == [
        SemanticTag(3, Span(0, 1), TagKind.NAMED_ENTITY, "WEAPON"),
    ]


def test_parallel_decode_matches_serial():
    corpus = toy_corpus()
    grammar = extracted(corpus)
    sentences = [s.split() for s in corpus.source[:12]]
    serial = [format_kbest(r) for r in decode_corpus(sentences, grammar, jobs=1)]
    parallel = [format_kbest(r) for r in decode_corpus(sentences, grammar, jobs=2)]
    assert serial == parallel


# ---------- weights ----------
def test_read_weights(tmp_path):
    path = tmp_path / "weights"
    path.write_text("p_tgt_given_src=0.5\nglue=-2\nword_penalty=-0.1\n", encoding="utf-8")
    weights = read_weights(path)
    assert weights.weights == {"p_tgt_given_src": 0.5, "glue": -2.0}
    assert weights.word_penalty == -0.1


def test_read_weights_rejects_text(tmp_path):
    path = tmp_path / "weights"
    path.write_text("glue=lots\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_weights(path)
