import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semgraft.errors import GraftError
from semgraft.tests.conftest import DATA_DIR, LEBANON, MAN_EATS, MAYOR, STUDENTS, token_spans, trees
from semgraft.tools.grafting import (
    AdjacentDaughters,
    Crossing,
    Exact,
    GraftCase,
    GraftedLabel,
    GraftReport,
    classify_match,
    graft_corpus,
    graft_one,
    graft_sentence,
    parse_grafted_tree,
)
from semgraft.tools.semtags import (
    MODALITY_LABELS, NE_LABELS, GraftOrder, SemanticTag, TagKind, sort_for_grafting,
)
from semgraft.tools.toydata import toy_corpus
from semgraft.tools.treebank import Span, build_span_index, iter_nodes, node_count, parse_tree, serialize_tree, yield_tokens

NE, TRIG, TARG = TagKind.NAMED_ENTITY, TagKind.MODALITY_TRIGGER, TagKind.MODALITY_TARGET


def tag(kind, label, start, end, sid=0):
    return SemanticTag(sid, Span(start, end), kind, label)


# ---------- match cases ----------
def test_classify_exact_picks_highest(lebanon):
    assert classify_match(lebanon, Span(0, 1)) == Exact((0,))


def test_classify_adjacent_daughters():
    assert classify_match(parse_tree(MAYOR), Span(1, 3)) == AdjacentDaughters((), 1, 3)


def test_classify_crossing():
    assert classify_match(parse_tree(MAN_EATS), Span(1, 3)) == Crossing()


# ---------- single grafts ----------
def test_lebanon_gets_np_gpe(lebanon):
    grafted, outcome = graft_one(lebanon, tag(NE, "GPE", 0, 1))
    assert outcome.case is GraftCase.EXACT_GRAFT
    assert serialize_tree(grafted) == "(S (NP-GPE (NNP Lebanon)) (VP (VBZ stands)))"


def test_rule_splitting_inserts_np():
    grafted, outcome = graft_one(parse_tree(MAYOR), tag(NE, "GPE", 1, 3))
    assert outcome.case is GraftCase.SPLIT_INSERT
    assert serialize_tree(grafted) == "(NP (DT the) (NP-GPE (NNP New) (NNP York)) (NN mayor))"


def test_crossing_is_noop():
    tree = parse_tree(MAN_EATS)
    grafted, outcome = graft_one(tree, tag(NE, "PERSON", 1, 3))
    assert outcome.case is GraftCase.CROSSING_SKIPPED
    assert grafted is tree


def test_modality_never_splits():
    tree = parse_tree(MAYOR)
    grafted, outcome = graft_one(tree, tag(TRIG, "Want", 1, 3))
    assert outcome.case is GraftCase.NO_NODE_SKIPPED
    assert grafted == tree


def test_full_sentence_span_grafts_root(lebanon):
    grafted, _ = graft_one(lebanon, tag(TARG, "Able", 0, 2))
    assert grafted.semantic == "TARG-Able"


# ---------- sentences ----------
def test_no_tags_unchanged(lebanon):
    grafted, report = graft_sentence(lebanon, [])
    assert grafted == lebanon
    assert report.total_tags == 0


def test_able_to_swim():
    tree = parse_tree(STUDENTS)
    grafted, report = graft_sentence(tree, [tag(TARG, "Able", 4, 6), tag(TRIG, "Able", 3, 4)])
    assert serialize_tree(grafted) == (
        "(S (NP (DT The) (NNS students)) (VP (VBP are) (ADJP (JJ-TRIG-Able able) "
        "(S-TARG-Able (VP (TO to) (VP (VB swim)))))))"
    )
    assert report.totals[GraftCase.EXACT_GRAFT.value] == 2


def test_target_beats_trigger_on_same_node():
    tree = parse_tree(STUDENTS)
    grafted, report = graft_sentence(tree, [tag(TARG, "Able", 3, 4), tag(TRIG, "Able", 3, 4)])
    jj = grafted.children[1].children[1].children[0]
    assert jj.semantic == "TARG-Able"
    assert report.totals[GraftCase.OVERLAY.value] == 1


def test_modality_overlays_entity(lebanon):
    grafted, _ = graft_sentence(lebanon, [tag(TARG, "Intend", 0, 1), tag(NE, "GPE", 0, 1)])
    assert grafted.children[0].semantic == "TARG-Intend"


def test_modality_first_lets_entity_win(lebanon):
    grafted, _ = graft_sentence(
        lebanon, [tag(TARG, "Intend", 0, 1), tag(NE, "GPE", 0, 1)], order=GraftOrder.MODALITY_FIRST,
    )
    assert grafted.children[0].semantic == "GPE"


def test_invalid_spans_reported_and_skipped(lebanon):
    tags = [tag(NE, "GPE", 0, 3), tag(NE, "GPE", 1, 1), tag(NE, "GPE", 0, 1)]
    grafted, report = graft_sentence(lebanon, tags)
    assert report.totals[GraftCase.INVALID_SPAN_SKIPPED.value] == 2
    assert report.total_tags == 3
    assert grafted.children[0].semantic == "GPE"


def test_grafted_label_parse():
    assert GraftedLabel.parse("NP-GPE") == GraftedLabel("NP", "GPE")
    assert GraftedLabel.parse("NP-GPE-ite") == GraftedLabel("NP", "GPE-ite")
    assert GraftedLabel.parse("VP-TARG-NOTAble") == GraftedLabel("VP", "TARG-NOTAble")
    assert GraftedLabel.parse("-NONE-") == GraftedLabel("-NONE-")
    assert GraftedLabel.parse("NP-SBJ") == GraftedLabel("NP-SBJ")
    assert GraftedLabel.parse("VP-TRIG-Hope") == GraftedLabel("VP", "TRIG-Hope")
    assert GraftedLabel.parse("NP-WEAPON") == GraftedLabel("NP-WEAPON")
    assert GraftedLabel.parse("NP-WEAPON", ["WEAPON"]) == GraftedLabel("NP", "WEAPON")


def test_grafted_tree_text_round_trip():
    grafted, _ = graft_sentence(parse_tree(STUDENTS), [tag(NE, "ORGANIZATION", 0, 2), tag(TARG, "Able", 4, 6)])
    text = serialize_tree(grafted)
    assert "NP-ORGANIZATION" in text and "S-TARG-Able" in text
    assert parse_grafted_tree(text) == grafted
    assert parse_tree(text) != grafted


# ---------- properties ----------
@st.composite
def tree_and_tags(draw, disjoint_entities: bool = False):
    tree = draw(trees())
    n = len(yield_tokens(tree))
    spans = token_spans(n)
    tags = []
    used = set()
    for _ in range(draw(st.integers(min_value=0, max_value=6))):
        kind = draw(st.sampled_from(list(TagKind)))
        label = draw(st.sampled_from(NE_LABELS if kind is NE else MODALITY_LABELS))
        start, end = draw(st.sampled_from(spans))
        if not disjoint_entities and draw(st.integers(0, 9)) == 0:
            start, end = end, start
        if disjoint_entities and kind is NE:
            if any(start < e and s < end for s, e in used):
                continue
            used.add((start, end))
        tags.append(tag(kind, label, start, end))
    return tree, tags


@given(tree_and_tags())
@settings(max_examples=1000, deadline=None)
def test_graft_properties(case):
    tree, tags = case
    grafted, report = graft_sentence(tree, tags)

    assert yield_tokens(grafted) == yield_tokens(tree)
    assert node_count(grafted) == node_count(tree) + report.totals[GraftCase.SPLIT_INSERT.value]
    assert report.total_tags == len(tags)

    # one tag per node: the last applicable tag for the node's span
    ordered = sort_for_grafting(tags)
    index = build_span_index(grafted)
    for path, node in iter_nodes(grafted):
        if node.semantic is None:
            continue
        span = index.span_of(path)
        assert index.highest(span) == path
        same_span = [t for t in ordered if t.span == span]
        assert same_span and same_span[-1].semantic_part == node.semantic

    again, _ = graft_sentence(grafted, tags)
    assert again == grafted

    # the same holds when the grafted tree goes through text
    assert parse_grafted_tree(serialize_tree(grafted)) == grafted
    once = serialize_tree(grafted)
    assert graft_corpus([once], {0: tags})[0] == [once]


@given(tree_and_tags(disjoint_entities=True), st.randoms(use_true_random=False))
@settings(max_examples=300, deadline=None)
def test_graft_permutation_insensitive(case, rnd):
    tree, tags = case
    shuffled = list(tags)
    rnd.shuffle(shuffled)
    assert graft_sentence(tree, shuffled)[0] == graft_sentence(tree, tags)[0]


def test_report_merge_associative():
    reports = []
    for sid, t in enumerate([LEBANON, MAYOR, MAN_EATS]):
        _, r = graft_sentence(parse_tree(t), [tag(NE, "GPE", 1, 3 if sid else 2, sid)], sentence_id=sid)
        reports.append(r)
    a, b, c = reports
    assert a.merge(b).merge(c) == a.merge(b.merge(c))
    assert a.merge(GraftReport()) == a


# ---------- corpus ----------
def test_toy_corpus_matches_golden_report():
    corpus = toy_corpus()
    _, report = graft_corpus(corpus.trees, corpus.tags_by_sentence())
    assert report.to_tsv() == (DATA_DIR / "toy_graft_report.tsv").read_text(encoding="utf-8")
    assert report.total_tags == len(corpus.tags)
    assert report.n_sentences == 50


def test_untagged_sentence_byte_identical():
    odd = "(S  (NP (NNP Lebanon))   (VP (VBZ stands)))"
    out, _ = graft_corpus([LEBANON, odd], {0: [tag(NE, "GPE", 0, 1)]})
    assert out[0] == "(S (NP-GPE (NNP Lebanon)) (VP (VBZ stands)))"
    assert out[1] == odd


def test_all_crossing_output_identical():
    lines = [MAN_EATS, MAN_EATS]
    tags = {0: [tag(NE, "PERSON", 1, 3)], 1: [tag(NE, "PERSON", 1, 3, sid=1)]}
    out, report = graft_corpus(lines, tags)
    assert out == lines
    assert report.totals[GraftCase.CROSSING_SKIPPED.value] == 2


def test_blank_tree_passes_through_and_counts_no_node():
    out, report = graft_corpus([LEBANON, ""], {1: [tag(NE, "GPE", 0, 1, sid=1)]})
    assert out == [LEBANON, ""]
    assert report.totals[GraftCase.NO_NODE_SKIPPED.value] == 1


def test_sentence_count_mismatch():
    with pytest.raises(GraftError, match="sentence count mismatch"):
        graft_corpus([LEBANON], {3: [tag(NE, "GPE", 0, 1, sid=3)]})


def test_kinds_filter():
    corpus = toy_corpus()
    _, report = graft_corpus(corpus.trees, corpus.tags_by_sentence(), kinds={NE})
    assert report.tags_by_kind[TRIG.value] == 0
    assert report.tags_by_kind[NE.value] > 0


def test_parallel_matches_serial():
    corpus = toy_corpus()
    serial = graft_corpus(corpus.trees, corpus.tags_by_sentence(), jobs=1)
    parallel = graft_corpus(corpus.trees, corpus.tags_by_sentence(), jobs=2)
    assert serial[0] == parallel[0]
    assert serial[1].totals == parallel[1].totals


def test_random_shuffle_of_corpus_tags_keeps_report():
    corpus = toy_corpus()
    tags = corpus.tags_by_sentence()
    rng = random.Random(7)
    shuffled = {sid: rng.sample(ts, len(ts)) for sid, ts in tags.items()}
    assert graft_corpus(corpus.trees, shuffled)[1].totals == graft_corpus(corpus.trees, tags)[1].totals


def test_regrafting_grafted_corpus_is_identity():
    corpus = toy_corpus()
    tags = corpus.tags_by_sentence()
    once, _ = graft_corpus(corpus.trees, tags)
    twice, report = graft_corpus(once, tags)
    assert twice == once
    assert report.totals[GraftCase.EXACT_GRAFT.value] == 0
    assert report.totals[GraftCase.SPLIT_INSERT.value] == 0
    assert report.totals[GraftCase.OVERLAY.value] == 98
    assert report.totals[GraftCase.CROSSING_SKIPPED.value] == 7


def test_extra_ne_labels_survive_regrafting():
    tags = {0: [tag(NE, "WEAPON", 0, 1)]}
    once, report = graft_corpus([LEBANON], tags, extra_ne_labels=["WEAPON"])
    assert once == ["(S (NP-WEAPON (NNP Lebanon)) (VP (VBZ stands)))"]
    assert report.totals[GraftCase.EXACT_GRAFT.value] == 1
    twice, report = graft_corpus(once, tags, extra_ne_labels=["WEAPON"])
    assert twice == once
    assert report.totals[GraftCase.OVERLAY.value] == 1
