import pytest
from hypothesis import given, settings

from semgraft.errors import SpanError, TreeError, TreeParseError
from semgraft.tests.conftest import LEBANON, trees
from semgraft.tools.treebank import (
    Span,
    Tree,
    build_span_index,
    iter_nodes,
    leaf,
    node_at,
    parse_tree,
    read_tree_file,
    read_tree_lines,
    replace_at,
    serialize_tree,
    write_tree_file,
    yield_tokens,
)


# ---------- parsing ----------
def test_parse_lebanon(lebanon):
    assert lebanon.label == "S"
    assert [c.label for c in lebanon.children] == ["NP", "VP"]
    assert yield_tokens(lebanon) == ["Lebanon", "stands"]


def test_parse_single_path():
    tree = parse_tree("(X (Y a))")
    assert yield_tokens(tree) == ["a"]
    assert serialize_tree(tree) == "(X (Y a))"


def test_unbalanced_reports_offset():
    with pytest.raises(TreeParseError) as err:
        parse_tree("(S (NP a) (NP b)")
    assert err.value.offset == 16
    assert "unbalanced" in err.value.reason


@pytest.mark.parametrize("text,reason", [
    ("(S (NP a)))", "unbalanced"),
    ("(S ())", "empty constituent"),
    ("(S (NN))", "no token"),
    ("(S a (NP b))", "mixed"),
    ("(NN a b)", "second token"),
    ("(S (NP a)) (S (NP b))", "trailing"),
    ("(S (NP a)) b", "trailing"),
    (")", "unbalanced"),
    ("( (S a) (S b) )", "wrapper"),
    ("", "empty input"),
])
def test_parse_errors(text, reason):
    with pytest.raises(TreeParseError) as err:
        parse_tree(text)
    assert reason in err.value.reason


@pytest.mark.parametrize("text,offset", [
    ("(S (NN))", 3),
    ("(S ())", 3),
    ("(S a (NP b))", 0),
    ("(S (NP a) (NN b c))", 10),
    ("( (S (NN)) )", 5),
])
def test_structural_errors_point_at_constituent(text, offset):
    with pytest.raises(TreeParseError) as err:
        parse_tree(text)
    assert err.value.offset == offset
    assert text[offset] == "("


def test_split_label_hook():
    tree = parse_tree(LEBANON, split_label=lambda label: (label, "GPE") if label == "NP" else (label, None))
    assert node_at(tree, (0,)).semantic == "GPE"
    assert serialize_tree(tree) == "(S (NP-GPE (NNP Lebanon)) (VP (VBZ stands)))"


def test_preorder_paths(lebanon):
    assert [p for p, _ in iter_nodes(lebanon)] == [(), (0,), (0, 0), (1,), (1, 0)]
    assert [n.label for _, n in iter_nodes(lebanon)] == ["S", "NP", "NNP", "VP", "VBZ"]


def test_outer_wrapper_stripped():
    assert parse_tree("( " + LEBANON + " )") == parse_tree(LEBANON)


def test_tree_invariants():
    with pytest.raises(TreeError):
        Tree("NP")
    with pytest.raises(TreeError):
        Tree("NP", (leaf("NN", "a"),), token="b")
    with pytest.raises(TreeError):
        Tree("N P", token="a")


# ---------- serialization ----------
def test_serialize_roundtrip(lebanon):
    assert serialize_tree(lebanon) == LEBANON


def test_serialize_grafted(lebanon):
    np = node_at(lebanon, (0,))
    grafted = replace_at(lebanon, (0,), Tree(np.label, np.children, semantic="GPE"))
    assert serialize_tree(grafted) == "(S (NP-GPE (NNP Lebanon)) (VP (VBZ stands)))"
    assert grafted != lebanon


@given(trees())
@settings(max_examples=200)
def test_serialize_parse_inverse(tree):
    assert parse_tree(serialize_tree(tree)) == tree


# ---------- spans ----------
def test_span_validity():
    assert Span(0, 2).is_valid_for(2)
    for bad in (Span(-1, 1), Span(1, 1), Span(2, 1), Span(0, 3)):
        assert not bad.is_valid_for(2)
        with pytest.raises(SpanError):
            bad.validate(2)


def test_span_index_lebanon(lebanon):
    index = build_span_index(lebanon)
    assert index.length == 2
    assert index.span_of(()) == Span(0, 2)
    assert index.span_of((0,)) == Span(0, 1)
    assert index.span_of((1,)) == Span(1, 2)
    assert index.highest(Span(0, 1)) == (0,)


def test_unary_chain_root_to_leaf():
    tree = parse_tree("(A (B (C x)))")
    index = build_span_index(tree)
    chain = index.nodes_covering(Span(0, 1))
    assert [node_at(tree, p).label for p in chain] == ["A", "B", "C"]


def test_single_leaf_index():
    index = build_span_index(parse_tree("(NN x)"))
    assert index.span_of(()) == Span(0, 1)


@given(trees())
@settings(max_examples=200)
def test_child_spans_partition_parent(tree):
    index = build_span_index(tree)
    assert index.length == len(yield_tokens(tree))
    for path, n in iter_nodes(tree):
        if n.is_leaf:
            continue
        spans = index.child_spans(path)
        assert spans[0].start == index.span_of(path).start
        assert spans[-1].end == index.span_of(path).end
        assert all(a.end == b.start for a, b in zip(spans, spans[1:]))


# ---------- files ----------
def test_read_tree_lines_blank_is_none():
    trees_read = read_tree_lines([LEBANON + "\n", "\n", "(X (Y a))\n"])
    assert trees_read[1] is None
    assert len(trees_read) == 3


def test_read_tree_lines_reports_line():
    with pytest.raises(TreeParseError) as err:
        read_tree_lines([LEBANON, "(S (NP a)"])
    assert err.value.line_number == 1


def test_tree_file_round_trip(tmp_path, lebanon):
    path = tmp_path / "trees"
    write_tree_file(path, [lebanon, None])
    assert path.read_text(encoding="utf-8") == LEBANON + "\n\n"
    assert read_tree_file(path) == [lebanon, None]


def test_grafted_file_read_back_split(tmp_path, lebanon):
    np = node_at(lebanon, (0,))
    grafted = replace_at(lebanon, (0,), Tree(np.label, np.children, semantic="GPE"))
    path = tmp_path / "grafted"
    write_tree_file(path, [grafted])
    assert read_tree_file(path) != [grafted]
    split = {"NP-GPE": ("NP", "GPE")}
    assert read_tree_file(path, split_label=lambda label: split.get(label, (label, None))) == [grafted]
