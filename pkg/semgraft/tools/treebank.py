"""
Treebank tool

Parses, indexes and serializes Penn-Treebank-style constituency trees and
answers span / dominance queries. Bracket reading, writing, leaves and tree
positions go through nltk.Tree; the frozen Tree here adds the grafted
semantic part that nltk labels have no slot for.

Trees are immutable. Nodes are addressed by child-index paths from the root
(the root is the empty path), so structurally equal subtrees at different
positions never collide.
"""

import logging
import re
import sys
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

from nltk import Tree as NltkTree

from semgraft.errors import SpanError, TreeError, TreeParseError

logger = logging.getLogger(__name__)

NodePath = Tuple[int, ...]
LabelSplitter = Callable[[str], Tuple[str, Optional[str]]]

SEMANTIC_SEPARATOR = "-"

_BAD_SYMBOL = re.compile(r"[\s()]")
_OPEN_BRACKET = re.compile(r"\(")
_QUOTED = r"(?:'[^']*'|\"[^\"]*\"|\S+)"
_NLTK_ERROR = re.compile(
    rf"expected (?P<expected>{_QUOTED}) but got (?P<got>{_QUOTED})\s+at index (?P<offset>\d+)"
)


def render_label(syntactic: str, semantic: Optional[str]) -> str:
    """Flatten a (syntactic, semantic) pair into a tree label, e.g. NP + GPE -> NP-GPE."""
    if semantic is None:
        return syntactic
    return f"{syntactic}{SEMANTIC_SEPARATOR}{semantic}"


# ---------- domain types ----------
@dataclass(frozen=True)
class Tree:
    """
    A labeled ordered tree over a token sequence.

    Preterminals carry the token: a node has a token iff it has no children.
    `semantic` holds a grafted semantic part, kept apart from the syntactic
    label until serialization.
    """
    label: str
    children: Tuple["Tree", ...] = ()
    token: Optional[str] = None
    semantic: Optional[str] = None

    def __post_init__(self):
        if not self.label or _BAD_SYMBOL.search(self.label):
            raise TreeError(f"invalid label {self.label!r}")
        if self.semantic is not None and (not self.semantic or _BAD_SYMBOL.search(self.semantic)):
            raise TreeError(f"invalid semantic part {self.semantic!r}")
        if self.token is None and not self.children:
            raise TreeError(f"node {self.label} has neither token nor children")
        if self.token is not None:
            if self.children:
                raise TreeError(f"node {self.label} has both a token and children")
            if not self.token or _BAD_SYMBOL.search(self.token):
                raise TreeError(f"invalid token {self.token!r}")

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    @property
    def rendered_label(self) -> str:
        return render_label(self.label, self.semantic)

    @cached_property
    def nltk_view(self) -> NltkTree:
        """Flattened nltk.Tree for bracketing, leaves and tree positions; built once per node."""
        if self.is_leaf:
            return NltkTree(self.rendered_label, [self.token])
        return NltkTree(self.rendered_label, [c.nltk_view for c in self.children])


def leaf(label: str, token: str) -> Tree:
    return Tree(label=label, token=token)


def node(label: str, *children: Tree) -> Tree:
    return Tree(label=label, children=tuple(children))


@dataclass(frozen=True, order=True)
class Span:
    """Half-open token span [start, end)."""
    start: int
    end: int

    @property
    def width(self) -> int:
        return self.end - self.start

    def is_valid_for(self, length: int) -> bool:
        return 0 <= self.start < self.end <= length

    def validate(self, length: int) -> "Span":
        if not self.is_valid_for(length):
            raise SpanError(f"span {self} invalid for sentence of length {length}")
        return self

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def __str__(self) -> str:
        return f"[{self.start},{self.end})"


# ---------- parsing ----------
def _reason(expected: str, got: str, text: str, offset: int) -> str:
    if got == ")":
        return "unbalanced brackets: unexpected ')'"
    if expected == ")":
        return "unbalanced brackets: missing ')'"
    if expected == "end-of-string" or text[:offset].strip():
        return "trailing text after tree"
    return f"expected '(' but found {got!r}"


def _fromstring_error(text: str, message: str) -> TreeParseError:
    """Turn an nltk Tree.fromstring ValueError into a TreeParseError with its offset."""
    m = _NLTK_ERROR.search(message)
    if m is None:
        return TreeParseError(message.splitlines()[0], 0)
    offset = int(m.group("offset"))
    expected, got = m.group("expected").strip("'\""), m.group("got").strip("'\"")
    return TreeParseError(_reason(expected, got, text, offset), offset)


def _from_nltk(raw: NltkTree, opens: Iterator[int], split_label: Optional[LabelSplitter]) -> Tree:
    # constituents come out of a pre-order walk in the order of their '(' in the text
    offset = next(opens)
    label = raw.label()
    if not label:
        raise TreeParseError("empty constituent" if len(raw) == 0 else "constituent without a label", offset)
    if len(raw) == 0:
        raise TreeParseError(f"leaf {label} has no token", offset)
    tokens = [c for c in raw if isinstance(c, str)]
    if tokens and len(tokens) != len(raw):
        raise TreeParseError("token mixed with constituents", offset)
    if len(tokens) > 1:
        raise TreeParseError(f"second token {tokens[1]!r} in preterminal {label}", offset)

    syntactic, semantic = split_label(label) if split_label else (label, None)
    children = () if tokens else tuple(_from_nltk(c, opens, split_label) for c in raw)
    try:
        return Tree(syntactic, children, token=tokens[0] if tokens else None, semantic=semantic)
    except TreeError as e:
        raise TreeParseError(str(e), offset) from e


def parse_tree(text: str, split_label: Optional[LabelSplitter] = None) -> Tree:
    """
    Parse one bracketed tree such as "(S (NP (NNP Lebanon)) (VP (VBZ stands)))".

    An outer unlabeled wrapper "( ... )" is stripped. Errors carry the
    character offset where parsing failed. `split_label` maps a written label
    to its (syntactic, semantic) parts, so grafted trees read back as grafted.
    """
    if not text.strip():
        raise TreeParseError("empty input", 0)
    try:
        raw = NltkTree.fromstring(text)
    except ValueError as e:
        raise _fromstring_error(text, str(e)) from e

    opens = (m.start() for m in _OPEN_BRACKET.finditer(text))
    if raw.label() == "" and len(raw) > 0:
        wrapper = next(opens)
        if len(raw) > 1:
            raise TreeParseError("wrapper holds more than one tree", wrapper)
        if isinstance(raw[0], str):
            raise TreeParseError("constituent without a label", wrapper)
        raw = raw[0]
    return _from_nltk(raw, opens, split_label)


def serialize_tree(tree: Tree) -> str:
    """One-line bracketed form with grafted labels flattened."""
    return tree.nltk_view.pformat(margin=sys.maxsize)


def yield_tokens(tree: Tree) -> List[str]:
    return tree.nltk_view.leaves()


# ---------- navigation ----------
def iter_nodes(tree: Tree) -> Iterator[Tuple[NodePath, Tree]]:
    """Pre-order (path, node) pairs; paths are nltk tree positions."""
    view = tree.nltk_view
    for position in view.treepositions("preorder"):
        if isinstance(view[position], NltkTree):
            yield position, node_at(tree, position)


def node_at(tree: Tree, path: NodePath) -> Tree:
    current = tree
    for i in path:
        current = current.children[i]
    return current


def replace_at(tree: Tree, path: NodePath, new_node: Tree) -> Tree:
    """Return a copy of `tree` with the node at `path` swapped for `new_node`."""
    if not path:
        return new_node
    head, rest = path[0], path[1:]
    children = list(tree.children)
    children[head] = replace_at(children[head], rest, new_node)
    return replace(tree, children=tuple(children))


def node_count(tree: Tree) -> int:
    return sum(1 for _ in iter_nodes(tree))


# ---------- span index ----------
@dataclass
class SpanIndex:
    """
    Span of every node (by path) and, for every span, the nodes covering it
    exactly, ordered root-to-leaf.
    """
    tree: Tree
    length: int
    spans: Dict[NodePath, Span] = field(default_factory=dict)
    covering: Dict[Span, List[NodePath]] = field(default_factory=dict)

    def span_of(self, path: NodePath) -> Span:
        return self.spans[path]

    def nodes_covering(self, span: Span) -> List[NodePath]:
        return self.covering.get(span, [])

    def highest(self, span: Span) -> Optional[NodePath]:
        chain = self.covering.get(span)
        return chain[0] if chain else None

    def label_of(self, path: NodePath) -> str:
        return node_at(self.tree, path).rendered_label

    def child_spans(self, path: NodePath) -> List[Span]:
        n = node_at(self.tree, path)
        return [self.spans[path + (i,)] for i in range(len(n.children))]

    def lowest_containing(self, span: Span) -> NodePath:
        """Deepest node whose span contains `span`."""
        path: NodePath = ()
        while True:
            n = node_at(self.tree, path)
            for i in range(len(n.children)):
                if self.spans[path + (i,)].contains(span):
                    path = path + (i,)
                    break
            else:
                return path


def build_span_index(tree: Tree) -> SpanIndex:
    index = SpanIndex(tree=tree, length=0)

    def walk(current: Tree, path: NodePath, start: int) -> int:
        if current.is_leaf:
            end = start + 1
        else:
            end = start
            for i, child in enumerate(current.children):
                end = walk(child, path + (i,), end)
        span = Span(start, end)
        index.spans[path] = span
        return end

    index.length = walk(tree, (), 0)
    # pre-order visits a unary chain top-down, giving root-to-leaf order
    for path, _ in iter_nodes(tree):
        index.covering.setdefault(index.spans[path], []).append(path)
    return index


# ---------- files ----------
def read_tree_lines(lines: Iterable[str], split_label: Optional[LabelSplitter] = None) -> List[Optional[Tree]]:
    """One tree per line; a blank line is a sentence with no parse (None)."""
    trees: List[Optional[Tree]] = []
    for i, line in enumerate(lines):
        text = line.rstrip("\n")
        if not text.strip():
            logger.warning("[TREEBANK] sentence %d has no parse", i)
            trees.append(None)
            continue
        try:
            trees.append(parse_tree(text, split_label))
        except TreeParseError as e:
            raise TreeParseError(e.reason, e.offset, line_number=i) from e
    return trees


def read_tree_file(path: Union[str, Path], split_label: Optional[LabelSplitter] = None) -> List[Optional[Tree]]:
    with open(path, encoding="utf-8") as f:
        return read_tree_lines(f, split_label)


def format_tree_lines(trees: Iterable[Optional[Tree]]) -> List[str]:
    return ["" if t is None else serialize_tree(t) for t in trees]


def write_tree_file(path: Union[str, Path], trees: Iterable[Optional[Tree]]):
    with open(path, "w", encoding="utf-8") as f:
        for line in format_tree_lines(trees):
            f.write(line + "\n")
