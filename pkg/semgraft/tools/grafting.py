"""
Grafting tool

Attaches semantic tags (named entities, modality triggers and targets) to
syntactic constituents of a parse tree:

  - exact span match    -> graft onto the highest node covering the span
  - adjacent daughters  -> (named entities only) insert an NP node over the run
  - already tagged node -> overlay the new tag
  - crossing brackets   -> do nothing

Precedence is realized by application order: tags are sorted with
semtags.sort_for_grafting and the last tag applied to a node wins.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from pydantic import BaseModel, Field

from semgraft.errors import GraftError, TreeParseError
from semgraft.services.workers import map_ordered
from semgraft.tools.semtags import (
    GraftOrder, SemanticTag, TagKind, is_known_label, sort_for_grafting, split_semantic_part,
)
from semgraft.tools.treebank import (
    SEMANTIC_SEPARATOR, NodePath, Span, SpanIndex, Tree, build_span_index, node_at, parse_tree,
    render_label, replace_at, serialize_tree,
)

logger = logging.getLogger(__name__)

SPLIT_LABEL = "NP"


class GraftCase(str, Enum):
    EXACT_GRAFT = "ExactGraft"
    SPLIT_INSERT = "SplitInsert"
    OVERLAY = "Overlay"
    CROSSING_SKIPPED = "CrossingSkipped"
    NO_NODE_SKIPPED = "NoNodeSkipped"
    INVALID_SPAN_SKIPPED = "InvalidSpanSkipped"


@dataclass(frozen=True)
class GraftedLabel:
    syntactic: str
    semantic: Optional[str] = None

    def render(self) -> str:
        return render_label(self.syntactic, self.semantic)

    @classmethod
    def of(cls, tree: Tree) -> "GraftedLabel":
        return cls(tree.label, tree.semantic)

    @classmethod
    def parse(cls, rendered: str, extra_ne_labels: Iterable[str] = ()) -> "GraftedLabel":
        """
        Split a rendered label at the first '-' whose remainder is a semantic
        part: a known or extra NE label, or any TRIG-/TARG- label. Labels with
        no such split are purely syntactic.
        """
        extra = tuple(extra_ne_labels)
        pos = rendered.find(SEMANTIC_SEPARATOR)
        while pos > 0:
            kind, label = split_semantic_part(rendered[pos + 1:])
            if (kind.is_modality and label) or is_known_label(kind, label, extra):
                return cls(rendered[:pos], rendered[pos + 1:])
            pos = rendered.find(SEMANTIC_SEPARATOR, pos + 1)
        return cls(rendered)

    def split(self) -> Tuple[str, Optional[str]]:
        return self.syntactic, self.semantic


def parse_grafted_tree(text: str, extra_ne_labels: Iterable[str] = ()) -> Tree:
    """Parse a tree whose labels may already carry grafted semantic parts."""
    extra = tuple(extra_ne_labels)
    return parse_tree(text, split_label=lambda rendered: GraftedLabel.parse(rendered, extra).split())


@dataclass(frozen=True)
class GraftOutcome:
    case: GraftCase
    node_path: Optional[NodePath] = None


# ---------- match cases ----------
@dataclass(frozen=True)
class Exact:
    path: NodePath


@dataclass(frozen=True)
class AdjacentDaughters:
    parent: NodePath
    first: int
    stop: int  # exclusive child index


@dataclass(frozen=True)
class Crossing:
    pass


MatchCase = Union[Exact, AdjacentDaughters, Crossing]


def classify_match(tree: Tree, span: Span, index: Optional[SpanIndex] = None) -> MatchCase:
    """Decide which grafting case applies to `span` in `tree`."""
    index = index or build_span_index(tree)
    span.validate(index.length)

    highest = index.highest(span)
    if highest is not None:
        return Exact(highest)

    parent = index.lowest_containing(span)
    child_spans = index.child_spans(parent)
    first = next((i for i, s in enumerate(child_spans) if s.start == span.start), None)
    last = next((i for i, s in enumerate(child_spans) if s.end == span.end), None)
    if first is not None and last is not None and first < last:
        return AdjacentDaughters(parent, first, last + 1)
    return Crossing()


def graft_one(tree: Tree, tag: SemanticTag, index: Optional[SpanIndex] = None) -> Tuple[Tree, GraftOutcome]:
    index = index or build_span_index(tree)
    match = classify_match(tree, tag.span, index)
    semantic = tag.semantic_part

    if isinstance(match, Exact):
        target = node_at(tree, match.path)
        case = GraftCase.OVERLAY if target.semantic is not None else GraftCase.EXACT_GRAFT
        grafted = replace_at(tree, match.path, replace(target, semantic=semantic))
        return grafted, GraftOutcome(case, match.path)

    if isinstance(match, AdjacentDaughters):
        if tag.kind is not TagKind.NAMED_ENTITY:
            return tree, GraftOutcome(GraftCase.NO_NODE_SKIPPED, match.parent)
        parent = node_at(tree, match.parent)
        run = parent.children[match.first:match.stop]
        inserted = Tree(label=SPLIT_LABEL, children=run, semantic=semantic)
        children = parent.children[:match.first] + (inserted,) + parent.children[match.stop:]
        grafted = replace_at(tree, match.parent, replace(parent, children=children))
        return grafted, GraftOutcome(GraftCase.SPLIT_INSERT, match.parent + (match.first,))

    return tree, GraftOutcome(GraftCase.CROSSING_SKIPPED)


# ---------- reports ----------
class GraftReport(BaseModel):
    """Outcome counts per sentence and for the whole corpus."""
    sentences: Dict[int, Dict[str, int]] = Field(default_factory=dict)
    totals: Dict[str, int] = Field(default_factory=lambda: {c.value: 0 for c in GraftCase})
    tags_by_kind: Dict[str, int] = Field(default_factory=lambda: {k.value: 0 for k in TagKind})
    n_sentences: int = 0

    def record(self, sentence_id: int, tag: SemanticTag, outcome: GraftOutcome):
        per_sentence = self.sentences.setdefault(sentence_id, {})
        per_sentence[outcome.case.value] = per_sentence.get(outcome.case.value, 0) + 1
        self.totals[outcome.case.value] += 1
        self.tags_by_kind[tag.kind.value] += 1

    def merge(self, other: "GraftReport") -> "GraftReport":
        merged = GraftReport(n_sentences=self.n_sentences + other.n_sentences)
        for report in (self, other):
            for sid, counts in report.sentences.items():
                target = merged.sentences.setdefault(sid, {})
                for case, n in counts.items():
                    target[case] = target.get(case, 0) + n
            for case, n in report.totals.items():
                merged.totals[case] += n
            for kind, n in report.tags_by_kind.items():
                merged.tags_by_kind[kind] += n
        return merged

    @property
    def total_tags(self) -> int:
        return sum(self.totals.values())

    def density(self) -> Dict[str, float]:
        if self.n_sentences == 0:
            return {"ne_per_sentence": 0.0, "modality_per_sentence": 0.0}
        ne = self.tags_by_kind[TagKind.NAMED_ENTITY.value]
        mod = self.tags_by_kind[TagKind.MODALITY_TRIGGER.value] + self.tags_by_kind[TagKind.MODALITY_TARGET.value]
        return {"ne_per_sentence": ne / self.n_sentences, "modality_per_sentence": mod / self.n_sentences}

    def to_tsv(self) -> str:
        return "".join(f"{case.value}\t{self.totals[case.value]}\n" for case in GraftCase)


# ---------- sentence / corpus ----------
def graft_sentence(
    tree: Tree,
    tags: Sequence[SemanticTag],
    order: GraftOrder = GraftOrder.NE_FIRST,
    sentence_id: int = 0,
) -> Tuple[Tree, GraftReport]:
    """
    Apply all tags of one sentence in precedence order.

    Tags with an invalid span are reported and skipped.
    """
    report = GraftReport(n_sentences=1)
    index = build_span_index(tree)
    for tag in sort_for_grafting(tags, order):
        if not tag.span.is_valid_for(index.length):
            logger.warning(
                "[GRAFT] sentence %d: skipping %s %s, span %s invalid for length %d",
                sentence_id, tag.kind.value, tag.label, tag.span, index.length,
            )
            report.record(sentence_id, tag, GraftOutcome(GraftCase.INVALID_SPAN_SKIPPED))
            continue
        tree, outcome = graft_one(tree, tag, index)
        logger.debug(
            "[GRAFT] sentence %d: %s %s %s -> %s at %s",
            sentence_id, tag.kind.value, tag.label, tag.span, outcome.case.value, outcome.node_path,
        )
        report.record(sentence_id, tag, outcome)
        if outcome.case is GraftCase.SPLIT_INSERT:
            index = build_span_index(tree)
        elif outcome.case in (GraftCase.EXACT_GRAFT, GraftCase.OVERLAY):
            index = replace(index, tree=tree)
    return tree, report


def _graft_line(item: Tuple[int, str, List[SemanticTag], GraftOrder, Tuple[str, ...]]) -> Tuple[str, GraftReport]:
    sentence_id, line, tags, order, extra_ne_labels = item
    text = line.rstrip("\n")
    if not text.strip():
        report = GraftReport(n_sentences=1)
        for tag in tags:
            report.record(sentence_id, tag, GraftOutcome(GraftCase.NO_NODE_SKIPPED))
        if tags:
            logger.warning("[GRAFT] sentence %d has %d tags but no parse", sentence_id, len(tags))
        return "", report
    try:
        tree = parse_grafted_tree(text, extra_ne_labels)
    except TreeParseError as e:
        raise TreeParseError(e.reason, e.offset, line_number=sentence_id) from e
    grafted, report = graft_sentence(tree, tags, order, sentence_id)
    # untouched trees pass through byte-identical
    return (text if grafted == tree else serialize_tree(grafted)), report


def graft_corpus(
    tree_lines: Sequence[str],
    tags_by_sentence: Dict[int, List[SemanticTag]],
    order: GraftOrder = GraftOrder.NE_FIRST,
    kinds: Optional[Iterable[TagKind]] = None,
    jobs: int = 1,
    extra_ne_labels: Iterable[str] = (),
) -> Tuple[List[str], GraftReport]:
    """
    Graft a whole corpus; line i of the output is sentence i.

    `kinds` restricts grafting to some tag kinds (e.g. named entities only).
    Input trees may already be grafted; their semantic parts are read back
    so grafting a grafted corpus again leaves it unchanged.
    """
    n = len(tree_lines)
    if tags_by_sentence:
        last_id = max(tags_by_sentence)
        if last_id >= n:
            raise GraftError(
                f"sentence count mismatch: standoff file references {last_id + 1} sentences, "
                f"tree file has {n}"
            )
    wanted: Optional[Set[TagKind]] = set(kinds) if kinds is not None else None
    extra = tuple(extra_ne_labels)

    items = []
    for sid, line in enumerate(tree_lines):
        tags = tags_by_sentence.get(sid, [])
        if wanted is not None:
            tags = [t for t in tags if t.kind in wanted]
        items.append((sid, line, tags, order, extra))

    output: List[str] = []
    report = GraftReport()
    for line, sentence_report in map_ordered(_graft_line, items, jobs):
        output.append(line)
        report = report.merge(sentence_report)
    logger.info("[GRAFT] grafted %d sentences, %d tags: %s", n, report.total_tags, report.totals)
    return output, report
