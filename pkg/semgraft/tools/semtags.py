"""
Semantic tag tool

Named-entity and modality tag inventories, standoff annotation parsing and
the precedence ordering used by the grafter.

Standoff lines are tab-separated:
    sentence_id  start  end  kind  label
with kind one of NE / TRIG / TARG. Lines starting with '#' are comments.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple

from semgraft.errors import StandoffError
from semgraft.tools.treebank import Span

logger = logging.getLogger(__name__)

NE_LABELS = (
    "AGE", "DATE", "FACILITY", "GPE", "GPE-ite", "LOCATION", "MONEY",
    "OCCUPATION", "ORGANIZATION", "ORGANIZATION-ite", "PERCENT", "PERSON", "TIME",
)

# Listed most specific (Require) to least specific (Negation).
MODALITY_LABELS = (
    "Require", "NOTPermit",
    "Permit", "NOTRequire",
    "Succeed", "NOTSucceed",
    "SucceedNegation", "NOTSucceedNegation",
    "Effort", "NOTEffort",
    "EffortNegation", "NOTEffortNegation",
    "Intend", "NOTIntend",
    "IntendNegation", "NOTIntendNegation",
    "Able", "NOTAble",
    "AbleNegation", "NOTAbleNegation",
    "Want", "NOTWant",
    "Belief", "NOTBelief",
    "Firm_Belief", "NOTFirm_Belief",
    "Negation",
)

SPECIFICITY = {label: len(MODALITY_LABELS) - 1 - i for i, label in enumerate(MODALITY_LABELS)}
UNKNOWN_SPECIFICITY = -1


class TagKind(str, Enum):
    NAMED_ENTITY = "NE"
    MODALITY_TRIGGER = "TRIG"
    MODALITY_TARGET = "TARG"

    @property
    def is_modality(self) -> bool:
        return self is not TagKind.NAMED_ENTITY


class GraftOrder(str, Enum):
    NE_FIRST = "ne-first"
    MODALITY_FIRST = "modality-first"


PHASES = {
    GraftOrder.NE_FIRST: {
        TagKind.NAMED_ENTITY: 0, TagKind.MODALITY_TRIGGER: 1, TagKind.MODALITY_TARGET: 2,
    },
    GraftOrder.MODALITY_FIRST: {
        TagKind.MODALITY_TRIGGER: 0, TagKind.MODALITY_TARGET: 1, TagKind.NAMED_ENTITY: 2,
    },
}


@dataclass(frozen=True)
class SemanticTag:
    sentence_id: int
    span: Span
    kind: TagKind
    label: str

    @property
    def semantic_part(self) -> str:
        """The string grafted onto a node: GPE, TRIG-Able, TARG-Able, ..."""
        if self.kind is TagKind.NAMED_ENTITY:
            return self.label
        return f"{self.kind.value}-{self.label}"


class PrecedenceKey(NamedTuple):
    phase: int
    specificity: int


def precedence_key(tag: SemanticTag, order: GraftOrder = GraftOrder.NE_FIRST) -> PrecedenceKey:
    """Ascending keys put the tag that must win last."""
    phase = PHASES[order][tag.kind]
    if tag.kind is TagKind.NAMED_ENTITY:
        return PrecedenceKey(phase, 0)
    return PrecedenceKey(phase, SPECIFICITY.get(tag.label, UNKNOWN_SPECIFICITY))


def sort_for_grafting(tags: Sequence[SemanticTag], order: GraftOrder = GraftOrder.NE_FIRST) -> List[SemanticTag]:
    # sorted() is stable, so equal keys keep file order
    return sorted(tags, key=lambda t: precedence_key(t, order))


def is_known_label(kind: TagKind, label: str, extra_ne_labels: Iterable[str] = ()) -> bool:
    if kind is TagKind.NAMED_ENTITY:
        return label in NE_LABELS or label in set(extra_ne_labels)
    return label in SPECIFICITY


def split_semantic_part(semantic: str) -> Tuple[TagKind, str]:
    """Recover (kind, label) from a grafted semantic part such as TARG-Able."""
    for kind in (TagKind.MODALITY_TRIGGER, TagKind.MODALITY_TARGET):
        prefix = f"{kind.value}-"
        if semantic.startswith(prefix):
            return kind, semantic[len(prefix):]
    return TagKind.NAMED_ENTITY, semantic


# ---------- standoff files ----------
def parse_standoff(
    lines: Iterable[str],
    allow_extra_labels: bool = False,
    extra_ne_labels: Iterable[str] = (),
) -> Dict[int, List[SemanticTag]]:
    """
    Group standoff tags by sentence id.

    Spans are not checked against sentence length here; that happens at
    graft time, when the tree is known.
    """
    extra = set(extra_ne_labels)
    by_sentence: Dict[int, List[SemanticTag]] = {}
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise StandoffError(f"expected 5 tab-separated columns, found {len(cols)}", line_number)
        sid, start, end, kind_text, label = (c.strip() for c in cols)
        try:
            sentence_id, span_start, span_end = int(sid), int(start), int(end)
        except ValueError:
            raise StandoffError(f"non-integer sentence id or offset in {line!r}", line_number)
        if sentence_id < 0:
            raise StandoffError(f"negative sentence id {sentence_id}", line_number)
        try:
            kind = TagKind(kind_text)
        except ValueError:
            raise StandoffError(f"unknown tag kind {kind_text!r}", line_number)
        if not label or any(ch.isspace() or ch in "()" for ch in label):
            raise StandoffError(f"invalid label {label!r}", line_number)
        if not is_known_label(kind, label, extra):
            if not allow_extra_labels:
                raise StandoffError(f"unknown {kind.value} label {label!r}", line_number)
            logger.debug("[SEMTAGS] passing through unknown %s label %s", kind.value, label)
        tag = SemanticTag(sentence_id, Span(span_start, span_end), kind, label)
        by_sentence.setdefault(sentence_id, []).append(tag)
    return by_sentence


def read_standoff_file(path, allow_extra_labels: bool = False, extra_ne_labels: Iterable[str] = ()):
    with open(path, encoding="utf-8") as f:
        return parse_standoff(f, allow_extra_labels, extra_ne_labels)


def format_standoff(tags: Iterable[SemanticTag]) -> List[str]:
    return [
        f"{t.sentence_id}\t{t.span.start}\t{t.span.end}\t{t.kind.value}\t{t.label}"
        for t in tags
    ]


def tag_density(tags_by_sentence: Dict[int, List[SemanticTag]], n_sentences: int) -> Dict[str, float]:
    """Mean named entities and modality tags per sentence."""
    if n_sentences <= 0:
        return {"ne_per_sentence": 0.0, "modality_per_sentence": 0.0}
    ne = sum(1 for tags in tags_by_sentence.values() for t in tags if t.kind is TagKind.NAMED_ENTITY)
    mod = sum(1 for tags in tags_by_sentence.values() for t in tags if t.kind.is_modality)
    return {"ne_per_sentence": ne / n_sentences, "modality_per_sentence": mod / n_sentences}
