"""
Decoder tool

CKY-style synchronous chart decoder. Parses the source sentence with the
source sides of the grammar rules and returns the k best target derivations
under a log-linear score over rule features.

Chart cells hold, for each source span and nonterminal label, a k-best list
of derivations. Full-sentence coverage comes from synthesized glue rules
    [GOAL] -> [L,1]            and    [GOAL] -> [GOAL,1] [L,2]
one pair per label L, each carrying the feature glue=1. Source tokens with no
single-token lexical rule get a pass-through rule [X] -> w / w with oov=1.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field

from semgraft.errors import ConfigError, ScoringError
from semgraft.services.workers import map_ordered
from semgraft.tools.extraction import (
    FALLBACK_LABEL, FIELD_SEPARATOR, Grammar, NonTerminal, ScfgRule,
)
from semgraft.tools.grafting import GraftedLabel
from semgraft.tools.semtags import SemanticTag, split_semantic_part
from semgraft.tools.treebank import Span

logger = logging.getLogger(__name__)

PROBABILITY_PREFIX = "p_"
WORD_PENALTY = "word_penalty"
COMPOSITE_OPERATORS = ("+", "/", "\\")

UNIFORM_WEIGHTS = {
    "p_tgt_given_src": 1.0,
    "p_src_given_tgt": 1.0,
    "glue": -1.0,
    "oov": -100.0,
}


class WeightVector(BaseModel):
    """Feature weights; features without a weight contribute 0."""
    weights: Dict[str, float] = Field(default_factory=lambda: dict(UNIFORM_WEIGHTS))
    word_penalty: float = 0.0

    def weight(self, name: str) -> float:
        return self.weights.get(name, 0.0)

    def score_rule(self, rule: ScfgRule) -> float:
        total = 0.0
        for name, value in rule.features.items():
            w = self.weight(name)
            if name.startswith(PROBABILITY_PREFIX):
                if value <= 0:
                    raise ScoringError(f"feature {name}={value} is not a positive probability")
                if w:
                    total += w * math.log(value)
            else:
                total += w * value
        return total + self.word_penalty * len(rule.target_words)


class DecoderConfig(BaseModel):
    k: int = Field(10, ge=1)
    goal_label: str = "GOAL"
    oov_passthrough: bool = True


def read_weights(path: Union[str, Path]) -> WeightVector:
    """Flat name=value file; word_penalty is read as the word-penalty weight."""
    values = dotenv_values(path)
    weights: Dict[str, float] = {}
    word_penalty = 0.0
    for name, raw in values.items():
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"weight {name}={raw!r} is not a number")
        if name == WORD_PENALTY:
            word_penalty = value
        else:
            weights[name] = value
    return WeightVector(weights=weights, word_penalty=word_penalty)


# ---------- derivations ----------
@dataclass(frozen=True)
class Derivation:
    rule: ScfgRule
    span: Span
    children: Tuple["Derivation", ...] = ()
    score: float = 0.0

    def rules(self) -> Iterator[ScfgRule]:
        """Pre-order rule sequence."""
        yield self.rule
        for child in self.children:
            yield from child.rules()


def derivation_to_string(d: Derivation) -> List[str]:
    """Target yield; nonterminal k is filled by the k-th child."""
    out: List[str] = []
    for sym in d.rule.target:
        if isinstance(sym, NonTerminal):
            out.extend(derivation_to_string(d.children[sym.index - 1]))
        else:
            out.append(sym)
    return out


def score_derivation(d: Derivation, weights: WeightVector) -> float:
    return weights.score_rule(d.rule) + sum(score_derivation(c, weights) for c in d.children)


def derivation_key(d: Derivation) -> Tuple[float, str, Tuple[str, ...]]:
    """Best first: higher score, then target string, then rule sequence."""
    return -d.score, " ".join(derivation_to_string(d)), tuple(r.to_line() for r in d.rules())


@dataclass(frozen=True)
class ChartItem:
    span: Span
    lhs: str
    derivations: Tuple[Derivation, ...]


Chart = Dict[Tuple[int, int], Dict[str, ChartItem]]


@dataclass
class DecodeResult:
    sentence_id: int
    derivations: List[Derivation] = field(default_factory=list)
    translatable: bool = True
    uncovered: List[Span] = field(default_factory=list)

    @property
    def best(self) -> Optional[Derivation]:
        return self.derivations[0] if self.derivations else None

    def best_string(self) -> str:
        return " ".join(derivation_to_string(self.best)) if self.best else ""


# ---------- rule sets ----------
def glue_rules(labels: Iterable[str], goal: str) -> Dict[str, Tuple[ScfgRule, ScfgRule]]:
    rules = {}
    for label in sorted(set(labels)):
        if label == goal:
            continue
        unary = ScfgRule(goal, (NonTerminal(label, 1),), (NonTerminal(label, 1),), {"glue": 1.0})
        binary = ScfgRule(
            goal,
            (NonTerminal(goal, 1), NonTerminal(label, 2)),
            (NonTerminal(goal, 1), NonTerminal(label, 2)),
            {"glue": 1.0},
        )
        rules[label] = (unary, binary)
    return rules


def oov_rule(token: str) -> ScfgRule:
    return ScfgRule(FALLBACK_LABEL, (token,), (token,), {"oov": 1.0})


def applicable_rules(tokens: Sequence[str], grammar: Grammar) -> List[ScfgRule]:
    """
    Rules whose source terminals all occur in the sentence. Unary rules with
    a bare nonterminal source would make a cell depend on itself and are
    skipped.
    """
    vocab = set(tokens)
    kept = []
    for rule in grammar.rules:
        words = rule.source_words
        if len(rule.source) == 1 and not words:
            logger.debug("[DECODE] skipping unary nonterminal rule: %s", rule.to_line())
            continue
        if all(w in vocab for w in words):
            kept.append(rule)
    return kept


def _match(
    symbols: Sequence, s_idx: int, pos: int, end: int, tokens: Sequence[str],
    chart: Chart, acc: List[Tuple[NonTerminal, Span]],
) -> Iterator[List[Tuple[NonTerminal, Span]]]:
    if s_idx == len(symbols):
        if pos == end:
            yield list(acc)
        return
    sym = symbols[s_idx]
    rest = len(symbols) - s_idx - 1
    if not isinstance(sym, NonTerminal):
        if pos < end and tokens[pos] == sym:
            yield from _match(symbols, s_idx + 1, pos + 1, end, tokens, chart, acc)
        return
    for q in range(pos + 1, end - rest + 1):
        if chart.get((pos, q), {}).get(sym.label):
            acc.append((sym, Span(pos, q)))
            yield from _match(symbols, s_idx + 1, q, end, tokens, chart, acc)
            acc.pop()


def _kbest(candidates: List[Derivation], k: int) -> List[Derivation]:
    return sorted(candidates, key=derivation_key)[:k]


def _uncovered(n: int, chart: Chart) -> List[Span]:
    covered = [False] * n
    for (i, j), cell in chart.items():
        if cell:
            for p in range(i, j):
                covered[p] = True
    spans, start = [], None
    for p in range(n + 1):
        if p < n and not covered[p]:
            start = p if start is None else start
        elif start is not None:
            spans.append(Span(start, p))
            start = None
    return spans or [Span(0, n)]


# ---------- decoding ----------
def decode(
    tokens: Sequence[str],
    grammar: Grammar,
    weights: WeightVector = WeightVector(),
    config: DecoderConfig = DecoderConfig(),
    sentence_id: int = 0,
) -> DecodeResult:
    """
    k-best decoding of one tokenized sentence.

    Returns derivations rooted in the goal label over the whole sentence,
    best first, or an untranslatable result naming the uncovered spans.
    """
    n = len(tokens)
    if n == 0:
        return DecodeResult(sentence_id, translatable=False)
    k = config.k
    rules = applicable_rules(tokens, grammar)

    if config.oov_passthrough:
        single = {r.source[0] for r in rules if len(r.source) == 1 and not isinstance(r.source[0], NonTerminal)}
        for tok in sorted(set(tokens) - single):
            logger.debug("[DECODE] sentence %d: pass-through for OOV token %r", sentence_id, tok)
            rules.append(oov_rule(tok))

    rule_scores: Dict[ScfgRule, float] = {}

    def rule_score(rule: ScfgRule) -> float:
        if rule not in rule_scores:
            rule_scores[rule] = weights.score_rule(rule)
        return rule_scores[rule]

    chart: Chart = {}
    for width in range(1, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            candidates: Dict[str, List[Derivation]] = {}
            for rule in rules:
                if len(rule.source) > width:
                    continue
                for gaps in _match(rule.source, 0, i, j, tokens, chart, []):
                    gaps.sort(key=lambda g: g[0].index)
                    child_lists = [chart[(g.start, g.end)][nt.label].derivations for nt, g in gaps]
                    base = rule_score(rule)
                    for children in product(*child_lists):
                        score = base + sum(c.score for c in children)
                        candidates.setdefault(rule.lhs, []).append(
                            Derivation(rule, Span(i, j), tuple(children), score)
                        )
            chart[(i, j)] = {
                label: ChartItem(Span(i, j), label, tuple(_kbest(ds, k))) for label, ds in candidates.items()
            }

    goal = config.goal_label
    glue = glue_rules((label for cell in chart.values() for label in cell), goal)
    prefix: Dict[int, List[Derivation]] = {}
    for j in range(1, n + 1):
        goals: List[Derivation] = []
        for label, item in chart[(0, j)].items():
            if label == goal:
                goals.extend(item.derivations)
                continue
            unary = glue[label][0]
            goals.extend(
                Derivation(unary, Span(0, j), (d,), rule_score(unary) + d.score) for d in item.derivations
            )
        for m in range(1, j):
            for label, item in chart[(m, j)].items():
                if label == goal:
                    continue
                binary = glue[label][1]
                for g in prefix.get(m, []):
                    goals.extend(
                        Derivation(binary, Span(0, j), (g, d), rule_score(binary) + (g.score + d.score))
                        for d in item.derivations
                    )
        prefix[j] = _kbest(goals, k)

    best = prefix.get(n, [])
    if not best:
        uncovered = _uncovered(n, chart)
        logger.warning("[DECODE] sentence %d untranslatable, uncovered %s", sentence_id, [str(s) for s in uncovered])
        return DecodeResult(sentence_id, translatable=False, uncovered=uncovered)
    return DecodeResult(sentence_id, best)


def _decode_item(item) -> DecodeResult:
    sentence_id, tokens, grammar, weights, config = item
    return decode(tokens, grammar, weights, config, sentence_id)


def decode_corpus(
    sentences: Sequence[Sequence[str]],
    grammar: Grammar,
    weights: WeightVector = WeightVector(),
    config: DecoderConfig = DecoderConfig(),
    jobs: int = 1,
) -> List[DecodeResult]:
    items = [(sid, list(tokens), grammar, weights, config) for sid, tokens in enumerate(sentences)]
    return list(map_ordered(_decode_item, items, jobs))


def format_kbest(result: DecodeResult) -> List[str]:
    """`sent_id ||| rank ||| target string ||| score` per entry."""
    if not result.translatable:
        spans = ",".join(str(s) for s in result.uncovered)
        return [FIELD_SEPARATOR.join([str(result.sentence_id), "0", "", f"untranslatable uncovered={spans}"])]
    return [
        FIELD_SEPARATOR.join([str(result.sentence_id), str(rank), " ".join(derivation_to_string(d)), f"{d.score:.6f}"])
        for rank, d in enumerate(result.derivations)
    ]


# ---------- source-side annotation ----------
def source_annotations(
    d: Derivation, sentence_id: int = 0, extra_ne_labels: Iterable[str] = (),
) -> List[SemanticTag]:
    """
    Semantic parts of the rules used in a derivation, projected onto the
    source spans those rules cover. `extra_ne_labels` are the NE labels
    beyond the built-in inventory that grafting was allowed to use.
    """
    extra = tuple(extra_ne_labels)
    tags: List[SemanticTag] = []
    seen = set()
    stack = [d]
    while stack:
        current = stack.pop()
        stack.extend(reversed(current.children))
        if any(op in current.rule.lhs for op in COMPOSITE_OPERATORS):
            continue
        grafted = GraftedLabel.parse(current.rule.lhs, extra)
        if grafted.semantic is None:
            continue
        kind, label = split_semantic_part(grafted.semantic)
        tag = SemanticTag(sentence_id, current.span, kind, label)
        if tag not in seen:
            seen.add(tag)
            tags.append(tag)
    return sorted(tags, key=lambda t: (t.span, t.kind.value, t.label))
