"""
Extraction tool

Extracts synchronous context-free grammar rules from aligned sentence pairs:

  - tight, alignment-consistent phrase pairs
  - hierarchical rules made by subtracting one or two inner phrase pairs
  - nonterminal labels read off the (possibly grafted) target tree:
    a generic X in hiero mode, constituent / composite labels in samt mode
  - relative-frequency scoring into a deduplicated Grammar

Grammar file lines:
    [LHS] ||| source rhs ||| target rhs ||| name=value ...
with nonterminal occurrences written [LABEL,k].
"""

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from semgraft.errors import GrammarFormatError
from semgraft.services.workers import map_ordered
from semgraft.tools.corpus import Alignment, SentencePair
from semgraft.tools.treebank import Span, SpanIndex, build_span_index

logger = logging.getLogger(__name__)

FIELD_SEPARATOR = " ||| "
FALLBACK_LABEL = "X"

_NT_PAT = re.compile(r"^\[(.+),(\d+)\]$")
_LHS_PAT = re.compile(r"^\[(.+)\]$")


# ---------- phrase pairs ----------
@dataclass(frozen=True, order=True)
class PhrasePair:
    src: Span
    tgt: Span


def is_consistent(alignment: Alignment, src: Span, tgt: Span, tight: bool = True) -> bool:
    """
    No link joins a word inside one span to a word outside the other, and at
    least one link falls inside. Tight pairs also have all boundary words aligned.
    """
    inside = False
    for i, j in alignment.links:
        in_src = src.start <= i < src.end
        in_tgt = tgt.start <= j < tgt.end
        if in_src != in_tgt:
            return False
        inside = inside or in_src
    if not inside:
        return False
    if tight:
        return (
            alignment.source_aligned(src.start) and alignment.source_aligned(src.end - 1)
            and alignment.target_aligned(tgt.start) and alignment.target_aligned(tgt.end - 1)
        )
    return True


def extract_phrase_pairs(pair: SentencePair, max_len: int = 10) -> List[PhrasePair]:
    n = len(pair.source_tokens)
    targets_of: List[List[int]] = [[] for _ in range(n)]
    sources_of: Dict[int, List[int]] = {}
    for i, j in pair.alignment.links:
        targets_of[i].append(j)
        sources_of.setdefault(j, []).append(i)

    phrases: List[PhrasePair] = []
    for i1 in range(n):
        if not targets_of[i1]:
            continue
        j1, j2 = math.inf, -1
        for i2 in range(i1 + 1, min(n, i1 + max_len) + 1):
            last = targets_of[i2 - 1]
            if not last:
                continue
            j1 = min(j1, min(last))
            j2 = max(j2, max(last) + 1)
            if j2 - j1 > max_len:
                break
            if all(i1 <= i < i2 for j in range(j1, j2) for i in sources_of.get(j, ())):
                phrases.append(PhrasePair(Span(i1, i2), Span(j1, j2)))
    return sorted(phrases)


# ---------- labels ----------
class LabelForm(str, Enum):
    CONSTITUENT = "constituent"
    CONCAT = "concat"
    MISSING_RIGHT = "missing-right"
    MISSING_LEFT = "missing-left"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class Label:
    """
    Nonterminal label. For MISSING_RIGHT `a` is the whole constituent and `b`
    the part missing on its right (A/B); MISSING_LEFT renders as B\\A with `b`
    missing on the left of `a`.
    """
    form: LabelForm
    a: str = ""
    b: str = ""

    def render(self) -> str:
        if self.form is LabelForm.CONSTITUENT:
            return self.a
        if self.form is LabelForm.CONCAT:
            return f"{self.a}+{self.b}"
        if self.form is LabelForm.MISSING_RIGHT:
            return f"{self.a}/{self.b}"
        if self.form is LabelForm.MISSING_LEFT:
            return f"{self.b}\\{self.a}"
        return FALLBACK_LABEL

    def __str__(self) -> str:
        return self.render()


FALLBACK = Label(LabelForm.FALLBACK)
LabelMode = Literal["hiero", "samt"]


def _constituent(index: SpanIndex, span: Span) -> Optional[str]:
    path = index.highest(span)
    return None if path is None else index.label_of(path)


def samt_label(index: SpanIndex, span: Span, mode: LabelMode = "samt") -> Label:
    span.validate(index.length)
    if mode == "hiero":
        return FALLBACK

    whole = _constituent(index, span)
    if whole is not None:
        return Label(LabelForm.CONSTITUENT, whole)

    for k in range(span.start + 1, span.end):
        left = _constituent(index, Span(span.start, k))
        right = _constituent(index, Span(k, span.end)) if left is not None else None
        if right is not None:
            return Label(LabelForm.CONCAT, left, right)

    for e in range(span.end + 1, index.length + 1):
        a = _constituent(index, Span(span.start, e))
        b = _constituent(index, Span(span.end, e)) if a is not None else None
        if b is not None:
            return Label(LabelForm.MISSING_RIGHT, a, b)

    for s in range(span.start - 1, -1, -1):
        a = _constituent(index, Span(s, span.end))
        b = _constituent(index, Span(s, span.start)) if a is not None else None
        if b is not None:
            return Label(LabelForm.MISSING_LEFT, a, b)

    return FALLBACK


# ---------- rules ----------
@dataclass(frozen=True, order=True)
class NonTerminal:
    label: str
    index: int

    def render(self) -> str:
        return f"[{self.label},{self.index}]"


Symbol = Union[str, NonTerminal]


def render_rhs(symbols: Sequence[Symbol]) -> str:
    return " ".join(s.render() if isinstance(s, NonTerminal) else s for s in symbols)


@dataclass(frozen=True)
class ScfgRule:
    lhs: str
    source: Tuple[Symbol, ...]
    target: Tuple[Symbol, ...]
    features: Dict[str, float] = field(default_factory=dict, compare=False, hash=False)

    @property
    def nonterminals(self) -> List[NonTerminal]:
        return [s for s in self.source if isinstance(s, NonTerminal)]

    @property
    def arity(self) -> int:
        return len(self.nonterminals)

    @property
    def source_words(self) -> List[str]:
        return [s for s in self.source if not isinstance(s, NonTerminal)]

    @property
    def target_words(self) -> List[str]:
        return [s for s in self.target if not isinstance(s, NonTerminal)]

    @property
    def shape(self) -> Tuple[str, str]:
        """Source and target strings with every nonterminal written as X."""
        def strip(symbols):
            return " ".join(f"[{FALLBACK_LABEL},{s.index}]" if isinstance(s, NonTerminal) else s for s in symbols)
        return strip(self.source), strip(self.target)

    def to_line(self) -> str:
        feats = " ".join(f"{name}={self.features[name]!r}" for name in sorted(self.features))
        return FIELD_SEPARATOR.join([f"[{self.lhs}]", render_rhs(self.source), render_rhs(self.target), feats])


class ExtractionConfig(BaseModel):
    max_phrase_len: int = Field(10, gt=0)
    max_source_symbols: int = Field(5, gt=0)
    max_nonterminals: int = Field(2, ge=0, le=2)
    allow_adjacent_nonterminals: bool = False
    label_mode: LabelMode = "samt"
    allow_fallback: bool = True

    def echo(self) -> Dict[str, str]:
        return {k: str(v) for k, v in self.model_dump().items()}


def _build_rhs(
    tokens: Sequence[str], outer: Span, holes: Sequence[Tuple[Span, NonTerminal]],
) -> Tuple[Symbol, ...]:
    symbols: List[Symbol] = []
    pos = outer.start
    for span, nt in sorted(holes, key=lambda h: h[0].start):
        symbols.extend(tokens[pos:span.start])
        symbols.append(nt)
        pos = span.end
    symbols.extend(tokens[pos:outer.end])
    return tuple(symbols)


def extract_rules(pair: SentencePair, config: ExtractionConfig = ExtractionConfig()) -> List[ScfgRule]:
    """Rule instances (count 1 each) for one sentence pair."""
    phrases = extract_phrase_pairs(pair, config.max_phrase_len)
    index = build_span_index(pair.target_tree)
    labels: Dict[Span, Optional[str]] = {}

    def label(span: Span) -> Optional[str]:
        if span not in labels:
            found = samt_label(index, span, config.label_mode)
            drop = found.form is LabelForm.FALLBACK and config.label_mode == "samt" and not config.allow_fallback
            labels[span] = None if drop else found.render()
        return labels[span]

    rules: List[ScfgRule] = []
    for outer in phrases:
        lhs = label(outer.tgt)
        if lhs is None:
            continue
        inner = [
            q for q in phrases
            if q != outer and outer.src.contains(q.src) and outer.tgt.contains(q.tgt)
        ]
        subtractions: List[Tuple[PhrasePair, ...]] = [()]
        if config.max_nonterminals >= 1:
            subtractions.extend((q,) for q in inner)
        if config.max_nonterminals >= 2:
            for q1, q2 in combinations(inner, 2):
                first, second = sorted((q1, q2))
                if first.src.end > second.src.start:
                    continue
                if first.tgt.end > second.tgt.start and second.tgt.end > first.tgt.start:
                    continue
                if not config.allow_adjacent_nonterminals and first.src.end == second.src.start:
                    continue
                subtractions.append((first, second))

        for holes in subtractions:
            hole_labels = [label(q.tgt) for q in holes]
            if any(lab is None for lab in hole_labels):
                continue
            nts = [NonTerminal(lab, k) for k, lab in enumerate(hole_labels, start=1)]
            source = _build_rhs(pair.source_tokens, outer.src, [(q.src, nt) for q, nt in zip(holes, nts)])
            if len(source) > config.max_source_symbols:
                continue
            if all(isinstance(s, NonTerminal) for s in source):
                continue
            target = _build_rhs(pair.target_tokens, outer.tgt, [(q.tgt, nt) for q, nt in zip(holes, nts)])
            rules.append(ScfgRule(lhs, source, target))
    return rules


def _extract_pair(item: Tuple[SentencePair, ExtractionConfig]) -> List[ScfgRule]:
    return extract_rules(*item)


def extract_corpus(
    pairs: Iterable[SentencePair], config: ExtractionConfig = ExtractionConfig(), jobs: int = 1,
) -> Iterator[ScfgRule]:
    for rules in map_ordered(_extract_pair, ((p, config) for p in pairs), jobs):
        yield from rules


# ---------- scoring ----------
@dataclass
class Grammar:
    rules: List[ScfgRule] = field(default_factory=list)
    config: Dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rules)

    def lines(self) -> List[str]:
        return sorted(r.to_line() for r in self.rules)

    def by_lhs(self) -> Dict[str, List[ScfgRule]]:
        grouped: Dict[str, List[ScfgRule]] = {}
        for r in self.rules:
            grouped.setdefault(r.lhs, []).append(r)
        return grouped


def _source_key(rule: ScfgRule) -> str:
    return render_rhs(rule.source)


def _target_key(rule: ScfgRule) -> Tuple[str, str]:
    return rule.lhs, render_rhs(rule.target)


def score_grammar(instances: Iterable[ScfgRule], config: Optional[Dict[str, str]] = None) -> Grammar:
    """
    Deduplicate rule instances and attach features:
      p_tgt_given_src  P(lhs, target | source)
      p_src_given_tgt  P(source | lhs, target)
      rule_count, src_words, tgt_words
    """
    counts: Counter = Counter(instances)
    by_source: Counter = Counter()
    by_target: Counter = Counter()
    for rule, c in counts.items():
        by_source[_source_key(rule)] += c
        by_target[_target_key(rule)] += c

    scored = []
    for rule, c in counts.items():
        features = {
            "p_tgt_given_src": c / by_source[_source_key(rule)],
            "p_src_given_tgt": c / by_target[_target_key(rule)],
            "rule_count": float(c),
            "src_words": float(len(rule.source_words)),
            "tgt_words": float(len(rule.target_words)),
        }
        scored.append(ScfgRule(rule.lhs, rule.source, rule.target, features))
    scored.sort(key=lambda r: r.to_line())
    logger.info("[EXTRACT] scored %d instances into %d rules", sum(counts.values()), len(scored))
    return Grammar(scored, dict(config or {}))


# ---------- files ----------
def format_grammar(grammar: Grammar) -> List[str]:
    header = [f"# {k}={v}" for k, v in sorted(grammar.config.items())]
    return header + grammar.lines()


def write_grammar(grammar: Grammar, path: Union[str, Path]):
    with open(path, "w", encoding="utf-8") as f:
        for line in format_grammar(grammar):
            f.write(line + "\n")


def _parse_rhs(text: str, line_number: int) -> Tuple[Symbol, ...]:
    symbols: List[Symbol] = []
    for tok in text.split():
        m = _NT_PAT.match(tok)
        symbols.append(NonTerminal(m.group(1), int(m.group(2))) if m else tok)
    if not symbols:
        raise GrammarFormatError("empty right-hand side", line_number)
    return tuple(symbols)


def parse_rule_line(line: str, line_number: Optional[int] = None) -> ScfgRule:
    fields = line.split(FIELD_SEPARATOR)
    if len(fields) != 4:
        raise GrammarFormatError(f"expected 4 ' ||| '-separated fields, found {len(fields)}", line_number)
    lhs_text, src_text, tgt_text, feat_text = fields
    m = _LHS_PAT.match(lhs_text.strip())
    if not m:
        raise GrammarFormatError(f"malformed left-hand side {lhs_text!r}", line_number)
    source = _parse_rhs(src_text, line_number)
    target = _parse_rhs(tgt_text, line_number)

    src_nts = sorted(s.index for s in source if isinstance(s, NonTerminal))
    tgt_nts = sorted(s.index for s in target if isinstance(s, NonTerminal))
    if src_nts != tgt_nts or len(set(src_nts)) != len(src_nts):
        raise GrammarFormatError("nonterminal co-indices do not form a bijection", line_number)
    src_labels = {s.index: s.label for s in source if isinstance(s, NonTerminal)}
    if any(src_labels[s.index] != s.label for s in target if isinstance(s, NonTerminal)):
        raise GrammarFormatError("co-indexed nonterminals carry different labels", line_number)

    features: Dict[str, float] = {}
    for item in feat_text.split():
        name, sep, value = item.partition("=")
        try:
            number = float(value)
        except ValueError:
            number = math.nan
        if not sep or not name or not math.isfinite(number):
            raise GrammarFormatError(f"malformed feature {item!r}", line_number)
        features[name] = number
    return ScfgRule(m.group(1), source, target, features)


def read_grammar(lines: Iterable[str]) -> Grammar:
    grammar = Grammar()
    seen = set()
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                grammar.config[key] = value
            continue
        rule = parse_rule_line(line, line_number)
        if rule in seen:
            raise GrammarFormatError(f"duplicate rule [{rule.lhs}] {render_rhs(rule.source)}", line_number)
        seen.add(rule)
        grammar.rules.append(rule)
    return grammar


def read_grammar_file(path: Union[str, Path]) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return read_grammar(f)
