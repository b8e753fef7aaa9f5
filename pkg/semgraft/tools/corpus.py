"""
Corpus tool

Reads the aligned parallel corpus: four line-parallel UTF-8 files (source
tokens, target tokens, Pharaoh alignments, target trees). Pairs that fail
validation are skipped with a logged reason and counted.

Alignment links are source->target: "i-j" links source token i to target
token j.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel

from semgraft.errors import AlignmentError, CorpusError, TreeParseError
from semgraft.tools.treebank import Tree, parse_tree, yield_tokens

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SKIP_NO_PARSE = "no parse"
SKIP_BAD_TREE = "bad tree"
SKIP_YIELD_MISMATCH = "yield mismatch"
SKIP_BAD_ALIGNMENT = "bad alignment"


@dataclass(frozen=True)
class Alignment:
    links: FrozenSet[Tuple[int, int]] = frozenset()

    def source_aligned(self, i: int) -> bool:
        return any(s == i for s, _ in self.links)

    def target_aligned(self, j: int) -> bool:
        return any(t == j for _, t in self.links)

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class SentencePair:
    id: int
    source_tokens: Tuple[str, ...]
    target_tokens: Tuple[str, ...]
    alignment: Alignment
    target_tree: Tree


def parse_alignment(line: str, src_len: int, tgt_len: int) -> Alignment:
    links = set()
    for item in line.split():
        left, sep, right = item.partition("-")
        if not sep or not left.isdigit() or not right.isdigit():
            raise AlignmentError(f"malformed alignment pair {item!r}")
        i, j = int(left), int(right)
        if i >= src_len or j >= tgt_len:
            raise AlignmentError(
                f"alignment pair {item!r} out of range for lengths {src_len}/{tgt_len}"
            )
        links.add((i, j))
    return Alignment(frozenset(links))


def make_pair(
    sentence_id: int, source: str, target: str, alignment: str, tree: str,
) -> Tuple[Optional[SentencePair], Optional[str]]:
    """Validate one corpus row; returns (pair, None) or (None, skip reason)."""
    src = tuple(source.split())
    tgt = tuple(target.split())
    if not tree.strip():
        return None, SKIP_NO_PARSE
    try:
        parsed = parse_tree(tree.strip())
    except TreeParseError as e:
        logger.debug("[CORPUS] line %d: %s", sentence_id, e)
        return None, SKIP_BAD_TREE
    if tuple(yield_tokens(parsed)) != tgt:
        return None, SKIP_YIELD_MISMATCH
    try:
        links = parse_alignment(alignment, len(src), len(tgt))
    except AlignmentError as e:
        logger.debug("[CORPUS] line %d: %s", sentence_id, e)
        return None, SKIP_BAD_ALIGNMENT
    return SentencePair(sentence_id, src, tgt, links, parsed), None


def iter_sentence_pairs(rows: Iterable[Tuple[str, str, str, str]], skipped: Counter) -> Iterator[SentencePair]:
    for sentence_id, (source, target, alignment, tree) in enumerate(rows):
        pair, reason = make_pair(sentence_id, source, target, alignment, tree)
        if reason is not None:
            logger.warning("[CORPUS] skipping pair %d: %s", sentence_id, reason)
            skipped[reason] += 1
            continue
        yield pair


def _count_lines(path: PathLike) -> int:
    with open(path, encoding="utf-8") as f:
        return sum(1 for _ in f)


class BitextReader:
    """
    Streaming reader over the four parallel files.

    Line counts are checked up front; `skipped` holds per-reason counts once
    iteration has finished.
    """

    def __init__(self, source: PathLike, target: PathLike, alignment: PathLike, trees: PathLike):
        self.paths = {"source": source, "target": target, "alignment": alignment, "trees": trees}
        self.skipped: Counter = Counter()
        self.n_read = 0

    def check_line_counts(self) -> int:
        counts = {name: _count_lines(path) for name, path in self.paths.items()}
        if len(set(counts.values())) > 1:
            detail = ", ".join(f"{name}={n}" for name, n in counts.items())
            raise CorpusError(f"line-count mismatch between corpus files: {detail}")
        return counts["source"]

    def __iter__(self) -> Iterator[SentencePair]:
        self.check_line_counts()
        self.skipped = Counter()
        self.n_read = 0
        handles = [open(p, encoding="utf-8") for p in self.paths.values()]
        try:
            rows = (tuple(line.rstrip("\n") for line in row) for row in zip(*handles))
            for pair in iter_sentence_pairs(rows, self.skipped):
                self.n_read += 1
                yield pair
        finally:
            for h in handles:
                h.close()
        if self.skipped:
            logger.info("[CORPUS] read %d pairs, skipped %s", self.n_read, dict(self.skipped))


def load_bitext(source: PathLike, target: PathLike, alignment: PathLike, trees: PathLike) -> BitextReader:
    return BitextReader(source, target, alignment, trees)


def pairs_from_lines(
    source: Sequence[str], target: Sequence[str], alignment: Sequence[str], trees: Sequence[str],
    skipped: Optional[Counter] = None,
) -> List[SentencePair]:
    """In-memory counterpart of load_bitext."""
    lengths = {len(source), len(target), len(alignment), len(trees)}
    if len(lengths) > 1:
        raise CorpusError(
            f"line-count mismatch between corpus files: source={len(source)}, target={len(target)}, "
            f"alignment={len(alignment)}, trees={len(trees)}"
        )
    return list(iter_sentence_pairs(zip(source, target, alignment, trees), skipped if skipped is not None else Counter()))


# ---------- statistics ----------
class CorpusStats(BaseModel):
    lines: int = 0
    source_tokens: int = 0
    source_types: int = 0
    target_tokens: int = 0
    target_types: int = 0


def _stats(rows: Iterable[Tuple[Sequence[str], Sequence[str]]]) -> CorpusStats:
    lines = src_tokens = tgt_tokens = 0
    src_types, tgt_types = set(), set()
    for src, tgt in rows:
        lines += 1
        src_tokens += len(src)
        tgt_tokens += len(tgt)
        src_types.update(src)
        tgt_types.update(tgt)
    return CorpusStats(
        lines=lines,
        source_tokens=src_tokens, source_types=len(src_types),
        target_tokens=tgt_tokens, target_types=len(tgt_types),
    )


def corpus_stats(pairs: Iterable[SentencePair]) -> CorpusStats:
    return _stats((p.source_tokens, p.target_tokens) for p in pairs)


def text_stats(source_lines: Iterable[str], target_lines: Iterable[str]) -> CorpusStats:
    """Same block for unparsed sets such as dev or test text."""
    return _stats((s.split(), t.split()) for s, t in zip(source_lines, target_lines))


STATS_COLUMNS = ("lines", "source_tokens", "source_types", "target_tokens", "target_types")


def format_stats_table(rows: Dict[str, CorpusStats]) -> str:
    header = ["set"] + list(STATS_COLUMNS)
    table = [header] + [[name] + [str(getattr(s, c)) for c in STATS_COLUMNS] for name, s in rows.items()]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"
