"""
Evaluation tool

Corpus-level BLEU (4-gram, closest reference length, no smoothing) over
pre-tokenized text with any number of references per sentence.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field
from sacrebleu.metrics import BLEU

from semgraft.errors import BleuError
from semgraft.services.textio import read_lines

logger = logging.getLogger(__name__)

MAX_ORDER = 4


class BleuReport(BaseModel):
    bleu: float = Field(ge=0.0, le=1.0)
    precisions: List[float]
    brevity_penalty: float = Field(ge=0.0, le=1.0)
    hyp_length: int
    ref_length: int
    counts: List[int]
    totals: List[int]
    lowercase: bool = False
    metadata: Dict[str, str] = Field(default_factory=dict)

    def summary(self) -> str:
        precisions = "/".join(f"{p * 100:.1f}" for p in self.precisions)
        return (
            f"BLEU = {self.bleu * 100:.2f} {precisions} "
            f"(BP = {self.brevity_penalty:.3f} hyp_len = {self.hyp_length} ref_len = {self.ref_length})"
        )


def _unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def bleu(
    hypotheses: Sequence[str],
    references: Sequence[Sequence[str]],
    lowercase: bool = False,
) -> BleuReport:
    """
    `references[i]` holds the reference translations of hypothesis i.

    A zero n-gram precision (including an order with no n-grams at all in
    the corpus) makes the score 0.
    """
    if not hypotheses:
        raise BleuError("empty corpus: no hypotheses to score")
    if len(hypotheses) != len(references):
        raise BleuError(f"{len(hypotheses)} hypotheses but {len(references)} reference sets")
    missing = [i for i, refs in enumerate(references) if not refs]
    if missing:
        raise BleuError(f"sentence {missing[0]} has no reference")

    n_streams = max(len(refs) for refs in references)
    streams: List[List[Optional[str]]] = [
        [refs[r] if r < len(refs) else None for refs in references] for r in range(n_streams)
    ]
    metric = BLEU(lowercase=lowercase, tokenize="none", smooth_method="none", max_ngram_order=MAX_ORDER, force=True)
    score = metric.corpus_score(list(hypotheses), streams)

    report = BleuReport(
        bleu=_unit(score.score / 100.0),
        precisions=[_unit(p / 100.0) for p in score.precisions],
        brevity_penalty=_unit(score.bp),
        hyp_length=score.sys_len,
        ref_length=score.ref_len,
        counts=list(score.counts),
        totals=list(score.totals),
        lowercase=lowercase,
        metadata={
            "reference_length": "closest, ties to the shorter",
            "smoothing": "none",
            "lowercase": str(lowercase).lower(),
            "signature": str(metric.get_signature()),
        },
    )
    logger.info("[BLEU] %s", report.summary())
    return report


def read_references(paths: Sequence[Union[str, Path]]) -> List[List[str]]:
    """N parallel reference files -> per-sentence reference lists."""
    if not paths:
        raise BleuError("no reference files given")
    files = [read_lines(p) for p in paths]
    lengths = {len(f) for f in files}
    if len(lengths) > 1:
        raise BleuError(f"reference files differ in line count: {sorted(lengths)}")
    return [list(refs) for refs in zip(*files)]
