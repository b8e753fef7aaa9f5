"""
Extract Stage

Bitext + alignment + target trees -> scored SCFG grammar file.

For semantic label modes the trees are grafted in memory first, restricted
to the tag kinds the mode uses.
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, Optional, Union

from semgraft.services.manifest import write_manifest
from semgraft.services.textio import read_lines
from semgraft.stages.base import run_stage
from semgraft.stages.graft_stage import graft_lines
from semgraft.tools.corpus import SentencePair, load_bitext, pairs_from_lines
from semgraft.tools.extraction import ExtractionConfig, extract_corpus, score_grammar, write_grammar
from semgraft.tools.semtags import GraftOrder, TagKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def extract_stage(
    source: PathLike,
    target: PathLike,
    align: PathLike,
    trees: PathLike,
    grammar_path: PathLike,
    config: ExtractionConfig = ExtractionConfig(),
    mode: str = "samt",
    tags: Optional[PathLike] = None,
    kinds: Optional[FrozenSet[TagKind]] = None,
    order: GraftOrder = GraftOrder.NE_FIRST,
    allow_extra_labels: bool = False,
    jobs: int = 1,
    extra_ne_labels: Iterable[str] = (),
    timestamps: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """`kinds` is None for modes without grafting (hiero, samt)."""
    report: Dict[str, Any] = {"stage": "extract", "mode": mode, "grammar": str(grammar_path)}
    with run_stage("extract", report, timestamps):
        skipped: Counter = Counter()
        pairs: Iterable[SentencePair]
        if kinds is not None:
            grafted, graft_report = graft_lines(
                read_lines(trees), tags, order=order, kinds=kinds,
                allow_extra_labels=allow_extra_labels, jobs=jobs, extra_ne_labels=extra_ne_labels,
            )
            report["grafted"] = dict(graft_report.totals)
            pairs = pairs_from_lines(
                read_lines(source), read_lines(target), read_lines(align), grafted, skipped=skipped,
            )
        else:
            reader = load_bitext(source, target, align, trees)
            reader.check_line_counts()
            pairs = reader

        n_instances = 0

        def counted(rules):
            nonlocal n_instances
            for r in rules:
                n_instances += 1
                yield r

        echo = {**config.echo(), "mode": mode}
        grammar = score_grammar(counted(extract_corpus(pairs, config, jobs)), echo)
        if kinds is None:
            skipped = pairs.skipped

        write_grammar(grammar, grammar_path)
        report["rule_instances"] = n_instances
        report["rules"] = len(grammar)
        report["labels"] = len(grammar.by_lhs())
        report["skipped"] = dict(sorted(skipped.items()))
        logger.info("[EXTRACT] %s: %d rules (%d instances) -> %s", mode, len(grammar), n_instances, grammar_path)
        write_manifest(
            grammar_path, "extract",
            config={**echo, "source": str(source), "target": str(target), "align": str(align),
                    "trees": str(trees), "tags": str(tags) if tags else None, "graft_order": order.value,
                    "extra_ne_labels": list(extra_ne_labels)},
            counts={"rule_instances": n_instances, "rules": len(grammar), "skipped": report["skipped"]},
        )
    return report
