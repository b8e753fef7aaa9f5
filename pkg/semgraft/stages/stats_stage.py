"""
Stats Stage

Lines / tokens / types per set: the parsed training bitext (after skipping
unusable pairs) and any number of plain source/target pairs such as dev or
test sets.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from semgraft.services.manifest import write_manifest
from semgraft.services.textio import read_lines
from semgraft.stages.base import run_stage
from semgraft.tools.corpus import CorpusStats, corpus_stats, format_stats_table, load_bitext, text_stats

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def stats_stage(
    source: PathLike,
    target: PathLike,
    align: Optional[PathLike] = None,
    trees: Optional[PathLike] = None,
    extra_sets: Optional[Dict[str, Tuple[PathLike, PathLike]]] = None,
    output: Optional[PathLike] = None,
    timestamps: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Without alignment and trees the training set is counted as plain text.
    `extra_sets` maps a set name to its (source, target) files.
    """
    report: Dict[str, Any] = {"stage": "stats"}
    with run_stage("stats", report, timestamps):
        rows: Dict[str, CorpusStats] = {}
        if align is not None and trees is not None:
            reader = load_bitext(source, target, align, trees)
            rows["training"] = corpus_stats(reader)
            report["skipped"] = dict(sorted(reader.skipped.items()))
        else:
            rows["training"] = text_stats(read_lines(source), read_lines(target))
        for name, (src, tgt) in (extra_sets or {}).items():
            rows[name] = text_stats(read_lines(src), read_lines(tgt))

        table = format_stats_table(rows)
        report["sets"] = {name: s.model_dump() for name, s in rows.items()}
        report["table"] = table
        if output is not None:
            Path(output).write_text(table, encoding="utf-8")
            report["output"] = str(output)
            sets = {name: [str(src), str(tgt)] for name, (src, tgt) in (extra_sets or {}).items()}
            write_manifest(
                output, "stats",
                config={"source": str(source), "target": str(target), "align": str(align) if align else None,
                        "trees": str(trees) if trees else None, "extra_sets": sets},
                counts={name: s.lines for name, s in rows.items()},
            )
        logger.info("[STATS]\n%s", table.rstrip("\n"))
    return report
