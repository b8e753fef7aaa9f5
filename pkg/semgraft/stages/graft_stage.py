"""
Graft Stage

Reads a tree file and a standoff tag file, grafts the tags onto the trees and
writes the grafted trees, a `case TAB count` report and a manifest.
"""

import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from semgraft.services.manifest import write_manifest
from semgraft.services.textio import read_lines, write_lines
from semgraft.stages.base import run_stage
from semgraft.tools.grafting import GraftReport, graft_corpus
from semgraft.tools.semtags import GraftOrder, SemanticTag, TagKind, read_standoff_file, tag_density

logger = logging.getLogger(__name__)

REPORT_SUFFIX = ".report.tsv"


def graft_lines(
    tree_lines: List[str],
    tags_path: Optional[Union[str, Path]],
    order: GraftOrder = GraftOrder.NE_FIRST,
    kinds: Optional[FrozenSet[TagKind]] = None,
    allow_extra_labels: bool = False,
    jobs: int = 1,
    extra_ne_labels: Iterable[str] = (),
) -> Tuple[List[str], GraftReport]:
    """Graft in memory; no tag file means every tree passes through unchanged."""
    tags: Dict[int, List[SemanticTag]] = {}
    if tags_path is not None:
        tags = read_standoff_file(tags_path, allow_extra_labels, extra_ne_labels)
        logger.info("[GRAFT] %s: density %s", tags_path, tag_density(tags, len(tree_lines)))
    return graft_corpus(tree_lines, tags, order=order, kinds=kinds, jobs=jobs, extra_ne_labels=extra_ne_labels)


def graft_stage(
    trees: Union[str, Path],
    tags: Optional[Union[str, Path]],
    output: Union[str, Path],
    order: GraftOrder = GraftOrder.NE_FIRST,
    kinds: Optional[FrozenSet[TagKind]] = None,
    allow_extra_labels: bool = False,
    jobs: int = 1,
    extra_ne_labels: Iterable[str] = (),
    timestamps: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    report: Dict[str, Any] = {"stage": "graft", "output": str(output)}
    with run_stage("graft", report, timestamps):
        tree_lines = read_lines(trees)
        grafted, graft_report = graft_lines(
            tree_lines, tags, order, kinds, allow_extra_labels, jobs, extra_ne_labels,
        )

        output = Path(output)
        write_lines(output, grafted)
        report_path = output.with_name(output.name + REPORT_SUFFIX)
        report_path.write_text(graft_report.to_tsv(), encoding="utf-8")

        report["sentences"] = len(tree_lines)
        report["tags"] = graft_report.total_tags
        report["cases"] = dict(graft_report.totals)
        report["density"] = graft_report.density()
        report["report"] = str(report_path)
        write_manifest(
            output, "graft",
            config={
                "trees": str(trees), "tags": str(tags) if tags else None,
                "graft_order": order.value,
                "kinds": sorted(k.value for k in kinds) if kinds is not None else "all",
                "allow_extra_labels": allow_extra_labels,
                "extra_ne_labels": list(extra_ne_labels),
            },
            counts={"sentences": len(tree_lines), "tags": graft_report.total_tags, **graft_report.totals},
        )
    return report
