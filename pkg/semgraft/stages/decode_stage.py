"""
Decode Stage

Writes the 1-best output (one line per input sentence, blank when
untranslatable), the k-best list `<output>.kbest` and the source-side
semantic annotations of each 1-best derivation `<output>.tags`.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from semgraft.services.manifest import write_manifest
from semgraft.services.textio import read_lines, write_lines
from semgraft.stages.base import run_stage
from semgraft.tools.decoder import (
    DecoderConfig,
    WeightVector,
    decode_corpus,
    format_kbest,
    read_weights,
    source_annotations,
)
from semgraft.tools.extraction import read_grammar_file
from semgraft.tools.semtags import format_standoff

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def decode_stage(
    grammar_path: PathLike,
    test_source: PathLike,
    output: PathLike,
    config: DecoderConfig = DecoderConfig(),
    weights_path: Optional[PathLike] = None,
    jobs: int = 1,
    extra_ne_labels: Iterable[str] = (),
    timestamps: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    report: Dict[str, Any] = {"stage": "decode", "output": str(output)}
    with run_stage("decode", report, timestamps):
        grammar = read_grammar_file(grammar_path)
        weights = read_weights(weights_path) if weights_path else WeightVector()
        sentences = [line.split() for line in read_lines(test_source)]
        results = decode_corpus(sentences, grammar, weights, config, jobs)

        output = Path(output)
        kbest_path = output.with_name(output.name + ".kbest")
        tags_path = output.with_name(output.name + ".tags")
        one_best: List[str] = []
        kbest: List[str] = []
        annotations: List[str] = []
        for result in results:
            one_best.append(result.best_string())
            kbest.extend(format_kbest(result))
            if result.best is not None:
                tags = source_annotations(result.best, result.sentence_id, extra_ne_labels)
                annotations.extend(format_standoff(tags))
        write_lines(output, one_best)
        write_lines(kbest_path, kbest)
        write_lines(tags_path, annotations)

        untranslatable = sum(1 for r in results if not r.translatable)
        report["sentences"] = len(results)
        report["untranslatable"] = untranslatable
        report["kbest"] = str(kbest_path)
        report["annotations"] = len(annotations)
        if untranslatable:
            logger.warning("[DECODE] %d of %d sentences untranslatable", untranslatable, len(results))
        write_manifest(
            output, "decode",
            config={**config.model_dump(), "grammar": str(grammar_path), "test_source": str(test_source),
                    "weights": weights.model_dump(), "extra_ne_labels": list(extra_ne_labels)},
            counts={"sentences": len(results), "untranslatable": untranslatable, "rules": len(grammar)},
        )
    return report
