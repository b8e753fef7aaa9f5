"""
BLEU Stage - scores a hypothesis file against N reference files and writes
the BleuReport as JSON.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from semgraft.services.manifest import write_manifest
from semgraft.services.textio import read_lines
from semgraft.stages.base import run_stage
from semgraft.tools.evalkit import bleu, read_references

PathLike = Union[str, Path]


def bleu_stage(
    hypotheses: PathLike,
    references: Sequence[PathLike],
    output: Optional[PathLike] = None,
    lowercase: bool = False,
    timestamps: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    report: Dict[str, Any] = {"stage": "bleu"}
    with run_stage("bleu", report, timestamps):
        scored = bleu(read_lines(hypotheses), read_references(references), lowercase=lowercase)
        report["bleu"] = scored.bleu
        report["summary"] = scored.summary()
        if output is not None:
            Path(output).write_text(json.dumps(scored.model_dump(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
            report["output"] = str(output)
            write_manifest(
                output, "bleu",
                config={"hypotheses": str(hypotheses), "references": [str(r) for r in references],
                        "lowercase": lowercase},
                counts={"sentences": len(read_lines(hypotheses)), "references": len(references)},
            )
    return report
