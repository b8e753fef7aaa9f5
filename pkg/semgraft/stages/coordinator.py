"""
Pipeline Coordinator

Orchestrates the full pipeline for each requested label mode:
Stats → Graft → (per mode) Extract → Decode → BLEU

Every stage writes its artifacts under the output directory and contributes
a stage report; the merged report is written as pipeline_report.json.
Timestamps go to the report's manifest only, so two runs on identical
inputs leave byte-identical artifacts.
"""

import json
import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from semgraft.cli.config import GRAFT_KINDS, PipelineConfig, runlog_path
from semgraft.errors import SemgraftError
from semgraft.services import db
from semgraft.services.manifest import write_manifest
from semgraft.stages.base import mode_slug
from semgraft.stages.bleu_stage import bleu_stage
from semgraft.stages.decode_stage import decode_stage
from semgraft.stages.extract_stage import extract_stage
from semgraft.stages.graft_stage import graft_stage
from semgraft.stages.stats_stage import stats_stage

logger = logging.getLogger(__name__)

REPORT_NAME = "pipeline_report.json"

# modes in the order the ordering check expects them to improve
MODE_LADDER = ("hiero", "samt", "samt+sem")


def artifact_paths(output_dir: Path, mode: str) -> Dict[str, Path]:
    slug = mode_slug(mode)
    return {
        "grammar": output_dir / f"grammar.{slug}.scfg",
        "decode": output_dir / f"decode.{slug}.txt",
        "bleu": output_dir / f"bleu.{slug}.json",
    }


def ordering_check(bleu_by_mode: Dict[str, float]) -> Dict[str, Any]:
    """samt+sem >= samt >= hiero over whichever of those modes ran; reported, never enforced."""
    present = [m for m in MODE_LADDER if m in bleu_by_mode]
    holds = all(bleu_by_mode[a] <= bleu_by_mode[b] for a, b in zip(present, present[1:]))
    return {"modes": present, "holds": holds}


def _run_mode(
    config: PipelineConfig, mode: str, out: Path, timestamps: Dict[str, Any], summary: Dict[str, List[str]],
) -> Dict[str, Any]:
    paths = artifact_paths(out, mode)
    mode_report: Dict[str, Any] = {}
    stage_times: Dict[str, Any] = timestamps.setdefault(mode, {})

    def attempt(name: str, func, **kwargs) -> Optional[Dict[str, Any]]:
        label = f"{mode}:{name}"
        try:
            result = func(timestamps=stage_times, **kwargs)
        except SemgraftError as e:
            mode_report[name] = {"stage": name, "status": "failed", "error": str(e)}
            summary["stages_failed"].append(label)
            logger.error("[PIPELINE] %s failed: %s", label, e)
            return None
        mode_report[name] = result
        summary["stages_completed"].append(label)
        return result

    extracted = attempt(
        "extract", extract_stage,
        source=config.source, target=config.target, align=config.align, trees=config.trees,
        grammar_path=paths["grammar"], config=config.extraction_config(mode), mode=mode,
        tags=config.tags, kinds=GRAFT_KINDS[mode], order=config.graft_order,
        allow_extra_labels=config.allow_extra_labels, extra_ne_labels=config.extra_ne_labels, jobs=config.jobs,
    )
    if extracted is None or not config.test_source:
        return mode_report

    decoded = attempt(
        "decode", decode_stage,
        grammar_path=paths["grammar"], test_source=config.test_source, output=paths["decode"],
        config=config.decoder_config(), weights_path=config.weights, jobs=config.jobs,
        extra_ne_labels=config.extra_ne_labels,
    )
    if decoded is None or not config.references:
        return mode_report

    attempt(
        "bleu", bleu_stage,
        hypotheses=paths["decode"], references=config.references, output=paths["bleu"],
        lowercase=config.lowercase,
    )
    return mode_report


def run_pipeline(config: PipelineConfig, run_id: Optional[str] = None) -> Dict[str, Any]:
    """
    Run every stage for every mode in `config.modes`.

    A failed stage is recorded and skips the stages that depend on it; the
    other modes still run.
    """
    config.require("source", "target", "align", "trees")
    config.require_tags_for(config.modes)
    if config.test_source:
        config.require("test_source")
    if config.references:
        config.require("references")

    start_time = time.time()
    run_id = run_id or f"pipeline_{int(start_time)}"
    timestamps: Dict[str, Any] = {"pipeline_start": datetime.now().isoformat()}
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    final_report: Dict[str, Any] = {
        "config": config.echo(),
        "pipeline_status": "running",
        "stats": {},
        "graft": {},
        "modes": {},
    }
    summary: Dict[str, List[str]] = {"stages_completed": [], "stages_failed": []}

    logger.info("[PIPELINE] starting run %s, modes %s", run_id, ", ".join(config.modes))
    try:
        final_report["stats"] = stats_stage(
            config.source, config.target, config.align, config.trees,
            extra_sets=config.held_out_sets(), output=out / "stats.txt", timestamps=timestamps,
        )
        summary["stages_completed"].append("stats")
    except SemgraftError as e:
        final_report["stats"] = {"stage": "stats", "status": "failed", "error": str(e)}
        summary["stages_failed"].append("stats")

    if config.tags:
        try:
            final_report["graft"] = graft_stage(
                config.trees, config.tags, out / "grafted.trees", order=config.graft_order,
                allow_extra_labels=config.allow_extra_labels, jobs=config.jobs,
                extra_ne_labels=config.extra_ne_labels, timestamps=timestamps,
            )
            summary["stages_completed"].append("graft")
        except SemgraftError as e:
            final_report["graft"] = {"stage": "graft", "status": "failed", "error": str(e)}
            summary["stages_failed"].append("graft")

    for mode in config.modes:
        logger.info("[PIPELINE] mode %s", mode)
        final_report["modes"][mode] = _run_mode(config, mode, out, timestamps, summary)

    bleu_by_mode = {
        mode: stages["bleu"]["bleu"]
        for mode, stages in final_report["modes"].items()
        if stages.get("bleu", {}).get("status") == "ok"
    }
    final_report["summary"] = {
        **summary,
        "total_stages": len(summary["stages_completed"]) + len(summary["stages_failed"]),
        "bleu_by_mode": bleu_by_mode,
        "ordering": ordering_check(bleu_by_mode),
    }
    final_report["pipeline_status"] = "completed" if not summary["stages_failed"] else "completed_with_errors"

    timestamps["pipeline_end"] = datetime.now().isoformat()
    timestamps["total_duration"] = time.time() - start_time

    report_path = out / REPORT_NAME
    report_path.write_text(json.dumps(final_report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(
        report_path, "pipeline", config=config.echo(),
        counts={"modes": len(config.modes), **{k: len(v) for k, v in summary.items()}},
        timings={"run_id": run_id, **timestamps},
    )

    db_path = runlog_path()
    if db_path:
        db.init_db(db_path)
        db.insert_pipeline_run(db_path, run_id, final_report)
        logger.info("[PIPELINE] run %s stored in %s", run_id, db_path)

    logger.info(
        "[PIPELINE] %s in %.2fs: %d stages ok, %d failed; BLEU %s",
        final_report["pipeline_status"], timestamps["total_duration"],
        len(summary["stages_completed"]), len(summary["stages_failed"]),
        ", ".join(f"{m}={b:.4f}" for m, b in bleu_by_mode.items()) or "n/a",
    )
    return final_report
