"""
SQLite run log for semgraft pipeline runs.
location: configured by the SEMGRAFT_RUNLOG env var (unset = no run log)

Two tables: one row per run in `pipeline_runs`, and one row per (run, label
mode) in `mode_scores` so BLEU and grammar size can be compared across runs
in SQL.
"""

import json
import sqlite3
from contextlib import closing
from typing import Any, Dict, List, Optional, Tuple

SCHEMA = (
    """
    CREATE TABLE IF NOT EXISTS pipeline_runs (
        run_id TEXT PRIMARY KEY,
        ts_created TEXT,
        pipeline_status TEXT,
        modes_json TEXT,
        stages_failed INTEGER,
        ordering_holds INTEGER,
        report_json TEXT
    )
    """,
    """
    CREATE TABLE IF NOT EXISTS mode_scores (
        run_id TEXT,
        mode TEXT,
        bleu REAL,
        rules INTEGER,
        untranslatable INTEGER,
        PRIMARY KEY (run_id, mode)
    )
    """,
)


def init_db(db_path: str):
    """Create the run log tables if missing."""
    with closing(sqlite3.connect(db_path)) as conn:
        for statement in SCHEMA:
            conn.execute(statement)
        conn.commit()


def _stage_value(stages: Dict[str, Any], stage: str, key: str) -> Optional[Any]:
    result = stages.get(stage) or {}
    return result.get(key) if result.get("status") == "ok" else None


ScoreRow = Tuple[str, str, Optional[float], Optional[int], Optional[int]]


def mode_rows(run_id: str, report: Dict[str, Any]) -> List[ScoreRow]:
    """(run_id, mode, bleu, rules, untranslatable) per mode; None where the stage did not finish."""
    return [
        (
            run_id, mode,
            _stage_value(stages, "bleu", "bleu"),
            _stage_value(stages, "extract", "rules"),
            _stage_value(stages, "decode", "untranslatable"),
        )
        for mode, stages in sorted(report.get("modes", {}).items())
    ]


def insert_pipeline_run(db_path: str, run_id: str, report: Dict[str, Any]):
    """Insert or replace a run together with its per-mode scores."""
    summary = report.get("summary", {})
    ordering = summary.get("ordering", {})
    with closing(sqlite3.connect(db_path)) as conn:
        conn.execute(
            "INSERT OR REPLACE INTO pipeline_runs "
            "(run_id, ts_created, pipeline_status, modes_json, stages_failed, ordering_holds, report_json) "
            "VALUES (?, datetime('now'), ?, ?, ?, ?, ?)",
            (
                run_id,
                report.get("pipeline_status"),
                json.dumps(sorted(report.get("modes", {}))),
                len(summary.get("stages_failed", [])),
                None if "holds" not in ordering else int(ordering["holds"]),
                json.dumps(report, sort_keys=True),
            ),
        )
        conn.execute("DELETE FROM mode_scores WHERE run_id = ?", (run_id,))
        conn.executemany(
            "INSERT INTO mode_scores (run_id, mode, bleu, rules, untranslatable) VALUES (?, ?, ?, ?, ?)",
            mode_rows(run_id, report),
        )
        conn.commit()


def fetch_pipeline_run(db_path: str, run_id: str) -> Optional[Dict[str, Any]]:
    with closing(sqlite3.connect(db_path)) as conn:
        row = conn.execute(
            "SELECT run_id, ts_created, pipeline_status, modes_json, report_json FROM pipeline_runs WHERE run_id = ?",
            (run_id,),
        ).fetchone()
        scores = conn.execute(
            "SELECT mode, bleu, rules, untranslatable FROM mode_scores WHERE run_id = ? ORDER BY mode", (run_id,)
        ).fetchall()
    if not row:
        return None
    return {
        "run_id": row[0],
        "ts_created": row[1],
        "pipeline_status": row[2],
        "modes": json.loads(row[3]),
        "scores": {m: {"bleu": b, "rules": r, "untranslatable": u} for m, b, r, u in scores},
        "report": json.loads(row[4]),
    }


def list_pipeline_runs(db_path: str, status: Optional[str] = None) -> List[str]:
    query = "SELECT run_id FROM pipeline_runs"
    params: Tuple[Any, ...] = ()
    if status is not None:
        query += " WHERE pipeline_status = ?"
        params = (status,)
    with closing(sqlite3.connect(db_path)) as conn:
        rows = conn.execute(query + " ORDER BY ts_created, run_id", params).fetchall()
    return [r[0] for r in rows]


def best_run_for_mode(db_path: str, mode: str) -> Optional[Tuple[str, float]]:
    """(run_id, bleu) of the highest-scoring run for `mode`, or None if it never reached BLEU."""
    with closing(sqlite3.connect(db_path)) as conn:
        row = conn.execute(
            "SELECT run_id, bleu FROM mode_scores WHERE mode = ? AND bleu IS NOT NULL "
            "ORDER BY bleu DESC, run_id LIMIT 1",
            (mode,),
        ).fetchone()
    return (row[0], row[1]) if row else None
