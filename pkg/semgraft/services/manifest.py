"""
Run manifests

Every artifact written by the CLI gets a sibling `<artifact>.manifest.json`
recording versions, the config that produced it and its counts. Timestamps
live only here so the artifacts themselves stay byte-stable.
"""

import json
import logging
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Optional, Union

import semgraft

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"
TRACKED_LIBRARIES = ("nltk", "pydantic", "python-dotenv", "sacrebleu")


def library_versions() -> Dict[str, str]:
    versions = {"semgraft": semgraft.__version__, "python": platform.python_version()}
    for name in TRACKED_LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "missing"
    return versions


def manifest_path(artifact: Union[str, Path]) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + MANIFEST_SUFFIX)


def write_manifest(
    artifact: Union[str, Path],
    stage: str,
    config: Dict[str, Any],
    counts: Optional[Dict[str, Any]] = None,
    timings: Optional[Dict[str, Any]] = None,
) -> Path:
    path = manifest_path(artifact)
    doc = {
        "artifact": Path(artifact).name,
        "stage": stage,
        "versions": library_versions(),
        "config": config,
        "counts": counts or {},
        "timings": timings or {},
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    logger.debug("[MANIFEST] wrote %s", path)
    return path


def read_manifest(artifact: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(manifest_path(artifact).read_text(encoding="utf-8"))
