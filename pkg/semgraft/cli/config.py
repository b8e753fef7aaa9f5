"""
Pipeline configuration

A flat key-value config file (read with python-dotenv) supplies defaults for
every parameter; command-line flags of the same name override it. Keys may
use dashes or underscores.

    mode=samt+sem
    max_phrase_len=10
    references=dev.ref0,dev.ref1
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from semgraft.errors import ConfigError
from semgraft.tools.decoder import DecoderConfig
from semgraft.tools.extraction import ExtractionConfig
from semgraft.tools.semtags import GraftOrder, TagKind

logger = logging.getLogger(__name__)

LabelModeName = Literal["hiero", "samt", "samt+ne", "samt+mod", "samt+sem"]
LABEL_MODES = ("hiero", "samt", "samt+ne", "samt+mod", "samt+sem")

# tag kinds grafted before extraction, per label mode
GRAFT_KINDS: Dict[str, Optional[FrozenSet[TagKind]]] = {
    "hiero": None,
    "samt": None,
    "samt+ne": frozenset({TagKind.NAMED_ENTITY}),
    "samt+mod": frozenset({TagKind.MODALITY_TRIGGER, TagKind.MODALITY_TARGET}),
    "samt+sem": frozenset(TagKind),
}

ENV_LOG_LEVEL = "SEMGRAFT_LOG_LEVEL"
ENV_RUNLOG = "SEMGRAFT_RUNLOG"


class PipelineConfig(BaseModel):
    # inputs / outputs
    trees: Optional[str] = None
    tags: Optional[str] = None
    source: Optional[str] = None
    target: Optional[str] = None
    align: Optional[str] = None
    grammar: Optional[str] = None
    weights: Optional[str] = None
    test_source: Optional[str] = None
    references: List[str] = Field(default_factory=list)
    hypotheses: Optional[str] = None
    output: Optional[str] = None
    output_dir: str = "semgraft_out"

    # grafting and labels
    mode: LabelModeName = "samt"
    modes: List[LabelModeName] = Field(default_factory=lambda: ["hiero", "samt", "samt+sem"])
    graft_order: GraftOrder = GraftOrder.NE_FIRST
    allow_extra_labels: bool = False
    # NE labels beyond the built-in inventory, recognized in tag files and grafted labels
    extra_ne_labels: List[str] = Field(default_factory=list)

    # extraction
    max_phrase_len: int = Field(10, gt=0)
    max_source_symbols: int = Field(5, gt=0)
    max_nonterminals: int = Field(2, ge=0, le=2)
    allow_adjacent_nonterminals: bool = False
    allow_fallback: bool = True

    # decoding and evaluation
    k: int = Field(10, gt=0)
    goal_label: str = "GOAL"
    oov_passthrough: bool = True
    lowercase: bool = False
    jobs: int = Field(1, gt=0)

    @field_validator("references", "modes", "extra_ne_labels", mode="before")
    @classmethod
    def split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("extra_ne_labels")
    @classmethod
    def plain_labels(cls, value: List[str]) -> List[str]:
        for label in value:
            if any(ch.isspace() or ch in "()" for ch in label):
                raise ValueError(f"invalid NE label {label!r}")
        return value

    @model_validator(mode="after")
    def semantic_mode_needs_tags(self) -> "PipelineConfig":
        # `modes` is only checked by the pipeline, see require_tags_for
        if GRAFT_KINDS[self.mode] is not None and self.tags is None:
            raise ValueError(f"label mode {self.mode} requires a standoff tag file (--tags)")
        return self

    def require(self, *names: str):
        missing = [n for n in names if not getattr(self, n)]
        if missing:
            raise ConfigError("missing required input: " + ", ".join(f"--{n.replace('_', '-')}" for n in missing))
        for n in names:
            value = getattr(self, n)
            for path in value if isinstance(value, list) else [value]:
                if not Path(path).exists():
                    raise ConfigError(f"--{n.replace('_', '-')}: no such file {path}")

    def require_tags_for(self, modes: List[str]):
        if any(GRAFT_KINDS[m] is not None for m in modes) and self.tags is None:
            raise ConfigError(f"label modes {', '.join(modes)} include a semantic mode, which requires --tags")

    def extraction_config(self, mode: str) -> ExtractionConfig:
        return ExtractionConfig(
            max_phrase_len=self.max_phrase_len,
            max_source_symbols=self.max_source_symbols,
            max_nonterminals=self.max_nonterminals,
            allow_adjacent_nonterminals=self.allow_adjacent_nonterminals,
            label_mode="hiero" if mode == "hiero" else "samt",
            allow_fallback=self.allow_fallback,
        )

    def held_out_sets(self) -> Dict[str, Tuple[str, str]]:
        """Plain-text sets for the stats table; the test set pairs with its first reference."""
        if self.test_source and self.references:
            return {"test": (self.test_source, self.references[0])}
        return {}

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(k=self.k, goal_label=self.goal_label, oov_passthrough=self.oov_passthrough)

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """
    Defaults < config file < overrides. Override values of None mean
    "flag not given" and are ignored.
    """
    values: Dict[str, Any] = {}
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file not found: {path}")
        for key, value in dotenv_values(path).items():
            if value is not None:
                values[normalize_key(key)] = value
        logger.debug("[CONFIG] loaded %d keys from %s", len(values), path)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[normalize_key(key)] = value

    unknown = sorted(set(values) - set(PipelineConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return PipelineConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"invalid configuration: {where}: {first['msg']}") from e


def log_level_from_env(default: str = "INFO") -> str:
    return os.getenv(ENV_LOG_LEVEL, default).upper()


def runlog_path() -> Optional[str]:
    return os.getenv(ENV_RUNLOG) or None
