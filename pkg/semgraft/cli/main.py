"""
semgraft command line

    semgraft graft    --trees T --tags S --output OUT [--extra-ne-labels L1,L2]
    semgraft extract  --source F --target E --align A --trees T [--tags S] --mode samt+sem --grammar G
    semgraft decode   --grammar G --test-source F --output OUT [--k 10] [--weights W]
    semgraft bleu     --hypotheses H --references R0,R1 [--output REPORT.json] [--lowercase]
    semgraft stats    --source F --target E [--align A --trees T] [--test-source F --references R0]
    semgraft pipeline --config pipeline.cfg [--modes hiero,samt,samt+sem]
    semgraft toy      --output-dir DIR

Every flag may also come from the --config file under the same name.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from semgraft import __version__
from semgraft.cli.config import GRAFT_KINDS, LABEL_MODES, PipelineConfig, load_config, log_level_from_env
from semgraft.errors import ConfigError, SemgraftError
from semgraft.stages.bleu_stage import bleu_stage
from semgraft.stages.coordinator import run_pipeline
from semgraft.stages.decode_stage import decode_stage
from semgraft.stages.extract_stage import extract_stage
from semgraft.stages.graft_stage import graft_stage
from semgraft.stages.stats_stage import stats_stage
from semgraft.tools.semtags import GraftOrder
from semgraft.tools.toydata import write_toy

logger = logging.getLogger("semgraft")

# flag dest -> config field for flags whose names differ
FLAG_FIELDS = {"no_fallback": "allow_fallback"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semgraft", description="Tree-grafting SCFG translation pipeline")
    parser.add_argument("--version", action="version", version=f"semgraft {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging (per-sentence diagnostics)")
    common.add_argument("--jobs", type=int, help="worker processes")

    files = argparse.ArgumentParser(add_help=False)
    for flag in ("--trees", "--tags", "--source", "--target", "--align", "--grammar", "--weights",
                 "--test-source", "--hypotheses", "--output", "--output-dir"):
        files.add_argument(flag)
    files.add_argument("--references", help="comma-separated reference files")

    labels = argparse.ArgumentParser(add_help=False)
    labels.add_argument("--mode", choices=LABEL_MODES)
    labels.add_argument("--modes", help="comma-separated label modes for pipeline")
    labels.add_argument("--graft-order", choices=[o.value for o in GraftOrder])
    labels.add_argument("--allow-extra-labels", action="store_true", default=None)
    labels.add_argument("--extra-ne-labels", help="comma-separated NE labels beyond the built-in inventory")
    labels.add_argument("--max-phrase-len", type=int)
    labels.add_argument("--max-source-symbols", type=int)
    labels.add_argument("--max-nonterminals", type=int)
    labels.add_argument("--allow-adjacent-nonterminals", action="store_true", default=None)
    labels.add_argument("--no-fallback", action="store_true", default=None, help="drop rules with an X label")

    decoding = argparse.ArgumentParser(add_help=False)
    decoding.add_argument("--k", type=int)
    decoding.add_argument("--lowercase", action="store_true", default=None)

    parents = [common, files, labels, decoding]
    sub.add_parser("graft", parents=parents, help="graft standoff tags onto trees")
    sub.add_parser("extract", parents=parents, help="extract and score an SCFG grammar")
    sub.add_parser("decode", parents=parents, help="decode a test set with a grammar")
    sub.add_parser("bleu", parents=parents, help="score hypotheses against references")
    sub.add_parser("stats", parents=parents, help="lines/tokens/types table")
    sub.add_parser("pipeline", parents=parents, help="all stages for one or more label modes")
    sub.add_parser("toy", parents=parents, help="write the bundled toy corpora")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "config", "verbose"}
    overrides: Dict[str, Any] = {}
    for name, value in vars(args).items():
        if name in skip or value is None:
            continue
        if name == "no_fallback":
            overrides[FLAG_FIELDS[name]] = not value
        else:
            overrides[name] = value
    return overrides


def configure_logging(verbose: bool):
    level = "DEBUG" if verbose else log_level_from_env()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ---------- subcommands ----------
def cmd_graft(config: PipelineConfig) -> Dict[str, Any]:
    config.require("trees")
    if config.tags:
        config.require("tags")
    if not config.output:
        raise ConfigError("missing required input: --output")
    return graft_stage(
        config.trees, config.tags, config.output, order=config.graft_order,
        # hiero/samt graft everything here; a semantic mode narrows the kinds
        kinds=GRAFT_KINDS[config.mode],
        allow_extra_labels=config.allow_extra_labels, extra_ne_labels=config.extra_ne_labels, jobs=config.jobs,
    )


def cmd_extract(config: PipelineConfig) -> Dict[str, Any]:
    config.require("source", "target", "align", "trees")
    if not config.grammar:
        raise ConfigError("missing required input: --grammar")
    kinds = GRAFT_KINDS[config.mode]
    if kinds is not None:
        config.require("tags")
    return extract_stage(
        config.source, config.target, config.align, config.trees, config.grammar,
        config=config.extraction_config(config.mode), mode=config.mode, tags=config.tags, kinds=kinds,
        order=config.graft_order, allow_extra_labels=config.allow_extra_labels, jobs=config.jobs,
        extra_ne_labels=config.extra_ne_labels,
    )


def cmd_decode(config: PipelineConfig) -> Dict[str, Any]:
    config.require("grammar", "test_source")
    if config.weights:
        config.require("weights")
    if not config.output:
        raise ConfigError("missing required input: --output")
    return decode_stage(
        config.grammar, config.test_source, config.output,
        config=config.decoder_config(), weights_path=config.weights, jobs=config.jobs,
        extra_ne_labels=config.extra_ne_labels,
    )


def cmd_bleu(config: PipelineConfig) -> Dict[str, Any]:
    config.require("hypotheses", "references")
    return bleu_stage(config.hypotheses, config.references, output=config.output, lowercase=config.lowercase)


def cmd_stats(config: PipelineConfig) -> Dict[str, Any]:
    config.require("source", "target")
    if config.align or config.trees:
        config.require("align", "trees")
    if config.test_source and config.references:
        config.require("test_source", "references")
    return stats_stage(
        config.source, config.target, config.align, config.trees,
        extra_sets=config.held_out_sets(), output=config.output,
    )


def cmd_pipeline(config: PipelineConfig) -> Dict[str, Any]:
    report = run_pipeline(config)
    return {"pipeline_status": report["pipeline_status"], **report["summary"]}


def cmd_toy(config: PipelineConfig) -> Dict[str, Any]:
    written = write_toy(config.output_dir)
    return {name: {k: str(p) for k, p in paths.items()} for name, paths in written.items()}


COMMANDS = {
    "graft": cmd_graft,
    "extract": cmd_extract,
    "decode": cmd_decode,
    "bleu": cmd_bleu,
    "stats": cmd_stats,
    "pipeline": cmd_pipeline,
    "toy": cmd_toy,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Exit status: 0 ok, 1 SemgraftError (bad input or config), 2 anything else."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = load_config(args.config, overrides_from_args(args))
        result = COMMANDS[args.command](config)
    except SemgraftError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception("unexpected failure in %s", args.command)
        print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if args.command == "stats":
        sys.stdout.write(result["table"])
    elif args.command == "bleu":
        print(result["summary"])
    else:
        print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
