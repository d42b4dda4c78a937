"""Command-line pipeline: build-graph, score-sdm, gen-stimuli,
gen-diagnostics, evaluate, report.

All subcommands read a shared JSON config file (sections per subcommand,
flags override file values) and write outputs atomically (temp file +
rename), so identical inputs produce identical output bytes. Timestamps
appear only in the optional sidecar log.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from importlib import metadata

import jsonschema

from . import datasets, graph as graph_mod, scorer as scorer_mod, stats, stimuli as stimuli_mod
from .embeddings import load_vectors
from .errors import ConfigError, EventfitError

logger = logging.getLogger("eventfit")

_ROLE_NAMES = [role.value for role in datasets.Role if role != datasets.Role.VERB]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "eventfit run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "common": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "output_dir": {"type": "string"},
                "seed": {
                    "type": "integer",
                    "minimum": 0,
                    "description": "reserved for fixture generation tooling",
                },
                "role_relations": {
                    "type": "object",
                    "propertyNames": {"enum": _ROLE_NAMES},
                    "additionalProperties": {
                        "type": "array",
                        "items": {"type": "string"},
                        "minItems": 1,
                    },
                },
            },
        },
        "build-graph": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "corpus": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "min_node_freq": {"type": "integer", "minimum": 1},
                "min_event_freq": {"type": "integer", "minimum": 1},
                "relations": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "max_arity": {"type": "integer", "minimum": 1},
                "out": {"type": "string"},
                "export_tsv": {"type": "string"},
            },
        },
        "score-sdm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "graph": {"type": "string"},
                "vectors": {"type": "string"},
                "dataset": {"type": "string"},
                "role": {"enum": _ROLE_NAMES},
                "k": {"type": "integer", "minimum": 1},
                "out": {"type": "string"},
                "uncovered_out": {"type": "string"},
                "trace_out": {"type": "string"},
            },
        },
        "gen-stimuli": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dataset": {"type": "string"},
                "role": {"enum": _ROLE_NAMES},
                "constructions": {
                    "type": "array",
                    "items": {"enum": list(stimuli_mod.CONSTRUCTIONS)},
                    "minItems": 1,
                },
                "variants": {
                    "type": "array",
                    "items": {"enum": ["typical", "atypical"]},
                    "minItems": 1,
                },
                "out_dir": {"type": "string"},
            },
        },
        "gen-diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["adversarial", "synonym-check"]},
                "dataset": {"type": "string"},
                "role": {"enum": _ROLE_NAMES},
                "graph": {"type": "string"},
                "k": {"type": "integer", "minimum": 1},
                "out": {"type": "string"},
                "emit_dataset": {"type": "string"},
                "candidates": {"type": "string"},
                "cap": {"type": "integer", "minimum": 1},
            },
        },
        "evaluate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dataset": {"type": "string"},
                "role": {"enum": _ROLE_NAMES},
                "records": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "scorer": {"type": "string"},
                "compare_to": {"type": "string"},
                "log_scores": {"type": "boolean"},
                "residuals": {"type": "boolean"},
                "out": {"type": "string"},
                "scatter_out": {"type": "string"},
            },
        },
        "report": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "reports": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "out": {"type": "string"},
            },
        },
    },
}

_ERROR_MODULES = {
    "DatasetFormatError": "datasets",
    "GraphFormatError": "corpus-graph",
    "EmbeddingFormatError": "embeddings",
    "ZeroVectorError": "embeddings",
    "UncoveredItemError": "sdm-scorer",
    "InflectionError": "diagnostics",
    "CoverageError": "eval-stats",
    "ConfigError": "cli",
}


@contextmanager
def atomic_output(path):
    """Yield a temp path, renamed onto `path` on success."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    tmp = f"{path}.tmp"
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    try:
        jsonschema.validate(document, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{path}: at {exc.json_path}: {exc.message}")
    return document


class Settings:
    """Merged view of CLI flags over a config-file section."""

    def __init__(self, args: argparse.Namespace, config: dict, section: str):
        self._args = args
        self._section = dict(config.get("common", {}))
        self._section.update(config.get(section, {}))

    def get(self, key: str, default=None):
        value = getattr(self._args, key, None)
        if value is not None:
            return value
        return self._section.get(key, default)

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise ConfigError(f"missing required setting {key!r} (flag or config)")
        return value


def _role_map(settings: Settings) -> graph_mod.RoleRelationMap:
    mapping = settings.get("role_relations")
    if mapping is None:
        return graph_mod.DEFAULT_ROLE_RELATIONS
    return graph_mod.RoleRelationMap.from_config(mapping)


def _cmd_build_graph(args, config) -> int:
    settings = Settings(args, config, "build-graph")
    corpus_paths = settings.require("corpus")
    out = settings.require("out")
    ingest_config = graph_mod.IngestConfig(
        harvest_relations=frozenset(settings.get("relations", sorted(graph_mod.DEFAULT_HARVEST_RELATIONS))),
        max_event_arity=settings.get("max_arity", 3),
    )
    shards = [graph_mod.ingest_conllu(path, ingest_config) for path in corpus_paths]
    counts = graph_mod.merge_counts(shards)
    unpruned = graph_mod.compute_association(counts)
    pruned = graph_mod.prune(
        unpruned,
        settings.get("min_node_freq", graph_mod.DEFAULT_MIN_NODE_FREQ),
        settings.get("min_event_freq", graph_mod.DEFAULT_MIN_EVENT_FREQ),
    )
    with atomic_output(out) as tmp:
        graph_mod.save_graph(pruned, tmp)
    export_dir = settings.get("export_tsv")
    if export_dir:
        graph_mod.export_tsv(pruned, export_dir)
    print(
        f"graph: {len(pruned.nodes)} nodes, {len(pruned.edges)} edges, "
        f"{len(pruned.events)} events (thresholds {pruned.thresholds[0]},{pruned.thresholds[1]}) -> {out}"
    )
    return 0


def _load_pairs(settings: Settings) -> list[datasets.ItemPair]:
    return datasets.load_dtfit(settings.require("dataset"), datasets.Role(settings.require("role")))


def _cmd_score_sdm(args, config) -> int:
    settings = Settings(args, config, "score-sdm")
    out = settings.require("out")
    pairs = _load_pairs(settings)
    event_graph = graph_mod.load_graph(settings.require("graph"))
    store = load_vectors(settings.require("vectors"))
    role_map = _role_map(settings)
    k = settings.get("k", scorer_mod.DEFAULT_ASSOCIATES_PER_CUE)
    result = scorer_mod.score_dataset(pairs, event_graph, store, k, role_map)
    with atomic_output(out) as tmp:
        datasets.write_score_records(result.records, tmp)
    uncovered_out = settings.get("uncovered_out")
    if uncovered_out:
        with atomic_output(uncovered_out) as tmp:
            with open(tmp, "w", encoding="utf-8") as handle:
                handle.write("pair_id\treason\n")
                for pair_id, reason in result.uncovered:
                    handle.write(f"{pair_id}\t{reason}\n")
    trace_out = settings.get("trace_out")
    if trace_out:
        with atomic_output(trace_out) as tmp:
            scorer_mod.export_cue_traces(pairs, event_graph, store, tmp, k, role_map)
    covered = len(pairs) - len(result.uncovered)
    print(f"scored {covered}/{len(pairs)} pairs ({len(result.records)} records) -> {out}")
    return 0


def _cmd_gen_stimuli(args, config) -> int:
    settings = Settings(args, config, "gen-stimuli")
    out_dir = settings.require("out_dir")
    pairs = _load_pairs(settings)
    constructions = settings.get("constructions", list(stimuli_mod.CONSTRUCTIONS))
    variants = settings.get("variants", ["typical", "atypical"])
    os.makedirs(out_dir, exist_ok=True)
    total = 0
    for construction in constructions:
        batch = [
            stimuli_mod.realize(pair.base, pair.filler(variant).lemma, construction, variant)
            for pair in pairs
            for variant in variants
        ]
        path = os.path.join(out_dir, f"stimuli_{construction}.jsonl")
        with atomic_output(path) as tmp:
            stimuli_mod.write_stimuli(batch, tmp)
        total += len(batch)
        print(f"{construction}: {len(batch)} stimuli -> {path}")
    print(f"total: {total} stimuli")
    return 0


def _cmd_gen_diagnostics(args, config) -> int:
    settings = Settings(args, config, "gen-diagnostics")
    mode = settings.require("mode")
    out = settings.require("out")
    event_graph = graph_mod.load_graph(settings.require("graph"))
    if mode == "adversarial":
        pairs = _load_pairs(settings)
        role_map = _role_map(settings)
        k = settings.get("k", 10)
        rows = []
        replacements = {}
        for pair in pairs:
            base = pair.base
            relation = role_map.primary(base.target_role,
                                        base.preposition_override if base.target_role in datasets.OBLIQUE_ROLES else None)
            candidates = stimuli_mod.adversarial_fillers(
                base.verb, relation, event_graph, base, k,
                original=pair.atypical.lemma,
                exclude={pair.typical.lemma, pair.atypical.lemma},
            )
            for rank, cand in enumerate(candidates, start=1):
                rows.append((pair.pair_id, base.verb, cand.original, cand.replacement,
                             rank, cand.lmi, cand.freq_original, cand.freq_replacement))
            if candidates:
                replacements[pair.pair_id] = candidates[0].replacement
        with atomic_output(out) as tmp:
            with open(tmp, "w", encoding="utf-8") as handle:
                handle.write("pair_id\tverb\toriginal\tcandidate\trank\tlmi\tfreq_original\tfreq_candidate\n")
                for row in rows:
                    pair_id, verb, orig, cand, rank, lmi, f_o, f_c = row
                    handle.write(f"{pair_id}\t{verb}\t{orig}\t{cand}\t{rank}\t{lmi:.6f}\t{f_o}\t{f_c}\n")
        print(f"adversarial candidates for {len(replacements)}/{len(pairs)} pairs -> {out}")
        emit = settings.get("emit_dataset")
        if emit:
            derived = []
            for pair in pairs:
                if pair.pair_id not in replacements:
                    continue
                derived.append(datasets.ItemPair(
                    pair_id=pair.pair_id,
                    typical=datasets.Filler(pair.typical.lemma, None),
                    atypical=datasets.Filler(replacements[pair.pair_id], None),
                    base=pair.base,
                ))
            with atomic_output(emit) as tmp:
                datasets.write_dtfit(derived, tmp)
            print(f"derived diagnostic set: {len(derived)} pairs -> {emit} (curate before use)")
        return 0

    # synonym-check: validate (original, replacement) rows against corpus frequencies
    candidates_path = settings.require("candidates")
    cap = settings.get("cap", stimuli_mod.DEFAULT_FREQUENCY_CAP)
    checked = []
    with open(candidates_path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("original\t"):
                continue
            cells = line.split("\t")
            if len(cells) < 2:
                raise datasets.DatasetFormatError(
                    "expected columns: original, replacement", line=line_no, path=candidates_path
                )
            cand = stimuli_mod.SwapCandidate(
                original=cells[0].strip(), replacement=cells[1].strip(),
                freq_original=event_graph.node_frequency(cells[0].strip()),
                freq_replacement=event_graph.node_frequency(cells[1].strip()),
                source="synonym",
            )
            verdict = stimuli_mod.validate_synonym_swap(cand, event_graph.nodes, cap)
            checked.append((cand, verdict))
    with atomic_output(out) as tmp:
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write("original\treplacement\tfreq_original\tfreq_replacement\tvalid\treason\n")
            for cand, verdict in checked:
                handle.write(
                    f"{cand.original}\t{cand.replacement}\t{cand.freq_original}\t"
                    f"{cand.freq_replacement}\t{str(verdict.valid).lower()}\t{verdict.reason}\n"
                )
    n_valid = sum(1 for _, verdict in checked if verdict.valid)
    print(f"synonym check: {n_valid}/{len(checked)} valid swaps -> {out}")
    return 0


def _cmd_evaluate(args, config) -> int:
    settings = Settings(args, config, "evaluate")
    out = settings.require("out")
    pairs = _load_pairs(settings)
    records = []
    for path in settings.require("records"):
        records.extend(datasets.read_score_records(path))
    options = stats.EvalOptions(
        scorer=settings.get("scorer"),
        compare_to=settings.get("compare_to"),
        log_scores=bool(settings.get("log_scores", False)),
        residuals=bool(settings.get("residuals", False)),
        dataset=os.path.basename(str(settings.require("dataset"))),
    )
    report = stats.evaluate(pairs, records, options)
    with atomic_output(out) as tmp:
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(stats.report_tsv_header() + "\n")
            handle.write(stats.report_tsv_row(report) + "\n")
    scatter_out = settings.get("scatter_out")
    if scatter_out:
        with atomic_output(scatter_out) as tmp:
            stats.export_scatter_tsv(pairs, records, tmp, scorer=report.scorer,
                                     log_scores=bool(settings.get("log_scores", False)))
    print(stats.render_reports([report]))
    return 0


def _cmd_report(args, config) -> int:
    settings = Settings(args, config, "report")
    out = settings.require("out")
    header = stats.report_tsv_header()
    rows = []
    for path in settings.require("reports"):
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line or line == header:
                    continue
                rows.append(line.split("\t"))
    with atomic_output(out) as tmp:
        with open(tmp, "w", encoding="utf-8") as handle:
            handle.write(header + "\n")
            for row in sorted(rows):
                handle.write("\t".join(row) + "\n")

    datasets_seen = sorted({row[0] for row in rows})
    scorers_seen = sorted({row[1] for row in rows})
    by_key = {(row[0], row[1]): row for row in rows}
    for label, column in (("spearman rho", 4), ("accuracy", 5)):
        if not any(row[column] for row in rows):
            continue
        print(f"\n{label} (rows: dataset, columns: scorer)")
        widths = [max(len(d) for d in datasets_seen + ["dataset"])] + [
            max(len(s), 8) for s in scorers_seen
        ]
        print("  ".join(["dataset".ljust(widths[0])] + [
            s.ljust(widths[i + 1]) for i, s in enumerate(scorers_seen)
        ]))
        for ds in datasets_seen:
            cells = [ds.ljust(widths[0])]
            for i, s in enumerate(scorers_seen):
                row = by_key.get((ds, s))
                cell = row[column] if row and row[column] else "-"
                if cell not in ("-", "") and column in (4, 5):
                    cell = f"{float(cell):.3f}"
                cells.append(cell.ljust(widths[i + 1]))
            print("  ".join(cells).rstrip())
    print(f"\nmerged {len(rows)} report rows -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventfit",
        description="Build event co-occurrence graphs, score role fillers, "
                    "generate stimuli, and evaluate scorers.",
    )
    parser.add_argument("--version", action="version", version=metadata.version("eventfit"))
    parser.add_argument("--config-schema", action="store_true",
                        help="print the JSON schema of the config file and exit")
    parser.add_argument("--config", help="JSON config file with per-subcommand sections")
    parser.add_argument("--log-file", help="append timestamped logs to this sidecar file")
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build-graph", help="ingest CoNLL-U corpora into a pruned event graph")
    p.add_argument("--corpus", action="append", help="CoNLL-U file (repeatable; shards merge)")
    p.add_argument("--min-node-freq", type=int, dest="min_node_freq")
    p.add_argument("--min-event-freq", type=int, dest="min_event_freq")
    p.add_argument("--relations", nargs="+", help="dependency relations to harvest")
    p.add_argument("--max-arity", type=int, dest="max_arity")
    p.add_argument("--out")
    p.add_argument("--export-tsv", dest="export_tsv", help="also dump debug TSV tables here")

    p = sub.add_parser("score-sdm", help="score a pair dataset with the graph+embedding model")
    p.add_argument("--graph")
    p.add_argument("--vectors")
    p.add_argument("--dataset")
    p.add_argument("--role", choices=_ROLE_NAMES)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--uncovered-out", dest="uncovered_out")
    p.add_argument("--trace-out", dest="trace_out")

    p = sub.add_parser("gen-stimuli", help="realize sentences with a marked filler slot")
    p.add_argument("--dataset")
    p.add_argument("--role", choices=_ROLE_NAMES)
    p.add_argument("--constructions", nargs="+", choices=list(stimuli_mod.CONSTRUCTIONS))
    p.add_argument("--variants", nargs="+", choices=["typical", "atypical"])
    p.add_argument("--out-dir", dest="out_dir")

    p = sub.add_parser("gen-diagnostics", help="rank adversarial fillers / validate synonym swaps")
    p.add_argument("--mode", choices=["adversarial", "synonym-check"])
    p.add_argument("--dataset")
    p.add_argument("--role", choices=_ROLE_NAMES)
    p.add_argument("--graph")
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--emit-dataset", dest="emit_dataset")
    p.add_argument("--candidates", help="TSV of original/replacement rows (synonym-check)")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("evaluate", help="correlate scores with ratings and compare scorers")
    p.add_argument("--dataset")
    p.add_argument("--role", choices=_ROLE_NAMES)
    p.add_argument("--records", action="append", help="ScoreRecord JSONL (repeatable)")
    p.add_argument("--scorer")
    p.add_argument("--compare-to", dest="compare_to")
    p.add_argument("--log-scores", dest="log_scores", action="store_const", const=True)
    p.add_argument("--residuals", action="store_const", const=True)
    p.add_argument("--out")
    p.add_argument("--scatter-out", dest="scatter_out")

    p = sub.add_parser("report", help="merge evaluation reports into one matrix")
    p.add_argument("--reports", action="append", help="report TSV (repeatable)")
    p.add_argument("--out")

    return parser


_COMMANDS = {
    "build-graph": _cmd_build_graph,
    "score-sdm": _cmd_score_sdm,
    "gen-stimuli": _cmd_gen_stimuli,
    "gen-diagnostics": _cmd_gen_diagnostics,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config_schema:
        print(json.dumps(CONFIG_SCHEMA, indent=2, sort_keys=True))
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    handlers = [logging.StreamHandler(sys.stderr)]
    if args.log_file:
        handlers.append(logging.FileHandler(args.log_file))
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        handlers=handlers,
        force=True,
    )
    try:
        config = load_config(args.config) if args.config else {}
        return _COMMANDS[args.command](args, config)
    except EventfitError as exc:
        module = _ERROR_MODULES.get(type(exc).__name__, "eventfit")
        print(f"eventfit {args.command}: [{module}] {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"eventfit {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
