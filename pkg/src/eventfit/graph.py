"""Distributional event graph: counting, association weighting, pruning,
persistence, and associate/event queries.

Counting streams CoNLL-U text and never materializes the corpus; shards can
be ingested independently and merged (counts add commutatively). Edges are
weighted with PMI and LMI (= count x PMI), computed per dependency relation
from maximum-likelihood probabilities.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .datasets import ROLE_DEFAULT_PREPOSITION, Role
from .errors import GraphFormatError

logger = logging.getLogger(__name__)

#: Frequency thresholds used for the full-scale graph.
DEFAULT_MIN_NODE_FREQ = 300
DEFAULT_MIN_EVENT_FREQ = 30

DEFAULT_HARVEST_RELATIONS = frozenset({"nsubj", "obj", "iobj", "obl", "nmod", "amod"})

#: Sentinel relation label marking the verb cue in event queries.
VERB_CUE = "verb"

_BLOCK_LINES = 8192

Edge = tuple[str, str, str]  # (head lemma, relation label, dependent lemma)
EventKey = tuple[str, tuple[tuple[str, str], ...]]  # (verb, sorted participants)


@dataclass(frozen=True)
class IngestConfig:
    """Which dependency relations to harvest and how events are bounded."""

    harvest_relations: frozenset[str] = DEFAULT_HARVEST_RELATIONS
    max_event_arity: int = 3
    verb_upos: frozenset[str] = frozenset({"VERB"})

    def __post_init__(self):
        if not self.harvest_relations:
            raise ValueError("harvest_relations must be nonempty")
        if self.max_event_arity < 1:
            raise ValueError("max_event_arity must be >= 1")


@dataclass
class RelationCounts:
    """Raw corpus statistics: lemma, edge, and joint-event frequencies."""

    node_freq: dict[str, int] = field(default_factory=dict)
    edge_freq: dict[Edge, int] = field(default_factory=dict)
    event_freq: dict[EventKey, int] = field(default_factory=dict)
    relation_totals: dict[str, int] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not self.edge_freq and not self.node_freq

    def merge(self, other: "RelationCounts") -> "RelationCounts":
        """Commutative addition of two shard counts."""
        merged = RelationCounts(
            dict(self.node_freq), dict(self.edge_freq),
            dict(self.event_freq), dict(self.relation_totals),
        )
        for target, source in (
            (merged.node_freq, other.node_freq),
            (merged.edge_freq, other.edge_freq),
            (merged.event_freq, other.event_freq),
            (merged.relation_totals, other.relation_totals),
        ):
            for key, count in source.items():
                target[key] = target.get(key, 0) + count
        return merged

    def validate(self) -> None:
        """Check the internal consistency invariants."""
        totals: dict[str, int] = {}
        for (_, relation, _), count in self.edge_freq.items():
            if count < 1:
                raise ValueError("edge counts must be >= 1")
            totals[relation] = totals.get(relation, 0) + count
        if totals != self.relation_totals:
            raise ValueError("relation_totals inconsistent with edge_freq")
        if any(c < 1 for c in self.node_freq.values()):
            raise ValueError("node counts must be >= 1")
        if any(c < 1 for c in self.event_freq.values()):
            raise ValueError("event counts must be >= 1")


def merge_counts(shards: Iterable[RelationCounts]) -> RelationCounts:
    merged = RelationCounts()
    for shard in shards:
        merged = merged.merge(shard)
    return merged


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if path.endswith(".gz"):
            return gzip.open(path, "rt", encoding="utf-8")
        return open(path, encoding="utf-8")
    return None


def ingest_conllu(source, config: IngestConfig = IngestConfig()) -> RelationCounts:
    """Stream CoNLL-U text (a path or an iterable of lines) into counts.

    Sentences containing malformed token lines are skipped and tallied in the
    log; comment lines are ignored; blank lines separate sentences.
    """
    handle = _open_text(source)
    lines = handle if handle is not None else source
    counts = RelationCounts()
    n_sentences = 0
    n_skipped = 0
    block: list[str] = []
    try:
        for line in lines:
            block.append(line)
            if len(block) >= _BLOCK_LINES and line.strip() == "":
                ok, bad = kernels.harvest_lines(
                    block, config.harvest_relations, config.max_event_arity, config.verb_upos,
                    counts.node_freq, counts.edge_freq, counts.event_freq, counts.relation_totals,
                )
                n_sentences += ok
                n_skipped += bad
                block = []
        if block:
            ok, bad = kernels.harvest_lines(
                block, config.harvest_relations, config.max_event_arity, config.verb_upos,
                counts.node_freq, counts.edge_freq, counts.event_freq, counts.relation_totals,
            )
            n_sentences += ok
            n_skipped += bad
    finally:
        if handle is not None:
            handle.close()
    if n_skipped:
        logger.warning("skipped %d malformed sentences (%d kept)", n_skipped, n_sentences)
    else:
        logger.info("ingested %d sentences", n_sentences)
    return counts


class EdgeWeights(tuple):
    """(count, pmi, lmi) for one graph edge."""

    __slots__ = ()

    def __new__(cls, count: int, pmi: float, lmi: float):
        return super().__new__(cls, (count, pmi, lmi))

    @property
    def count(self) -> int:
        return self[0]

    @property
    def pmi(self) -> float:
        return self[1]

    @property
    def lmi(self) -> float:
        return self[2]


@dataclass
class EventGraph:
    """Relation-labeled co-occurrence graph with PMI/LMI edge weights.

    Immutable once built; query indexes are created lazily and cached.
    """

    nodes: dict[str, int]
    edges: dict[Edge, EdgeWeights]
    events: dict[EventKey, int]
    thresholds: tuple[int, int] = (1, 1)

    _assoc_index: Optional[dict] = field(default=None, compare=False, repr=False)
    _event_index: Optional[dict] = field(default=None, compare=False, repr=False)

    def node_frequency(self, lemma: str) -> int:
        return self.nodes.get(lemma, 0)

    def _associates(self):
        if self._assoc_index is None:
            index: dict[tuple[str, str, str], list] = {}
            for (head, relation, dep), weights in self.edges.items():
                index.setdefault((head, relation, "as_head"), []).append(
                    (dep, weights.lmi, weights.count)
                )
                index.setdefault((dep, relation, "as_dependent"), []).append(
                    (head, weights.lmi, weights.count)
                )
            for neighbors in index.values():
                neighbors.sort(key=lambda item: (-item[1], -item[2], item[0]))
            self._assoc_index = index
        return self._assoc_index

    def _events_by_member(self):
        if self._event_index is None:
            index: dict[tuple[str, str], list[EventKey]] = {}
            for key in self.events:
                verb, participants = key
                index.setdefault((VERB_CUE, verb), []).append(key)
                for participant in participants:
                    index.setdefault(participant, []).append(key)
            self._event_index = index
        return self._event_index


def compute_association(counts: RelationCounts) -> EventGraph:
    """Weight every counted edge with PMI and LMI (unpruned graph).

    Probabilities are maximum-likelihood estimates conditioned on each
    relation's total count; no smoothing.
    """
    if counts.is_empty:
        raise ValueError("cannot weight empty counts")
    head_marginal: dict[tuple[str, str], int] = {}
    dep_marginal: dict[tuple[str, str], int] = {}
    for (head, relation, dep), count in counts.edge_freq.items():
        head_marginal[(relation, head)] = head_marginal.get((relation, head), 0) + count
        dep_marginal[(relation, dep)] = dep_marginal.get((relation, dep), 0) + count

    keys = sorted(counts.edge_freq)
    n = len(keys)
    count_arr = np.empty(n, dtype=np.float64)
    head_arr = np.empty(n, dtype=np.float64)
    dep_arr = np.empty(n, dtype=np.float64)
    total_arr = np.empty(n, dtype=np.float64)
    for i, key in enumerate(keys):
        head, relation, dep = key
        count_arr[i] = counts.edge_freq[key]
        head_arr[i] = head_marginal[(relation, head)]
        dep_arr[i] = dep_marginal[(relation, dep)]
        total_arr[i] = counts.relation_totals[relation]
    pmi, lmi = kernels.assoc_scores(count_arr, head_arr, dep_arr, total_arr)

    edges = {
        key: EdgeWeights(counts.edge_freq[key], float(pmi[i]), float(lmi[i]))
        for i, key in enumerate(keys)
    }
    return EventGraph(
        nodes=dict(counts.node_freq),
        edges=edges,
        events=dict(counts.event_freq),
        thresholds=(1, 1),
    )


def prune(graph: EventGraph,
          min_node_freq: int = DEFAULT_MIN_NODE_FREQ,
          min_event_freq: int = DEFAULT_MIN_EVENT_FREQ) -> EventGraph:
    """Drop rare nodes (with their incident edges) and rare events.

    Events also vanish when their verb or any participant was dropped. The
    thresholds are recorded on the result.
    """
    if min_node_freq < 1 or min_event_freq < 1:
        raise ValueError("thresholds must be >= 1")
    nodes = {lemma: freq for lemma, freq in graph.nodes.items() if freq >= min_node_freq}
    edges = {
        key: weights
        for key, weights in graph.edges.items()
        if key[0] in nodes and key[2] in nodes
    }
    events = {
        key: count
        for key, count in graph.events.items()
        if count >= min_event_freq
        and key[0] in nodes
        and all(lemma in nodes for _, lemma in key[1])
    }
    return EventGraph(nodes=nodes, edges=edges, events=events,
                      thresholds=(min_node_freq, min_event_freq))


def top_associates(graph: EventGraph, cue: str, relation: str,
                   direction: str = "as_head", k: int = 20) -> list[tuple[str, float]]:
    """The k strongest LMI neighbors of `cue` under (relation, direction).

    Sorted by LMI descending, ties broken by raw count then lemma. An unknown
    cue yields an empty list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if direction not in ("as_head", "as_dependent"):
        raise ValueError(f"bad direction {direction!r}")
    neighbors = graph._associates().get((cue, relation, direction), [])
    return [(lemma, lmi) for lemma, lmi, _ in neighbors[:k]]


@dataclass(frozen=True)
class FillerQuery:
    """Ranked target-role fillers plus the route that produced them."""

    fillers: tuple[tuple[str, float], ...]
    used_fallback: bool


def query_event_fillers(graph: EventGraph, cues: Sequence[tuple[str, str]],
                        target_relation: str, k: int = 20) -> FillerQuery:
    """Rank fillers of `target_relation` within events containing all cues.

    A cue is (relation label, lemma); the label `verb` matches the event's
    root. Joint-event weights are summed event counts. A lone verb cue
    degenerates to its direct associates (LMI-weighted); when no joint event
    yields a filler, the query falls back to the verb cue's top associates
    and flags the result.
    """
    if not cues:
        raise ValueError("cues must be nonempty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(cues) == 1 and cues[0][0] == VERB_CUE:
        return FillerQuery(
            tuple(top_associates(graph, cues[0][1], target_relation, "as_head", k)), False
        )
    index = graph._events_by_member()
    candidates: Optional[set[EventKey]] = None
    for cue in cues:
        keys = index.get(tuple(cue), ())
        candidates = set(keys) if candidates is None else candidates & set(keys)
        if not candidates:
            break

    weights: dict[str, int] = {}
    for key in candidates or ():
        count = graph.events[key]
        for relation, lemma in key[1]:
            if relation == target_relation:
                weights[lemma] = weights.get(lemma, 0) + count
    if weights:
        ranked = sorted(weights.items(), key=lambda item: (-item[1], item[0]))
        return FillerQuery(tuple((lemma, float(w)) for lemma, w in ranked[:k]), False)

    verb_lemma = next((lemma for relation, lemma in cues if relation == VERB_CUE), None)
    if verb_lemma is None:
        return FillerQuery((), True)
    fallback = top_associates(graph, verb_lemma, target_relation, "as_head", k)
    return FillerQuery(tuple(fallback), True)


@dataclass(frozen=True)
class RoleRelationMap:
    """Semantic role -> dependency relation labels (with `{prep}` holes)."""

    relations: Mapping[Role, tuple[str, ...]]

    def __post_init__(self):
        for role, labels in self.relations.items():
            if not labels:
                raise ValueError(f"role {role.value} maps to no relation labels")

    def resolve(self, role: Role, preposition: Optional[str] = None) -> tuple[str, ...]:
        """Concrete relation labels for a role, filling the preposition hole."""
        try:
            templates = self.relations[Role(role)]
        except KeyError:
            raise KeyError(f"no relation mapping for role {Role(role).value!r}")
        prep = preposition or ROLE_DEFAULT_PREPOSITION.get(Role(role), "")
        return tuple(template.format(prep=prep) for template in templates)

    def primary(self, role: Role, preposition: Optional[str] = None) -> str:
        return self.resolve(role, preposition)[0]

    @classmethod
    def from_config(cls, mapping: Mapping[str, Sequence[str]]) -> "RoleRelationMap":
        return cls({Role(name): tuple(labels) for name, labels in mapping.items()})


DEFAULT_ROLE_RELATIONS = RoleRelationMap(
    {
        Role.AGENT: ("nsubj",),
        Role.PATIENT: ("obj",),
        Role.INSTRUMENT: ("obl:{prep}",),
        Role.LOCATION: ("obl:{prep}",),
        Role.TIME: ("obl:{prep}",),
    }
)


_MAGIC = b"EVENTGRAPH/1"
FORMAT_VERSION = 1


def _payload(graph: EventGraph) -> bytes:
    document = {
        "format_version": FORMAT_VERSION,
        "thresholds": list(graph.thresholds),
        "nodes": [[lemma, freq] for lemma, freq in sorted(graph.nodes.items())],
        "edges": [
            [head, relation, dep, weights.count, weights.pmi, weights.lmi]
            for (head, relation, dep), weights in sorted(graph.edges.items())
        ],
        "events": [
            [verb, [list(p) for p in participants], count]
            for (verb, participants), count in sorted(graph.events.items())
        ],
    }
    return json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_graph(graph: EventGraph, path) -> None:
    """Persist to the versioned, checksummed container (deterministic bytes)."""
    payload = _payload(graph)
    digest = hashlib.sha256(payload).hexdigest().encode("ascii")
    with open(path, "wb") as handle:
        handle.write(_MAGIC + b"\n" + digest + b"\n" + payload)


def load_graph(path) -> EventGraph:
    with open(path, "rb") as handle:
        blob = handle.read()
    header, _, rest = blob.partition(b"\n")
    if header != _MAGIC:
        raise GraphFormatError(f"{path}: not an event graph container (magic {header[:20]!r})")
    digest, _, payload = rest.partition(b"\n")
    if hashlib.sha256(payload).hexdigest().encode("ascii") != digest:
        raise GraphFormatError(f"{path}: checksum mismatch (truncated or corrupted)")
    document = json.loads(payload)
    if document.get("format_version") != FORMAT_VERSION:
        raise GraphFormatError(
            f"{path}: unsupported format version {document.get('format_version')!r}"
        )
    return EventGraph(
        nodes={lemma: freq for lemma, freq in document["nodes"]},
        edges={
            (head, relation, dep): EdgeWeights(count, pmi, lmi)
            for head, relation, dep, count, pmi, lmi in document["edges"]
        },
        events={
            (verb, tuple((r, l) for r, l in participants)): count
            for verb, participants, count in document["events"]
        },
        thresholds=tuple(document["thresholds"]),
    )


def export_tsv(graph: EventGraph, directory) -> None:
    """Debug dump: node, edge, and event tables."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "nodes.tsv"), "w", encoding="utf-8") as handle:
        handle.write("lemma\tfreq\n")
        for lemma, freq in sorted(graph.nodes.items()):
            handle.write(f"{lemma}\t{freq}\n")
    with open(os.path.join(directory, "edges.tsv"), "w", encoding="utf-8") as handle:
        handle.write("head\trelation\tdependent\tcount\tpmi\tlmi\n")
        for (head, relation, dep), w in sorted(graph.edges.items()):
            handle.write(f"{head}\t{relation}\t{dep}\t{w.count}\t{w.pmi:.6f}\t{w.lmi:.6f}\n")
    with open(os.path.join(directory, "events.tsv"), "w", encoding="utf-8") as handle:
        handle.write("verb\tparticipants\tcount\n")
        for (verb, participants), count in sorted(graph.events.items()):
            joined = " ".join(f"{relation}={lemma}" for relation, lemma in participants)
            handle.write(f"{verb}\t{joined}\t{count}\n")
