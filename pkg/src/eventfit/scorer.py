"""Two-tier typicality scoring of candidate role fillers.

For a tuple with one open slot, the context vector (`lc`) is the sum of the
embeddings of the verb and the realized non-target arguments. The
expectation prototype (`ac`) is built from the event graph: every context
cue retrieves up to k fillers of the target relation (joint events first,
then the verb's direct associates), each cue's retrieved fillers are
averaged into a role vector, and the prototype is the centroid of those
role vectors. A filler f scores (cos(f, lc) + cos(f, ac)) / 2; when no cue
yields a usable associate the prototype is absent and the score falls back
to cos(f, lc) alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .datasets import OBLIQUE_ROLES, ItemPair, EventTuple, Role, ScoreRecord
from .embeddings import EmbeddingStore, centroid, cosine, sum_vectors
from .errors import UncoveredItemError, ZeroVectorError
from .graph import (DEFAULT_ROLE_RELATIONS, EventGraph, RoleRelationMap,
                    VERB_CUE, query_event_fillers)

logger = logging.getLogger(__name__)

DEFAULT_ASSOCIATES_PER_CUE = 20

SCORER_NAME = "sdm"


@dataclass(frozen=True)
class SemanticRepresentation:
    """Context vector, optional expectation prototype, and the cue trace
    explaining which associates built the prototype."""

    lc: np.ndarray
    ac: Optional[np.ndarray]
    cue_trace: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if (self.ac is not None) != bool(self.cue_trace):
            raise ValueError("cue_trace must be nonempty exactly when ac is present")
        if self.ac is not None and self.ac.shape != self.lc.shape:
            raise ValueError("lc/ac dimension mismatch")


def _context_cues(item: EventTuple, role_map: RoleRelationMap) -> list[tuple[str, str]]:
    """(relation label, lemma) cues for the realized non-target slots."""
    cues = []
    for role, lemma in item.context_slots():
        if role == Role.VERB:
            cues.append((VERB_CUE, lemma))
        else:
            cues.append((role_map.primary(role, _prep_for(item, role)), lemma))
    return cues


def _prep_for(item: EventTuple, role: Role) -> Optional[str]:
    if role in OBLIQUE_ROLES:
        return item.preposition_override
    return None


def build_lc(item: EventTuple, embeddings: EmbeddingStore) -> np.ndarray:
    """Sum of the context lexical embeddings (target slot excluded).

    Raises UncoveredItemError naming the first out-of-vocabulary lemma.
    """
    vectors = [embeddings.vector(lemma) for _, lemma in item.context_slots()]
    return sum_vectors(vectors)


def build_ac(item: EventTuple, graph: EventGraph, embeddings: EmbeddingStore,
             k: int = DEFAULT_ASSOCIATES_PER_CUE,
             role_map: RoleRelationMap = DEFAULT_ROLE_RELATIONS,
             normalize_role_vectors: bool = False,
             ) -> tuple[Optional[np.ndarray], tuple[tuple[str, tuple[str, ...]], ...]]:
    """Expectation prototype for the target slot, with its cue trace.

    Returns (None, ()) when no cue retrieves any embeddable associate; that
    absence triggers the scoring fallback. `normalize_role_vectors` rescales
    each cue's role vector to unit length before the final centroid (off by
    default; with raw vectors, cues with longer associate vectors weigh more).
    """
    target_labels = role_map.resolve(item.target_role, _prep_for(item, item.target_role))
    role_vectors = []
    trace = []
    for cue in _context_cues(item, role_map):
        merged: dict[str, float] = {}
        fallback_only = True
        for label in target_labels:
            result = query_event_fillers(graph, [cue], label, k)
            if not result.used_fallback:
                fallback_only = False
            for lemma, weight in result.fillers:
                merged[lemma] = merged.get(lemma, 0.0) + weight
        ranked = sorted(merged.items(), key=lambda item_: (-item_[1], item_[0]))[:k]
        used = [lemma for lemma, _ in ranked if lemma in embeddings]
        if not used:
            continue
        role_vector = centroid([embeddings.vector(lemma) for lemma in used])
        if normalize_role_vectors:
            norm = float(np.linalg.norm(role_vector))
            if norm == 0.0:
                continue
            role_vector = role_vector / norm
        role_vectors.append(role_vector)
        trace.append((cue[1], tuple(used)))
        if fallback_only:
            logger.debug("cue %s used the verb-associate fallback", cue)
    if not role_vectors:
        return None, ()
    return centroid(role_vectors), tuple(trace)


def build_representation(item: EventTuple, graph: EventGraph, embeddings: EmbeddingStore,
                         k: int = DEFAULT_ASSOCIATES_PER_CUE,
                         role_map: RoleRelationMap = DEFAULT_ROLE_RELATIONS,
                         normalize_role_vectors: bool = False) -> SemanticRepresentation:
    lc = build_lc(item, embeddings)
    ac, trace = build_ac(item, graph, embeddings, k, role_map, normalize_role_vectors)
    return SemanticRepresentation(lc=lc, ac=ac, cue_trace=trace)


def score_filler(filler: str, item: EventTuple, graph: EventGraph,
                 embeddings: EmbeddingStore, k: int = DEFAULT_ASSOCIATES_PER_CUE,
                 role_map: RoleRelationMap = DEFAULT_ROLE_RELATIONS,
                 representation: Optional[SemanticRepresentation] = None,
                 ) -> tuple[float, bool]:
    """(typicality score in [-1, 1], used_fallback).

    The score averages cos(f, lc) and cos(f, ac); with no prototype it is
    exactly cos(f, lc) and used_fallback is True.
    """
    f = embeddings.vector(filler)
    rep = representation or build_representation(item, graph, embeddings, k, role_map)
    lc_sim = cosine(f, rep.lc)
    if rep.ac is None:
        return lc_sim, True
    return (lc_sim + cosine(f, rep.ac)) / 2.0, False


@dataclass(frozen=True)
class DatasetScores:
    records: tuple[ScoreRecord, ...]
    #: (pair_id, reason) for pairs that could not be scored.
    uncovered: tuple[tuple[str, str], ...]


def score_dataset(pairs: Sequence[ItemPair], graph: EventGraph, embeddings: EmbeddingStore,
                  k: int = DEFAULT_ASSOCIATES_PER_CUE,
                  role_map: RoleRelationMap = DEFAULT_ROLE_RELATIONS,
                  scorer: str = SCORER_NAME) -> DatasetScores:
    """Score every pair's typical and atypical filler.

    A pair with any out-of-vocabulary lemma (context or filler) or an
    undefined cosine is excluded from the records and reported as uncovered.
    """
    records: list[ScoreRecord] = []
    uncovered: list[tuple[str, str]] = []
    for pair in pairs:
        try:
            rep = build_representation(pair.base, graph, embeddings, k, role_map)
            scored = []
            for variant in ("typical", "atypical"):
                value, _ = score_filler(
                    pair.filler(variant).lemma, pair.base, graph, embeddings,
                    k, role_map, representation=rep,
                )
                scored.append(ScoreRecord(pair.pair_id, variant, scorer, value))
            records.extend(scored)
        except UncoveredItemError as exc:
            uncovered.append((pair.pair_id, f"{exc.lemma}: {exc.reason}"))
        except ZeroVectorError:
            uncovered.append((pair.pair_id, "zero context vector, score undefined"))
    return DatasetScores(tuple(records), tuple(uncovered))


def export_cue_traces(pairs: Sequence[ItemPair], graph: EventGraph, embeddings: EmbeddingStore,
                      path, k: int = DEFAULT_ASSOCIATES_PER_CUE,
                      role_map: RoleRelationMap = DEFAULT_ROLE_RELATIONS) -> None:
    """Explainability TSV: item_id, cue lemma, associates used for its prototype."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("item_id\tcue\tassociates\n")
        for pair in pairs:
            try:
                rep = build_representation(pair.base, graph, embeddings, k, role_map)
            except (UncoveredItemError, ZeroVectorError):
                continue
            for cue_lemma, associates in rep.cue_trace:
                handle.write(f"{pair.pair_id}\t{cue_lemma}\t{' '.join(associates)}\n")
