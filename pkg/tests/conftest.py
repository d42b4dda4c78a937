import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eventfit.embeddings import EmbeddingStore
from eventfit.graph import EventGraph, RelationCounts, compute_association


def store_from(vectors: dict) -> EmbeddingStore:
    dimension = len(next(iter(vectors.values())))
    return EmbeddingStore(dimension, {k: np.asarray(v, dtype=float) for k, v in vectors.items()})


def graph_from_counts(edge_freq: dict, events: dict | None = None,
                      node_freq: dict | None = None) -> EventGraph:
    """Build a weighted graph from explicit edge counts (and optional events).

    Node frequencies default to each lemma's summed edge involvement so the
    graph is self-consistent without a corpus.
    """
    if node_freq is None:
        node_freq = {}
        for (head, _, dep), count in edge_freq.items():
            node_freq[head] = node_freq.get(head, 0) + count
            node_freq[dep] = node_freq.get(dep, 0) + count
    totals: dict[str, int] = {}
    for (_, relation, _), count in edge_freq.items():
        totals[relation] = totals.get(relation, 0) + count
    counts = RelationCounts(
        node_freq=dict(node_freq),
        edge_freq=dict(edge_freq),
        event_freq=dict(events or {}),
        relation_totals=totals,
    )
    return compute_association(counts)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
