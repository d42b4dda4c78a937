import math

import numpy as np
import pytest

from eventfit.datasets import EventTuple, Filler, ItemPair, Role, SLOT_PLACEHOLDER
from eventfit.embeddings import cosine
from eventfit.errors import UncoveredItemError
from eventfit.graph import EventGraph
from eventfit.scorer import (SemanticRepresentation, build_ac, build_lc,
                             build_representation, score_dataset, score_filler)

from conftest import graph_from_counts, store_from


def patient_tuple(item_id="t1", agent="tailor", verb="sew"):
    return EventTuple(
        item_id,
        ((Role.AGENT, agent), (Role.VERB, verb), (Role.PATIENT, SLOT_PLACEHOLDER)),
        Role.PATIENT,
    )


def empty_graph():
    return EventGraph(nodes={}, edges={}, events={})


class TestBuildLc:
    def test_two_cue_sum(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0]})
        lc = build_lc(patient_tuple(), store)
        assert np.array_equal(lc, np.array([1.0, 1.0]))

    def test_verb_only(self):
        item = EventTuple("t", ((Role.VERB, "sew"), (Role.PATIENT, SLOT_PLACEHOLDER)),
                          Role.PATIENT)
        store = store_from({"sew": [2.0, 3.0]})
        assert np.array_equal(build_lc(item, store), np.array([2.0, 3.0]))

    def test_three_cue_hand_sum(self):
        vectors = {
            "guard": [0.5, -1.0, 2.0, 0.25],
            "open": [1.0, 1.0, 0.0, -0.5],
            "door": [-0.25, 0.5, 1.5, 3.0],
        }
        item = EventTuple(
            "t", ((Role.AGENT, "guard"), (Role.VERB, "open"), (Role.PATIENT, "door"),
                  (Role.INSTRUMENT, SLOT_PLACEHOLDER)),
            Role.INSTRUMENT,
        )
        # componentwise addition oracle
        expected = [
            vectors["guard"][i] + vectors["open"][i] + vectors["door"][i] for i in range(4)
        ]
        assert np.allclose(build_lc(item, store_from(vectors)), expected, atol=1e-12)

    def test_oov_cue_signals_lemma(self):
        store = store_from({"sew": [1.0, 0.0]})
        with pytest.raises(UncoveredItemError) as err:
            build_lc(patient_tuple(), store)
        assert err.value.lemma == "tailor"

    def test_target_slot_excluded(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0], "___": [9.0, 9.0]})
        assert np.array_equal(build_lc(patient_tuple(), store), np.array([1.0, 1.0]))


def single_event_graph():
    """Both the verb cue and the agent cue retrieve only `dress`."""
    return graph_from_counts(
        {("sew", "obj", "dress"): 5, ("sew", "nsubj", "tailor"): 5,
         ("knit", "obj", "scarf"): 5},
        events={("sew", (("nsubj", "tailor"), ("obj", "dress"))): 5},
    )


class TestBuildAc:
    def test_identical_associates(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0], "dress": [1.0, 1.0]})
        ac, trace = build_ac(patient_tuple(), single_event_graph(), store, k=3)
        assert np.allclose(ac, [1.0, 1.0], atol=1e-12)
        assert {cue for cue, _ in trace} == {"sew", "tailor"}
        assert all(assoc == ("dress",) for _, assoc in trace)

    def test_disjoint_associates_centroid_of_centroids(self):
        # verb cue retrieves only x=(1,0); agent cue retrieves only y=(0,1)
        graph = graph_from_counts(
            {("sew", "obj", "x"): 5, ("other", "obj", "y"): 5,
             ("sew", "nsubj", "tailor"): 2},
            events={("other", (("nsubj", "tailor"), ("obj", "y"))): 3},
        )
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0],
                            "x": [1.0, 0.0], "y": [0.0, 1.0]})
        ac, _ = build_ac(patient_tuple(), graph, store, k=3)
        assert np.allclose(ac, [0.5, 0.5], atol=1e-12)

    def test_graph_lacking_cues_gives_absent(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0], "dress": [1.0, 1.0]})
        ac, trace = build_ac(patient_tuple(), empty_graph(), store)
        assert ac is None and trace == ()

    def test_unembeddable_associates_are_skipped(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0]})  # no dress vector
        ac, trace = build_ac(patient_tuple(), single_event_graph(), store)
        assert ac is None and trace == ()

    def test_k_infinite_single_event_closed_form(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0], "dress": [0.25, 0.75]})
        ac, _ = build_ac(patient_tuple(), single_event_graph(), store, k=10**6)
        assert np.allclose(ac, store.vector("dress"), atol=1e-12)

    def test_representation_invariant(self):
        with pytest.raises(ValueError, match="cue_trace"):
            SemanticRepresentation(lc=np.ones(2), ac=np.ones(2), cue_trace=())

    def test_normalize_role_vectors_flag(self):
        # verb cue retrieves x=(3,0) [long], agent cue retrieves y=(0,1) [unit]
        graph = graph_from_counts(
            {("sew", "obj", "x"): 5, ("other", "obj", "y"): 5,
             ("sew", "nsubj", "tailor"): 2},
            events={("other", (("nsubj", "tailor"), ("obj", "y"))): 3},
        )
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0],
                            "x": [3.0, 0.0], "y": [0.0, 1.0]})
        raw, _ = build_ac(patient_tuple(), graph, store, k=3)
        assert np.allclose(raw, [1.5, 0.5], atol=1e-12)
        normalized, _ = build_ac(patient_tuple(), graph, store, k=3,
                                 normalize_role_vectors=True)
        assert np.allclose(normalized, [0.5, 0.5], atol=1e-12)


class TestScoreFiller:
    def test_average_of_two_cosines(self):
        # cos(f, lc)=0.6 and cos(f, ac)=0.4 by construction -> 0.5
        f = np.array([1.0, 0.0])
        lc = np.array([0.6, math.sqrt(1 - 0.36)])
        ac = np.array([0.4, math.sqrt(1 - 0.16)])
        assert cosine(f, lc) == pytest.approx(0.6, abs=1e-12)
        assert cosine(f, ac) == pytest.approx(0.4, abs=1e-12)
        rep = SemanticRepresentation(lc=lc, ac=ac, cue_trace=(("sew", ("dress",)),))
        store = store_from({"filler": f, "sew": [1.0, 0.0], "tailor": [0.0, 1.0]})
        score, fallback = score_filler("filler", patient_tuple(), empty_graph(), store,
                                       representation=rep)
        assert score == pytest.approx(0.5, abs=1e-12)
        assert not fallback

    def test_two_d_fixture_value(self):
        # f=(1,1), lc=(1,1), ac=(1,0): (1 + cos45)/2
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0],
                            "dress": [1.0, 0.0], "f": [1.0, 1.0]})
        graph = single_event_graph()
        score, fallback = score_filler("f", patient_tuple(), graph, store, k=2)
        expected = (1.0 + 1.0 / math.sqrt(2.0)) / 2.0
        assert expected == pytest.approx(0.853553390, abs=1e-9)
        assert score == pytest.approx(expected, abs=1e-12)
        assert not fallback

    def test_fallback_is_exactly_lc_cosine(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0], "f": [0.4, 0.9]})
        score, fallback = score_filler("f", patient_tuple(), empty_graph(), store)
        assert fallback
        assert score == cosine(store.vector("f"), build_lc(patient_tuple(), store))

    def test_oov_filler_uncovered(self):
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0]})
        with pytest.raises(UncoveredItemError) as err:
            score_filler("ghost", patient_tuple(), empty_graph(), store)
        assert err.value.lemma == "ghost"

    def test_score_in_unit_interval(self, rng):
        for trial in range(50):
            vectors = {name: rng.standard_normal(8)
                       for name in ("sew", "tailor", "dress", "f")}
            store = store_from(vectors)
            score, _ = score_filler("f", patient_tuple(), single_event_graph(), store)
            assert -1.0 <= score <= 1.0

    def test_uniform_rescaling_invariance(self, rng):
        base = {name: rng.standard_normal(6)
                for name in ("sew", "tailor", "dress", "f")}
        graph = single_event_graph()
        reference, _ = score_filler("f", patient_tuple(), graph, store_from(base))
        for _ in range(100):
            alpha = float(rng.uniform(1e-3, 1e3))
            scaled = store_from({k: alpha * v for k, v in base.items()})
            score, _ = score_filler("f", patient_tuple(), graph, scaled)
            assert score == pytest.approx(reference, abs=1e-9)

    def test_slot_permutation_invariance(self, rng):
        vectors = {name: rng.standard_normal(6)
                   for name in ("open", "guard", "door", "key")}
        store = store_from(vectors)
        graph = graph_from_counts(
            {("open", "obj", "door"): 3, ("open", "nsubj", "guard"): 3,
             ("open", "obl:with", "key"): 3},
            events={("open", (("nsubj", "guard"), ("obj", "door"), ("obl:with", "key"))): 3},
        )
        slots = [(Role.AGENT, "guard"), (Role.VERB, "open"), (Role.PATIENT, "door"),
                 (Role.INSTRUMENT, SLOT_PLACEHOLDER)]
        scores = set()
        for order in ([0, 1, 2, 3], [3, 2, 1, 0], [1, 3, 0, 2]):
            item = EventTuple("t", tuple(slots[i] for i in order), Role.INSTRUMENT)
            rep = build_representation(item, graph, store, k=5)
            score, _ = score_filler("key", item, graph, store, k=5, representation=rep)
            scores.add(round(score, 12))
        assert len(scores) == 1


class TestScoreDataset:
    def make_pairs(self, n=10):
        pairs = []
        for i in range(n):
            base = patient_tuple(item_id=f"p{i}")
            pairs.append(ItemPair(f"p{i}", Filler("dress", 6.0), Filler("stone", 1.5), base))
        return pairs

    def test_all_covered_two_records_each(self):
        store = store_from({"sew": [1.0, 0.2], "tailor": [0.1, 1.0],
                            "dress": [1.0, 1.0], "stone": [-1.0, 0.3]})
        result = score_dataset(self.make_pairs(), single_event_graph(), store)
        assert len(result.records) == 20
        assert not result.uncovered
        assert {r.scorer for r in result.records} == {"sdm"}
        assert {r.variant for r in result.records} == {"typical", "atypical"}

    def test_oov_filler_moves_pair_to_uncovered(self):
        store = store_from({"sew": [1.0, 0.2], "tailor": [0.1, 1.0], "dress": [1.0, 1.0]})
        pairs = self.make_pairs(3)
        result = score_dataset(pairs, single_event_graph(), store)
        assert result.records == ()
        assert [pair_id for pair_id, _ in result.uncovered] == ["p0", "p1", "p2"]
        assert all("stone" in reason for _, reason in result.uncovered)

    def test_deterministic_order(self):
        store = store_from({"sew": [1.0, 0.2], "tailor": [0.1, 1.0],
                            "dress": [1.0, 1.0], "stone": [-1.0, 0.3]})
        a = score_dataset(self.make_pairs(), single_event_graph(), store)
        b = score_dataset(self.make_pairs(), single_event_graph(), store)
        assert a == b
