"""Acceptance gate: one test per release criterion.

Each test prints a '[acceptance] PASS/FAIL <criterion>' line (visible with
pytest -s) and enforces its runtime budget. Expected values come from
independent oracles computed here, never from the code under test.
"""

import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from eventfit import kernels
from eventfit.datasets import (EventTuple, Filler, ItemPair, Role,
                               SLOT_PLACEHOLDER, load_dtfit)
from eventfit.graph import (IngestConfig, compute_association, ingest_conllu,
                            load_graph, merge_counts, prune, save_graph,
                            top_associates)
from eventfit.scorer import build_lc, score_dataset, score_filler
from eventfit.stats import (binary_accuracy, evaluate, EvalOptions, fisher_r_to_z,
                            minmax_scale, residual_sum, spearman)
from eventfit.stimuli import (SwapCandidate, adversarial_fillers,
                              content_roundtrip_ok, realize, realize_cleft,
                              realize_declarative, realize_wh,
                              validate_synonym_swap)

from conftest import graph_from_counts, store_from
from gen import E2EFixture, determinism_corpus


@contextmanager
def criterion(name: str, limit_s: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\n[acceptance] FAIL {name}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < limit_s, f"{name}: runtime {elapsed:.2f}s exceeds {limit_s:.0f}s budget"
    print(f"\n[acceptance] PASS {name} ({elapsed:.2f}s < {limit_s:.0f}s)")


def test_lmi_pmi_oracle_equivalence():
    with criterion("LMI/PMI oracle equivalence", 1.0):
        # hand-counted fixture: 10 edge occurrences in one relation
        edge_freq = {
            ("eat", "obj", "pizza"): 4,   # head marginal 5, dep marginal 4
            ("eat", "obj", "soup"): 1,
            ("cook", "obj", "meal"): 5,
        }
        graph = graph_from_counts(edge_freq)
        w = graph.edges[("eat", "obj", "pizza")]
        # brute force: log2((4/10) / ((5/10) * (4/10))) = 1, LMI = 4 * 1
        assert w.pmi == pytest.approx(1.0, abs=1e-12)
        assert w.lmi == pytest.approx(4.0, abs=1e-12)

        rand = random.Random(2024)
        heads = [f"h{i}" for i in range(5)]
        deps = [f"d{i}" for i in range(5)]
        rels = ["r0", "r1"]
        for _ in range(1000):
            table = {}
            for _ in range(rand.randint(1, 8)):
                key = (rand.choice(heads), rand.choice(rels), rand.choice(deps))
                table[key] = table.get(key, 0) + rand.randint(1, 40)
            graph = graph_from_counts(table)
            # independent oracle: explicit relative-frequency probabilities
            totals, hm, dm = {}, {}, {}
            for (h, r, d), c in table.items():
                totals[r] = totals.get(r, 0) + c
                hm[(r, h)] = hm.get((r, h), 0) + c
                dm[(r, d)] = dm.get((r, d), 0) + c
            for (h, r, d), c in table.items():
                t = totals[r]
                pmi = math.log2((c / t) / ((hm[(r, h)] / t) * (dm[(r, d)] / t)))
                assert graph.edges[(h, r, d)].pmi == pytest.approx(pmi, abs=1e-9)
                assert graph.edges[(h, r, d)].lmi == pytest.approx(c * pmi, abs=1e-9)


def test_spearman_oracle_equivalence():
    with criterion("Spearman oracle equivalence", 5.0):
        def oracle_rho(xs, ys):
            # brute force: pairwise-comparison average ranks + raw Pearson
            def ranks(v):
                v = np.asarray(v, float)
                smaller = (v[None, :] < v[:, None]).sum(axis=1)
                equal = (v[None, :] == v[:, None]).sum(axis=1)
                return smaller + (equal + 1) / 2.0

            rx, ry = ranks(xs), ranks(ys)
            dx, dy = rx - rx.mean(), ry - ry.mean()
            return float((dx * dy).sum() / math.sqrt((dx * dx).sum() * (dy * dy).sum()))

        rng = np.random.default_rng(99)
        checked = 0
        while checked < 500:
            n = int(rng.integers(3, 201))
            xs = rng.integers(0, max(2, n // 3), n).astype(float)  # plenty of ties
            ys = xs * rng.uniform(-2, 2) + rng.integers(0, 5, n)
            if len(set(xs)) < 2 or len(set(ys.tolist())) < 2:
                continue
            assert spearman(xs, ys) == pytest.approx(oracle_rho(xs, ys), abs=1e-9)
            checked += 1

        xs = rng.uniform(0, 10, 50)
        ys = rng.uniform(0, 10, 50)
        base = spearman(xs, ys)
        for _ in range(100):
            a = float(rng.uniform(0.1, 5))
            b = float(rng.uniform(-3, 3))
            c = float(rng.uniform(0.1, 2))
            transformed = [a * x + b + c * x**3 for x in xs]  # strictly increasing
            assert spearman(transformed, ys) == pytest.approx(base, abs=1e-12)


def test_scoring_function_correctness():
    with criterion("scoring function (two-tier average) correctness", 1.0):
        base = EventTuple(
            "t", ((Role.AGENT, "tailor"), (Role.VERB, "sew"),
                  (Role.PATIENT, SLOT_PLACEHOLDER)), Role.PATIENT,
        )
        graph = graph_from_counts(
            {("sew", "obj", "dress"): 5, ("sew", "nsubj", "tailor"): 5,
             ("knit", "obj", "scarf"): 5},
            events={("sew", (("nsubj", "tailor"), ("obj", "dress"))): 5},
        )
        store = store_from({"sew": [1.0, 0.0], "tailor": [0.0, 1.0],
                            "dress": [1.0, 0.0], "f": [1.0, 1.0]})
        # lc=(1,1), prototype=(1,0): (cos0 + cos45)/2 hand-computed
        expected = (1.0 + 1.0 / math.sqrt(2.0)) / 2.0
        score, fallback = score_filler("f", base, graph, store, k=2)
        assert score == pytest.approx(0.853553390, abs=1e-9)
        assert score == pytest.approx(expected, abs=1e-12) and not fallback

        from eventfit.graph import EventGraph
        empty = EventGraph(nodes={}, edges={}, events={})
        from eventfit.embeddings import cosine
        score, fallback = score_filler("f", base, empty, store, k=2)
        assert fallback
        assert score == cosine(store.vector("f"), build_lc(base, store))

        rng = np.random.default_rng(3)
        vectors = {name: rng.standard_normal(8)
                   for name in ("sew", "tailor", "dress", "f")}
        reference, _ = score_filler("f", base, graph, store_from(vectors), k=2)
        for _ in range(100):
            alpha = float(rng.uniform(1e-3, 1e3))
            scaled = store_from({k_: alpha * v for k_, v in vectors.items()})
            rescored, _ = score_filler("f", base, graph, scaled, k=2)
            assert rescored == pytest.approx(reference, abs=1e-9)


def test_graph_pipeline_determinism(tmp_path):
    with criterion("graph pipeline determinism", 10.0):
        text = determinism_corpus(500, seed=11)
        blocks = [b for b in text.split("\n\n") if b.strip()]
        saved = []
        for n_shards in (1, 2, 4):
            bounds = [round(i * len(blocks) / n_shards) for i in range(n_shards + 1)]
            shards = []
            for lo, hi in zip(bounds, bounds[1:]):
                shard_text = "\n\n".join(blocks[lo:hi]) + "\n\n"
                shards.append(ingest_conllu(shard_text.splitlines(keepends=True)))
            counts = merge_counts(shards)
            graph = prune(compute_association(counts), 1, 1)
            path = tmp_path / f"shards_{n_shards}.deg"
            save_graph(graph, path)
            saved.append(path.read_bytes())
        assert saved[0] == saved[1] == saved[2]

        graph = prune(compute_association(merge_counts(
            [ingest_conllu(text.splitlines(keepends=True))])), 1, 1)
        identity = prune(graph, 1, 1)
        assert identity.nodes == graph.nodes and identity.edges == graph.edges \
            and identity.events == graph.events

        defaults = prune(graph)
        assert defaults.thresholds == (300, 30)
        reloaded = load_graph(tmp_path / "shards_1.deg")
        assert reloaded.thresholds == (1, 1)


def test_end_to_end_mini_dataset(tmp_path):
    with criterion("end-to-end mini dataset run", 10.0):
        fixture = E2EFixture()
        # brute-force check that each intended typical filler wins the
        # two-tier score, computed from first principles in the fixture
        assert all(margin > 0.02 for margin in fixture.margins())

        paths = fixture.write(tmp_path)
        pairs = load_dtfit(paths["dataset"], Role.PATIENT)
        counts = ingest_conllu(paths["corpus"])
        graph = prune(compute_association(counts), 1, 1)
        from eventfit.embeddings import load_vectors
        store = load_vectors(paths["vectors"])
        result = score_dataset(pairs, graph, store, k=fixture.K)
        assert len(result.records) == 20 and not result.uncovered

        report = evaluate(pairs, list(result.records), EvalOptions(dataset="mini"))
        assert report.accuracy == 1.0
        assert report.spearman_rho is not None and report.spearman_rho >= 0.8


def test_stimulus_realization_verbatim():
    with criterion("stimulus realization", 1.0):
        tailor = EventTuple("s1", ((Role.AGENT, "tailor"), (Role.VERB, "sew"),
                                   (Role.PATIENT, SLOT_PLACEHOLDER)), Role.PATIENT)
        actor = EventTuple("s2", ((Role.AGENT, "actor"), (Role.VERB, "win"),
                                  (Role.PATIENT, SLOT_PLACEHOLDER)), Role.PATIENT)
        boxer = EventTuple("s3", ((Role.AGENT, "boxer"), (Role.VERB, "deliver"),
                                  (Role.PATIENT, "punch"),
                                  (Role.LOCATION, SLOT_PLACEHOLDER)), Role.LOCATION)
        guard = EventTuple("s4", ((Role.AGENT, "guard"), (Role.VERB, "open"),
                                  (Role.PATIENT, "door"),
                                  (Role.INSTRUMENT, SLOT_PLACEHOLDER)), Role.INSTRUMENT)

        assert realize_declarative(tailor, "dress").render() == "The tailor sewed the dress."
        assert realize_cleft(actor, "award").render() == "It was the award that the actor won."
        assert realize_cleft(boxer, "ring").render() == (
            "It was on the ring that the boxer delivered the punch."
        )
        assert realize_cleft(guard, "key").render_masked("[MASK]") == (
            "It was with the [MASK] that the guard opened the door."
        )
        assert realize_wh(actor, "award").render() == "Which award did the actor win?"
        assert realize_wh(boxer, "ring").render() == (
            "On which ring did the boxer deliver the punch?"
        )

        mixer = EventTuple("s5", ((Role.AGENT, SLOT_PLACEHOLDER), (Role.VERB, "mix"),
                                  (Role.PATIENT, "paint")), Role.AGENT)
        for item in (tailor, actor, boxer, guard, mixer):
            for construction in ("declarative", "cleft", "wh"):
                stim = realize(item, "thing", construction)
                assert content_roundtrip_ok(stim, item, "thing")


def test_diagnostics_rules():
    with criterion("diagnostic generation rules", 1.0):
        freq = {"plant": 500_000, "flora": 12_000}
        cand = SwapCandidate("plant", "flora", 0, 0, "synonym")
        assert validate_synonym_swap(cand, freq).valid
        # rule 1: replacement must be strictly rarer
        assert not validate_synonym_swap(cand, {"plant": 10_000, "flora": 12_000}).valid
        # rule 2 boundary: frequency equal to the cap is rejected (strict <)
        assert not validate_synonym_swap(cand, {"plant": 500_000, "flora": 300_000}).valid
        assert validate_synonym_swap(cand, {"plant": 500_000, "flora": 299_999}).valid

        graph = graph_from_counts({
            ("release", "obj", "album"): 30,
            ("release", "obj", "film"): 18,
            ("release", "obj", "hostage"): 6,
            ("say", "obj", "word"): 60,
        })
        context = EventTuple("d", ((Role.AGENT, "terrorist"), (Role.VERB, "release"),
                                   (Role.PATIENT, SLOT_PLACEHOLDER)), Role.PATIENT)
        candidates = adversarial_fillers("release", "obj", graph, context, k=5,
                                         original="hostage", exclude={"hostage"})
        names = [c.replacement for c in candidates]
        assert "hostage" not in names
        assert names[0] == "album"
        expected_order = [lemma for lemma, _ in
                          top_associates(graph, "release", "obj", "as_head", 10)
                          if lemma != "hostage"]
        assert names == expected_order[:len(names)]
        lmis = [c.lmi for c in candidates]
        assert lmis == sorted(lmis, reverse=True)


def test_statistics_edge_behavior():
    with criterion("statistics edge behavior", 2.0):
        z, p = fisher_r_to_z(0.42, 50, 0.42, 80)
        assert z == 0.0 and p == 0.5
        z1, p1 = fisher_r_to_z(0.7, 40, 0.3, 60)
        z2, p2 = fisher_r_to_z(0.3, 60, 0.7, 40)
        assert z1 == pytest.approx(-z2, abs=1e-12)
        assert p1 + p2 == pytest.approx(1.0, abs=1e-12)

        human = [1.0, 2.0, 3.5, 5.0, 6.5]
        linear = [0.1 + 0.12 * h for h in human]
        assert residual_sum(human, linear) == pytest.approx(0.0, abs=1e-9)

        rng = np.random.default_rng(17)
        for _ in range(1000):
            values = rng.standard_normal(int(rng.integers(2, 60)))
            if np.unique(values).size < 2:
                continue
            scaled = minmax_scale(values)
            assert np.array_equal(np.argsort(values, kind="mergesort"),
                                  np.argsort(scaled, kind="mergesort"))
            assert scaled.min() == 0.0 and scaled.max() == 1.0
