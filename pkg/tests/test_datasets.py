import random

import pytest

from eventfit.datasets import (
    EventTuple, Filler, ItemPair, PlausibilityTriple, Role, ScoreRecord,
    SLOT_PLACEHOLDER, TripleRow, derive_role_pairs, intersect_coverage,
    load_dtfit, mine_minimal_pairs, read_score_records, write_dtfit,
    write_score_records,
)
from eventfit.errors import DatasetFormatError


def dtfit_line(item_id="i1", role="patient", agent="mason", verb="mix", patient="___",
               instrument="", time="", location="", typ="cement", typ_r="6.65",
               atyp="soup", atyp_r="1.95", prep="", past=""):
    return "\t".join([item_id, role, agent, verb, patient, instrument, time, location,
                      typ, typ_r, atyp, atyp_r, prep, past])


def write_lines(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadDtfit:
    def test_table_row(self, tmp_path):
        # mason mix ___ -> cement (H=6.65) vs soup (H=1.95)
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line())
        pairs = load_dtfit(path, Role.PATIENT)
        assert len(pairs) == 1
        pair = pairs[0]
        assert pair.typical == Filler("cement", 6.65)
        assert pair.atypical == Filler("soup", 1.95)
        assert pair.base.verb == "mix"
        assert pair.base.slot(Role.PATIENT) == SLOT_PLACEHOLDER
        assert pair.base.target_role == Role.PATIENT

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("", encoding="utf-8")
        assert load_dtfit(path, Role.PATIENT) == []

    def test_rating_out_of_range_names_line(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line(), dtfit_line(item_id="i2", typ_r="8.0"))
        with pytest.raises(DatasetFormatError) as err:
            load_dtfit(path, Role.PATIENT)
        assert err.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dtfit(tmp_path / "nope.tsv", Role.PATIENT)

    def test_duplicate_item_id(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line(), dtfit_line())
        with pytest.raises(DatasetFormatError, match="duplicate"):
            load_dtfit(path, Role.PATIENT)

    def test_missing_target_slot(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line(patient="dress"))
        with pytest.raises(DatasetFormatError, match="placeholder"):
            load_dtfit(path, Role.PATIENT)

    def test_role_mismatch(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line())
        with pytest.raises(DatasetFormatError, match="targets"):
            load_dtfit(path, Role.AGENT)

    def test_oblique_with_preposition_and_past(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line(item_id="i9", role="location", agent="boxer",
                                     verb="deliver", patient="punch", location="___",
                                     typ="ring", typ_r="6.5", atyp="desert", atyp_r="1.5",
                                     prep="on", past="delivered"))
        pair = load_dtfit(path, Role.LOCATION)[0]
        assert pair.base.preposition_override == "on"
        assert pair.base.verb_past == "delivered"

    def test_roundtrip_identity(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(
            path,
            dtfit_line(),
            dtfit_line(item_id="i2", role="patient", agent="tailor", verb="sew",
                       typ="dress", typ_r="6.8", atyp="wound", atyp_r="1.8", past="sewed"),
        )
        pairs = load_dtfit(path, Role.PATIENT)
        out = tmp_path / "written.tsv"
        write_dtfit(pairs, out)
        assert load_dtfit(out, Role.PATIENT) == pairs

    def test_ratings_optional_for_classification_sets(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write_lines(path, dtfit_line(typ_r="", atyp_r=""))
        pair = load_dtfit(path, Role.PATIENT)[0]
        assert pair.typical.human_rating is None
        assert not pair.has_ratings


class TestEventTupleInvariants:
    def test_duplicate_roles_rejected(self):
        with pytest.raises(ValueError, match="duplicate roles"):
            EventTuple("x", ((Role.VERB, "mix"), (Role.AGENT, "a"), (Role.AGENT, "b")),
                       Role.AGENT)

    def test_verb_required(self):
        with pytest.raises(ValueError, match="verb"):
            EventTuple("x", ((Role.AGENT, "___"), (Role.PATIENT, "paint")), Role.AGENT)

    def test_target_slot_required(self):
        with pytest.raises(ValueError, match="target"):
            EventTuple("x", ((Role.VERB, "mix"), (Role.PATIENT, "paint")), Role.AGENT)

    def test_whitespace_lemma_rejected(self):
        with pytest.raises(ValueError, match="whitespace"):
            EventTuple("x", ((Role.VERB, "mix"), (Role.AGENT, "two words"),
                             (Role.PATIENT, "___")), Role.PATIENT)

    def test_identical_fillers_rejected(self):
        base = EventTuple("x", ((Role.VERB, "mix"), (Role.PATIENT, "___")), Role.PATIENT)
        with pytest.raises(ValueError, match="identical"):
            ItemPair("x", Filler("paint", 6.0), Filler("paint", 1.0), base)


def differing_slots(pair: ItemPair) -> list[Role]:
    """Slot-wise comparison of the two variants of a pair."""
    typ = dict(pair.base.slots)
    typ[pair.base.target_role] = pair.typical.lemma
    atyp = dict(pair.base.slots)
    atyp[pair.base.target_role] = pair.atypical.lemma
    return [role for role in typ if typ[role] != atyp.get(role)]


class TestDeriveRolePairs:
    def test_agent_pair(self):
        rows = [
            TripleRow("g1", "painter", "mix", "paint", "typical", 6.9),
            TripleRow("g1", "cook", "mix", "paint", "atypical", 2.3),
        ]
        result = derive_role_pairs(rows)
        assert len(result.agent_pairs) == 1 and not result.patient_pairs
        pair = result.agent_pairs[0]
        assert pair.typical == Filler("painter", 6.9)
        assert pair.atypical == Filler("cook", 2.3)
        assert pair.base.target_role == Role.AGENT
        assert differing_slots(pair) == [Role.AGENT]

    def test_patient_pair(self):
        rows = [
            TripleRow("g2", "tailor", "sew", "dress", "typical", 6.8),
            TripleRow("g2", "tailor", "sew", "wound", "atypical", 1.8),
        ]
        result = derive_role_pairs(rows)
        assert len(result.patient_pairs) == 1 and not result.agent_pairs
        assert differing_slots(result.patient_pairs[0]) == [Role.PATIENT]

    def test_two_slots_differ_skipped(self):
        rows = [
            TripleRow("g3", "a", "v", "p", "typical", 6.0),
            TripleRow("g3", "b", "v", "q", "atypical", 2.0),
        ]
        result = derive_role_pairs(rows)
        assert not result.agent_pairs and not result.patient_pairs
        assert result.skipped == (("g3", "rows differ in agent+patient"),)

    def test_verb_only_difference_skipped(self):
        rows = [
            TripleRow("g4", "a", "v", "p", "typical", 6.0),
            TripleRow("g4", "a", "w", "p", "atypical", 2.0),
        ]
        result = derive_role_pairs(rows)
        assert result.skipped[0][0] == "g4"

    def test_wrong_group_size(self):
        with pytest.raises(ValueError, match="expected 2 rows"):
            derive_role_pairs([TripleRow("g5", "a", "v", "p", "typical", 6.0)])

    def test_identical_rows(self):
        rows = [
            TripleRow("g6", "a", "v", "p", "typical", 6.0),
            TripleRow("g6", "a", "v", "p", "atypical", 2.0),
        ]
        with pytest.raises(ValueError, match="identical"):
            derive_role_pairs(rows)


class TestMineMinimalPairs:
    def test_patient_example(self):
        plausible = [PlausibilityTriple("student", "climb", "ship", "plausible")]
        implausible = [PlausibilityTriple("student", "climb", "water", "implausible")]
        pairs = mine_minimal_pairs(plausible, implausible, Role.PATIENT)
        assert len(pairs) == 1
        assert pairs[0].typical.lemma == "ship"
        assert pairs[0].atypical.lemma == "water"
        assert pairs[0].typical.human_rating is None
        assert differing_slots(pairs[0]) == [Role.PATIENT]

    def test_disjoint_verbs_empty(self):
        plausible = [PlausibilityTriple("a", "v1", "p", "plausible")]
        implausible = [PlausibilityTriple("a", "v2", "q", "implausible")]
        assert mine_minimal_pairs(plausible, implausible, Role.PATIENT) == []

    def test_four_by_four_matches_brute_force(self):
        plausible = [
            PlausibilityTriple("ant", "build", "wall", "plausible"),
            PlausibilityTriple("chair", "absorb", "water", "plausible"),
            PlausibilityTriple("cat", "chase", "bird", "plausible"),
            PlausibilityTriple("dog", "eat", "bone", "plausible"),
        ]
        implausible = [
            PlausibilityTriple("ant", "build", "cloud", "implausible"),
            PlausibilityTriple("chair", "absorb", "wall", "implausible"),
            PlausibilityTriple("cat", "climb", "bird", "implausible"),
            PlausibilityTriple("fish", "eat", "bone", "implausible"),
        ]
        # independent oracle: exhaustive cross-product over all 16 combinations
        expected = set()
        for p in plausible:
            for i in implausible:
                if p.agent == i.agent and p.verb == i.verb and p.patient != i.patient:
                    expected.add((p.agent, p.verb, p.patient, i.patient))
        assert len(expected) == 2

        pairs = mine_minimal_pairs(plausible, implausible, Role.PATIENT)
        got = {
            (pair.base.slot(Role.AGENT), pair.base.verb,
             pair.typical.lemma, pair.atypical.lemma)
            for pair in pairs
        }
        assert got == expected

    def test_agent_role(self):
        plausible = [PlausibilityTriple("cop", "arrest", "thief", "plausible")]
        implausible = [PlausibilityTriple("cloud", "arrest", "thief", "implausible")]
        pairs = mine_minimal_pairs(plausible, implausible, Role.AGENT)
        assert len(pairs) == 1
        assert differing_slots(pairs[0]) == [Role.AGENT]

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            mine_minimal_pairs([], [PlausibilityTriple("a", "v", "p", "implausible")],
                               Role.PATIENT)


class TestIntersectCoverage:
    def test_pairwise(self):
        assert intersect_coverage([("a", {"1", "2", "3"}), ("b", {"2", "3", "4"})]) == {"2", "3"}

    def test_single_identity(self):
        assert intersect_coverage([("a", {"1", "2"})]) == {"1", "2"}

    def test_empty_intersection_is_returned(self):
        assert intersect_coverage([("a", {"1"}), ("b", {"2"})]) == set()

    def test_commutative_idempotent(self):
        rand = random.Random(99)
        for _ in range(50):
            sets = [
                (f"s{i}", {str(rand.randrange(12)) for _ in range(rand.randrange(1, 10))})
                for i in range(rand.randrange(1, 5))
            ]
            base = intersect_coverage(sets)
            rand.shuffle(sets)
            assert intersect_coverage(sets) == base
            assert intersect_coverage(sets + sets) == base


class TestScoreRecords:
    def test_jsonl_roundtrip(self, tmp_path):
        records = [
            ScoreRecord("i1", "typical", "sdm", 0.5),
            ScoreRecord("i1", "atypical", "sdm", -0.25),
            ScoreRecord("i1", "typical", "other", -2.89, meta={"model": "x"}),
        ]
        path = tmp_path / "scores.jsonl"
        write_score_records(records, path)
        assert read_score_records(path) == records

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            ScoreRecord("i1", "typical", "sdm", float("nan"))

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "scores.jsonl"
        write_score_records(
            [ScoreRecord("i1", "typical", "sdm", 0.5)], path)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write('{"item_id": "i1", "variant": "typical", "scorer": "sdm", "score": 1.0}\n')
        with pytest.raises(DatasetFormatError, match="duplicate"):
            read_score_records(path)

    def test_bad_variant_rejected(self):
        with pytest.raises(ValueError, match="variant"):
            ScoreRecord("i1", "weird", "sdm", 0.5)
