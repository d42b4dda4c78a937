"""Evaluation datasets: role-labeled event tuples, typical/atypical pairs,
plausibility triples, and the score-record interchange format.

File formats
------------
Pair TSV (UTF-8, no header, one pair per line), columns:

    item_id  role  agent  verb  patient  instrument  time  location
    typical_filler  typical_rating  atypical_filler  atypical_rating
    [preposition]  [verb_past]

Absent slots are empty strings; the target slot holds the placeholder
``___``. Ratings may be empty for classification-only sets. Score records
travel as JSON Lines with keys item_id, variant, scorer, score.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import DatasetFormatError

SLOT_PLACEHOLDER = "___"


class Role(str, Enum):
    AGENT = "agent"
    VERB = "verb"
    PATIENT = "patient"
    INSTRUMENT = "instrument"
    TIME = "time"
    LOCATION = "location"


#: Realization order for arguments around the verb.
CANONICAL_SLOT_ORDER = (
    Role.AGENT,
    Role.VERB,
    Role.PATIENT,
    Role.INSTRUMENT,
    Role.LOCATION,
    Role.TIME,
)

OBLIQUE_ROLES = frozenset({Role.INSTRUMENT, Role.LOCATION, Role.TIME})

#: Default surface preposition per oblique role, overridable per item.
ROLE_DEFAULT_PREPOSITION = {
    Role.INSTRUMENT: "with",
    Role.LOCATION: "on",
    Role.TIME: "during",
}

_RATING_MIN, _RATING_MAX = 1.0, 7.0


def _check_lemma(lemma: str, what: str) -> str:
    if not lemma or lemma != lemma.strip() or any(c.isspace() for c in lemma):
        raise ValueError(f"{what} must be a nonempty whitespace-free lemma, got {lemma!r}")
    return lemma


@dataclass(frozen=True)
class EventTuple:
    """A role-labeled lemma tuple with one target slot.

    The target slot is present in ``slots`` with the ``___`` placeholder as
    its lemma; candidate fillers are supplied externally (see ItemPair).
    """

    item_id: str
    slots: tuple[tuple[Role, str], ...]
    target_role: Role
    preposition_override: Optional[str] = None
    verb_past: Optional[str] = None

    def __post_init__(self):
        roles = [r for r, _ in self.slots]
        if len(set(roles)) != len(roles):
            raise ValueError(f"{self.item_id}: duplicate roles in tuple")
        if Role.VERB not in roles:
            raise ValueError(f"{self.item_id}: verb slot missing")
        if sum(1 for r in roles if r == self.target_role) != 1:
            raise ValueError(f"{self.item_id}: exactly one slot must carry the target role")
        for role, lemma in self.slots:
            _check_lemma(lemma, f"{self.item_id}: {role.value} slot")

    @property
    def verb(self) -> str:
        return self.slot(Role.VERB)

    def slot(self, role: Role) -> str:
        for r, lemma in self.slots:
            if r == role:
                return lemma
        raise KeyError(role)

    def has_role(self, role: Role) -> bool:
        return any(r == role for r, _ in self.slots)

    def context_slots(self) -> tuple[tuple[Role, str], ...]:
        """All slots except the target one (the scoring context)."""
        return tuple((r, l) for r, l in self.slots if r != self.target_role)

    def preposition_for(self, role: Role) -> str:
        if role not in OBLIQUE_ROLES:
            raise ValueError(f"{role.value} takes no preposition")
        return self.preposition_override or ROLE_DEFAULT_PREPOSITION[role]


class Filler(NamedTuple):
    lemma: str
    human_rating: Optional[float]


@dataclass(frozen=True)
class ItemPair:
    """A typical/atypical filler pair for the same target slot of one tuple."""

    pair_id: str
    typical: Filler
    atypical: Filler
    base: EventTuple

    def __post_init__(self):
        if self.typical.lemma == self.atypical.lemma:
            raise ValueError(f"{self.pair_id}: typical and atypical fillers are identical")
        for variant in (self.typical, self.atypical):
            _check_lemma(variant.lemma, f"{self.pair_id}: filler")
            if variant.human_rating is not None and not (
                _RATING_MIN <= variant.human_rating <= _RATING_MAX
            ):
                raise ValueError(
                    f"{self.pair_id}: rating {variant.human_rating} outside "
                    f"[{_RATING_MIN:g},{_RATING_MAX:g}]"
                )

    def filler(self, variant: str) -> Filler:
        if variant == "typical":
            return self.typical
        if variant == "atypical":
            return self.atypical
        raise KeyError(variant)

    @property
    def has_ratings(self) -> bool:
        return self.typical.human_rating is not None and self.atypical.human_rating is not None


@dataclass(frozen=True)
class PlausibilityTriple:
    """An agent-verb-patient triple labeled plausible or implausible."""

    agent: str
    verb: str
    patient: str
    label: str

    def __post_init__(self):
        for field in ("agent", "verb", "patient"):
            _check_lemma(getattr(self, field), field)
        if self.label not in ("plausible", "implausible"):
            raise ValueError(f"bad plausibility label {self.label!r}")


VARIANTS = ("typical", "atypical")


@dataclass(frozen=True)
class ScoreRecord:
    """One (item, variant, scorer, score) row of the interchange format."""

    item_id: str
    variant: str
    scorer: str
    score: float
    meta: Optional[Mapping] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"bad variant {self.variant!r}")
        if not math.isfinite(self.score):
            raise ValueError(f"{self.item_id}/{self.variant}: score must be finite")

    def key(self) -> tuple[str, str, str]:
        return (self.item_id, self.variant, self.scorer)


_SLOT_COLUMNS = (
    (Role.AGENT, 2),
    (Role.VERB, 3),
    (Role.PATIENT, 4),
    (Role.INSTRUMENT, 5),
    (Role.TIME, 6),
    (Role.LOCATION, 7),
)
_N_REQUIRED_COLUMNS = 12
_N_COLUMNS = 14


def _parse_rating(cell: str, line_no: int, path) -> Optional[float]:
    if cell == "":
        return None
    try:
        value = float(cell)
    except ValueError:
        raise DatasetFormatError(f"unparseable rating {cell!r}", line=line_no, path=path)
    if not (_RATING_MIN <= value <= _RATING_MAX):
        raise DatasetFormatError(
            f"rating {value:g} outside [{_RATING_MIN:g},{_RATING_MAX:g}]", line=line_no, path=path
        )
    return value


def load_dtfit(path, role: Role) -> list[ItemPair]:
    """Load a pair TSV whose rows all target `role`.

    Malformed rows raise DatasetFormatError naming the offending line.
    """
    role = Role(role)
    pairs: list[ItemPair] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if not _N_REQUIRED_COLUMNS <= len(cells) <= _N_COLUMNS:
                raise DatasetFormatError(
                    f"expected {_N_REQUIRED_COLUMNS}-{_N_COLUMNS} columns, got {len(cells)}",
                    line=line_no,
                    path=path,
                )
            cells += [""] * (_N_COLUMNS - len(cells))
            item_id = cells[0].strip()
            if not item_id:
                raise DatasetFormatError("empty item_id", line=line_no, path=path)
            if item_id in seen_ids:
                raise DatasetFormatError(f"duplicate item_id {item_id!r}", line=line_no, path=path)
            seen_ids.add(item_id)
            try:
                row_role = Role(cells[1].strip())
            except ValueError:
                raise DatasetFormatError(f"unknown role {cells[1]!r}", line=line_no, path=path)
            if row_role != role:
                raise DatasetFormatError(
                    f"row targets {row_role.value!r}, expected {role.value!r}",
                    line=line_no,
                    path=path,
                )
            slots = []
            target_seen = False
            for slot_role, col in _SLOT_COLUMNS:
                cell = cells[col].strip()
                if not cell:
                    continue
                if cell == SLOT_PLACEHOLDER:
                    if slot_role != role:
                        raise DatasetFormatError(
                            f"placeholder in {slot_role.value} column but row targets {role.value}",
                            line=line_no,
                            path=path,
                        )
                    target_seen = True
                slots.append((slot_role, cell))
            if not target_seen:
                raise DatasetFormatError(
                    f"target slot {role.value!r} missing its ___ placeholder",
                    line=line_no,
                    path=path,
                )
            try:
                base = EventTuple(
                    item_id=item_id,
                    slots=tuple(slots),
                    target_role=role,
                    preposition_override=cells[12].strip() or None,
                    verb_past=cells[13].strip() or None,
                )
                pair = ItemPair(
                    pair_id=item_id,
                    typical=Filler(cells[8].strip(), _parse_rating(cells[9].strip(), line_no, path)),
                    atypical=Filler(cells[10].strip(), _parse_rating(cells[11].strip(), line_no, path)),
                    base=base,
                )
            except ValueError as exc:
                raise DatasetFormatError(str(exc), line=line_no, path=path)
            pairs.append(pair)
    return pairs


def write_dtfit(pairs: Sequence[ItemPair], path) -> None:
    """Serialize pairs back to the pair TSV format (inverse of load_dtfit)."""
    with open(path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            base = pair.base
            slot_cells = {role: "" for role, _ in _SLOT_COLUMNS}
            for role, lemma in base.slots:
                slot_cells[role] = lemma
            cells = [
                pair.pair_id,
                base.target_role.value,
                *(slot_cells[role] for role, _ in _SLOT_COLUMNS),
                pair.typical.lemma,
                "" if pair.typical.human_rating is None else f"{pair.typical.human_rating:g}",
                pair.atypical.lemma,
                "" if pair.atypical.human_rating is None else f"{pair.atypical.human_rating:g}",
                base.preposition_override or "",
                base.verb_past or "",
            ]
            handle.write("\t".join(cells) + "\n")


class TripleRow(NamedTuple):
    """One raw agent-verb-patient row with an explicit pair-group key."""

    group_id: str
    agent: str
    verb: str
    patient: str
    condition: str  # "typical" | "atypical"
    rating: Optional[float]


@dataclass(frozen=True)
class RolePairDerivation:
    agent_pairs: tuple[ItemPair, ...]
    patient_pairs: tuple[ItemPair, ...]
    #: (group_id, reason) for groups that could not be turned into a pair.
    skipped: tuple[tuple[str, str], ...]


def derive_role_pairs(rows: Iterable[TripleRow]) -> RolePairDerivation:
    """Split typical/atypical triple groups into agent-differing and
    patient-differing pairs.

    Groups whose two rows differ in more than one slot (or only in the verb)
    are skipped and reported; groups with a wrong row count or no difference
    at all are errors.
    """
    groups: dict[str, list[TripleRow]] = defaultdict(list)
    order: list[str] = []
    for row in rows:
        if row.group_id not in groups:
            order.append(row.group_id)
        groups[row.group_id].append(row)

    agent_pairs: list[ItemPair] = []
    patient_pairs: list[ItemPair] = []
    skipped: list[tuple[str, str]] = []
    for group_id in order:
        members = groups[group_id]
        if len(members) != 2:
            raise ValueError(f"group {group_id!r}: expected 2 rows, got {len(members)}")
        conditions = {m.condition for m in members}
        if conditions != {"typical", "atypical"}:
            raise ValueError(
                f"group {group_id!r}: need one typical and one atypical row, got {sorted(conditions)}"
            )
        typ = next(m for m in members if m.condition == "typical")
        atyp = next(m for m in members if m.condition == "atypical")
        differing = [
            role
            for role, field in ((Role.AGENT, "agent"), (Role.VERB, "verb"), (Role.PATIENT, "patient"))
            if getattr(typ, field) != getattr(atyp, field)
        ]
        if not differing:
            raise ValueError(f"group {group_id!r}: rows are identical")
        if len(differing) > 1:
            skipped.append((group_id, "rows differ in " + "+".join(r.value for r in differing)))
            continue
        target = differing[0]
        if target == Role.VERB:
            skipped.append((group_id, "rows differ in the verb, not a role filler"))
            continue
        slots = [
            (Role.AGENT, SLOT_PLACEHOLDER if target == Role.AGENT else typ.agent),
            (Role.VERB, typ.verb),
            (Role.PATIENT, SLOT_PLACEHOLDER if target == Role.PATIENT else typ.patient),
        ]
        pair = ItemPair(
            pair_id=group_id,
            typical=Filler(getattr(typ, target.value), typ.rating),
            atypical=Filler(getattr(atyp, target.value), atyp.rating),
            base=EventTuple(item_id=group_id, slots=tuple(slots), target_role=target),
        )
        (agent_pairs if target == Role.AGENT else patient_pairs).append(pair)
    return RolePairDerivation(tuple(agent_pairs), tuple(patient_pairs), tuple(skipped))


def mine_minimal_pairs(
    plausible: Sequence[PlausibilityTriple],
    implausible: Sequence[PlausibilityTriple],
    role: Role,
) -> list[ItemPair]:
    """Pair every plausible triple with every implausible one that matches it
    on the two non-target slots. Emitted pairs carry no human ratings.
    """
    role = Role(role)
    if role not in (Role.AGENT, Role.PATIENT):
        raise ValueError(f"minimal pairs are mined for agent or patient, not {role.value}")
    if not plausible or not implausible:
        raise ValueError("both triple lists must be nonempty")

    def shared_key(t: PlausibilityTriple) -> tuple[str, str]:
        return (t.verb, t.patient) if role == Role.AGENT else (t.agent, t.verb)

    def target_of(t: PlausibilityTriple) -> str:
        return t.agent if role == Role.AGENT else t.patient

    by_key: dict[tuple[str, str], list[PlausibilityTriple]] = defaultdict(list)
    for trip in implausible:
        by_key[shared_key(trip)].append(trip)

    matches = []
    for p in plausible:
        for i in by_key.get(shared_key(p), ()):
            if target_of(p) != target_of(i):
                matches.append((shared_key(p), target_of(p), target_of(i)))
    matches.sort()

    pairs = []
    for n, (key, typical, atypical) in enumerate(matches, start=1):
        if role == Role.AGENT:
            verb, patient = key
            slots = ((Role.AGENT, SLOT_PLACEHOLDER), (Role.VERB, verb), (Role.PATIENT, patient))
        else:
            agent, verb = key
            slots = ((Role.AGENT, agent), (Role.VERB, verb), (Role.PATIENT, SLOT_PLACEHOLDER))
        pair_id = f"minpair-{role.value}-{n:04d}"
        pairs.append(
            ItemPair(
                pair_id=pair_id,
                typical=Filler(typical, None),
                atypical=Filler(atypical, None),
                base=EventTuple(item_id=pair_id, slots=slots, target_role=role),
            )
        )
    return pairs


def intersect_coverage(score_sets: Sequence[tuple[str, set[str]]]) -> set[str]:
    """Intersection of the item ids covered by every scorer.

    An empty intersection is a legal result; reporting flags it downstream.
    """
    if not score_sets:
        raise ValueError("need at least one score set")
    ids: Optional[set[str]] = None
    for _, covered in score_sets:
        ids = set(covered) if ids is None else ids & covered
    return ids


def load_role_triples(path) -> list[TripleRow]:
    """Read raw triple rows: group_id, agent, verb, patient, condition, rating."""
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) not in (5, 6):
                raise DatasetFormatError(
                    f"expected 5-6 columns, got {len(cells)}", line=line_no, path=path
                )
            condition = cells[4].strip().lower()
            condition = {"t": "typical", "a": "atypical"}.get(condition, condition)
            rating = None
            if len(cells) == 6 and cells[5].strip():
                rating = _parse_rating(cells[5].strip(), line_no, path)
            rows.append(
                TripleRow(cells[0].strip(), cells[1].strip(), cells[2].strip(), cells[3].strip(),
                          condition, rating)
            )
    return rows


def load_plausibility_triples(path) -> list[PlausibilityTriple]:
    """Read labeled SVO triples: agent, verb, patient, label."""
    triples = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cells = [c.strip() for c in line.split("\t")]
            if len(cells) != 4:
                raise DatasetFormatError(
                    f"expected 4 columns, got {len(cells)}", line=line_no, path=path
                )
            try:
                triples.append(PlausibilityTriple(*cells))
            except ValueError as exc:
                raise DatasetFormatError(str(exc), line=line_no, path=path)
    return triples


def write_score_records(records: Iterable[ScoreRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            row = {
                "item_id": record.item_id,
                "variant": record.variant,
                "scorer": record.scorer,
                "score": record.score,
            }
            if record.meta:
                row["meta"] = dict(record.meta)
            handle.write(json.dumps(row, sort_keys=True) + "\n")


def read_score_records(path) -> list[ScoreRecord]:
    """Read ScoreRecord JSONL; unknown keys are preserved under meta."""
    records = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                record = ScoreRecord(
                    item_id=str(row["item_id"]),
                    variant=str(row["variant"]),
                    scorer=str(row["scorer"]),
                    score=float(row["score"]),
                    meta=row.get("meta"),
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise DatasetFormatError(f"bad score record: {exc}", line=line_no, path=path)
            if record.key() in seen:
                raise DatasetFormatError(
                    f"duplicate score record {record.key()}", line=line_no, path=path
                )
            seen.add(record.key())
            records.append(record)
    return records
