"""Stimulus realization and diagnostic-set generation.

Tuples are rendered as simple definite-article sentences in three
constructions (declarative, cleft, wh-interrogative) with one marked filler
slot. Diagnostic helpers rank high-LMI filler substitutions for curation
and validate low-frequency synonym swaps.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .datasets import (CANONICAL_SLOT_ORDER, OBLIQUE_ROLES, SLOT_PLACEHOLDER,
                       EventTuple, ItemPair, Role)
from .errors import InflectionError
from .graph import EventGraph, top_associates

logger = logging.getLogger(__name__)

CONSTRUCTIONS = ("declarative", "cleft", "wh")

#: Simple-past exceptions; everything else takes the regular -ed rules.
IRREGULAR_PAST = {
    "arise": "arose", "awake": "awoke", "be": "was", "bear": "bore", "beat": "beat",
    "become": "became", "begin": "began", "bend": "bent", "bet": "bet", "bind": "bound",
    "bite": "bit", "bleed": "bled", "blow": "blew", "break": "broke", "breed": "bred",
    "bring": "brought", "build": "built", "burn": "burnt", "burst": "burst", "buy": "bought",
    "cast": "cast", "catch": "caught", "choose": "chose", "cling": "clung", "come": "came",
    "cost": "cost", "creep": "crept", "cut": "cut", "deal": "dealt", "dig": "dug",
    "do": "did", "draw": "drew", "dream": "dreamt", "drink": "drank", "drive": "drove",
    "eat": "ate", "fall": "fell", "feed": "fed", "feel": "felt", "fight": "fought",
    "find": "found", "flee": "fled", "fling": "flung", "fly": "flew", "forbid": "forbade",
    "forget": "forgot", "forgive": "forgave", "freeze": "froze", "get": "got",
    "give": "gave", "go": "went", "grind": "ground", "grow": "grew", "hang": "hung",
    "have": "had", "hear": "heard", "hide": "hid", "hit": "hit", "hold": "held",
    "hurt": "hurt", "keep": "kept", "kneel": "knelt", "know": "knew", "lay": "laid",
    "lead": "led", "leap": "leapt", "leave": "left", "lend": "lent", "let": "let",
    "lie": "lay", "light": "lit", "lose": "lost", "make": "made", "mean": "meant",
    "meet": "met", "pay": "paid", "put": "put", "quit": "quit", "read": "read",
    "ride": "rode", "ring": "rang", "rise": "rose", "run": "ran", "say": "said",
    "see": "saw", "seek": "sought", "sell": "sold", "send": "sent", "set": "set",
    "shake": "shook", "shed": "shed", "shine": "shone", "shoot": "shot", "show": "showed",
    "shrink": "shrank", "shut": "shut", "sing": "sang", "sink": "sank", "sit": "sat",
    "slay": "slew", "sleep": "slept", "slide": "slid", "sling": "slung", "smell": "smelt",
    "speak": "spoke", "speed": "sped", "spend": "spent", "spill": "spilt", "spin": "spun",
    "spit": "spat", "split": "split", "spread": "spread", "spring": "sprang",
    "stand": "stood", "steal": "stole", "stick": "stuck", "sting": "stung",
    "stink": "stank", "strike": "struck", "string": "strung", "swear": "swore",
    "sweep": "swept", "swim": "swam", "swing": "swung", "take": "took", "teach": "taught",
    "tear": "tore", "tell": "told", "think": "thought", "throw": "threw",
    "thrust": "thrust", "tread": "trod", "understand": "understood", "wake": "woke",
    "wear": "wore", "weave": "wove", "weep": "wept", "win": "won", "wind": "wound",
    "wring": "wrung", "write": "wrote",
    # regular-but-doubling verbs the naive rule below would miss
    "admit": "admitted", "commit": "committed", "compel": "compelled",
    "control": "controlled", "defer": "deferred", "equip": "equipped",
    "occur": "occurred", "patrol": "patrolled", "permit": "permitted",
    "prefer": "preferred", "propel": "propelled", "rebel": "rebelled",
    "refer": "referred", "regret": "regretted", "submit": "submitted",
    "transfer": "transferred", "transmit": "transmitted",
}

#: Lemmas with no usable simple past; an explicit verb_past is required.
DEFECTIVE_VERBS = frozenset({"beware", "quoth"})

_VOWELS = "aeiou"


def inflect_past(verb: str, override: Optional[str] = None,
                 exceptions: Mapping[str, str] = IRREGULAR_PAST) -> str:
    """Simple past of a verb lemma.

    An explicit override wins; then the irregular table; then the -ed rules
    (final e, consonant+y, and short-word final-consonant doubling).
    """
    if override:
        return override
    if verb in DEFECTIVE_VERBS:
        raise InflectionError(f"no simple past available for {verb!r}; provide verb_past")
    if verb in exceptions:
        return exceptions[verb]
    if not verb.isalpha():
        raise InflectionError(f"cannot inflect non-alphabetic lemma {verb!r}")
    if verb.endswith("e"):
        return verb + "d"
    if len(verb) >= 2 and verb[-1] == "y" and verb[-2] not in _VOWELS:
        return verb[:-1] + "ied"
    one_syllable = len(re.findall(f"[{_VOWELS}]+", verb)) == 1
    if (
        len(verb) >= 3
        and one_syllable
        and verb[-1] not in _VOWELS + "wxy"
        and verb[-2] in _VOWELS
        and verb[-3] not in _VOWELS
    ):
        return verb + verb[-1] + "ed"  # stop -> stopped, mop -> mopped
    return verb + "ed"


@dataclass(frozen=True)
class RealizedStimulus:
    """One sentence with a single marked filler slot."""

    item_id: str
    variant: str
    text_prefix: str
    slot_marker: int
    text_suffix: str
    filler: str
    construction: str

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}")
        if self.slot_marker != len(self.text_prefix):
            raise ValueError("slot_marker must point at the end of the prefix")
        if not self.text_suffix.endswith((".", "?")):
            raise ValueError("stimulus must end in '.' or '?'")

    def render(self, filler: Optional[str] = None) -> str:
        return f"{self.text_prefix}{filler if filler is not None else self.filler}{self.text_suffix}"

    def render_masked(self, marker: str = "[MASK]") -> str:
        return self.render(filler=marker)


_SLOT = object()


def _finish(item: EventTuple, filler: str, variant: str, construction: str,
            tokens: list, terminal: str) -> RealizedStimulus:
    slot_at = tokens.index(_SLOT)
    prefix_words = [str(t) for t in tokens[:slot_at]]
    suffix_words = [str(t) for t in tokens[slot_at + 1:]]
    prefix = (" ".join(prefix_words) + " ") if prefix_words else ""
    if prefix:
        prefix = prefix[0].upper() + prefix[1:]
    suffix = ((" " + " ".join(suffix_words)) if suffix_words else "") + terminal
    return RealizedStimulus(
        item_id=item.item_id,
        variant=variant,
        text_prefix=prefix,
        slot_marker=len(prefix),
        text_suffix=suffix,
        filler=filler,
        construction=construction,
    )


def _ordered_slots(item: EventTuple) -> list[tuple[Role, str]]:
    by_role = dict(item.slots)
    return [(role, by_role[role]) for role in CANONICAL_SLOT_ORDER if role in by_role]


def _noun_phrase(item: EventTuple, role: Role, lemma: str, is_target: bool) -> list:
    phrase: list = []
    if role in OBLIQUE_ROLES:
        phrase.append(item.preposition_for(role))
    phrase.append("the")
    phrase.append(_SLOT if is_target else lemma)
    return phrase


def realize_declarative(item: EventTuple, filler: str,
                        variant: str = "typical") -> RealizedStimulus:
    """Canonical order: "The <agent> <verb-past> the <patient> [<prep> the <oblique>]." """
    past = inflect_past(item.verb, item.verb_past)
    tokens: list = []
    for role, lemma in _ordered_slots(item):
        if role == Role.VERB:
            tokens.append(past)
        else:
            tokens.extend(_noun_phrase(item, role, lemma, role == item.target_role))
    return _finish(item, filler, variant, "declarative", tokens, ".")


def realize_cleft(item: EventTuple, filler: str, variant: str = "typical") -> RealizedStimulus:
    """Focus-fronting: "It was [<prep>] the <slot> that <remainder>." """
    past = inflect_past(item.verb, item.verb_past)
    target = item.target_role
    tokens: list = ["it", "was"]
    if target in OBLIQUE_ROLES:
        tokens.append(item.preposition_for(target))
    tokens.extend(["the", _SLOT, "that"])
    if target == Role.AGENT:
        tokens.append(past)
        for role, lemma in _ordered_slots(item):
            if role in (Role.AGENT, Role.VERB):
                continue
            tokens.extend(_noun_phrase(item, role, lemma, False))
    else:
        for role, lemma in _ordered_slots(item):
            if role == target:
                continue
            if role == Role.VERB:
                tokens.append(past)
            else:
                tokens.extend(_noun_phrase(item, role, lemma, False))
    return _finish(item, filler, variant, "cleft", tokens, ".")


def realize_wh(item: EventTuple, filler: str, variant: str = "typical") -> RealizedStimulus:
    """Interrogative: do-support for non-subject targets, none for agents."""
    target = item.target_role
    if target == Role.AGENT:
        past = inflect_past(item.verb, item.verb_past)
        tokens: list = ["which", _SLOT, past]
        for role, lemma in _ordered_slots(item):
            if role in (Role.AGENT, Role.VERB):
                continue
            tokens.extend(_noun_phrase(item, role, lemma, False))
        return _finish(item, filler, variant, "wh", tokens, "?")

    tokens = []
    if target in OBLIQUE_ROLES:
        tokens.append(item.preposition_for(target))
    tokens.extend(["which", _SLOT, "did"])
    for role, lemma in _ordered_slots(item):
        if role == target:
            continue
        if role == Role.VERB:
            tokens.append(item.verb)  # do-support: bare lemma
        else:
            tokens.extend(_noun_phrase(item, role, lemma, False))
    return _finish(item, filler, variant, "wh", tokens, "?")


_REALIZERS = {
    "declarative": realize_declarative,
    "cleft": realize_cleft,
    "wh": realize_wh,
}


def realize(item: EventTuple, filler: str, construction: str,
            variant: str = "typical") -> RealizedStimulus:
    try:
        realizer = _REALIZERS[construction]
    except KeyError:
        raise ValueError(f"unknown construction {construction!r}")
    return realizer(item, filler, variant)


def make_stimuli(pairs: Sequence[ItemPair],
                 constructions: Sequence[str] = CONSTRUCTIONS) -> list[RealizedStimulus]:
    stimuli = []
    for pair in pairs:
        for variant in ("typical", "atypical"):
            for construction in constructions:
                stimuli.append(
                    realize(pair.base, pair.filler(variant).lemma, construction, variant)
                )
    return stimuli


_WORD_RE = re.compile(r"[a-z_']+")
_FUNCTION_WORDS = frozenset({"the", "a", "an", "it", "was", "that", "which", "did"})


def content_roundtrip_ok(stimulus: RealizedStimulus, item: EventTuple, filler: str) -> bool:
    """Check that the rendered sentence contains exactly the tuple's content
    lemmas plus the filler (function words aside; the verb may be inflected)."""
    ignore = set(_FUNCTION_WORDS)
    for role, _ in item.slots:
        if role in OBLIQUE_ROLES:
            ignore.add(item.preposition_for(role))
    tokens = [t for t in _WORD_RE.findall(stimulus.render(filler).lower()) if t not in ignore]
    past = inflect_past(item.verb, item.verb_past).lower()
    tokens = [item.verb if t == past else t for t in tokens]
    expected = Counter(
        lemma for _, lemma in item.context_slots()
    )
    expected[filler] += 1
    return Counter(tokens) == expected


@dataclass(frozen=True)
class SwapCandidate:
    """A proposed filler substitution with corpus frequencies."""

    original: str
    replacement: str
    freq_original: int
    freq_replacement: int
    source: str  # "lmi_adversarial" | "synonym"
    lmi: Optional[float] = None

    def __post_init__(self):
        if self.replacement == self.original:
            raise ValueError("replacement must differ from the original filler")
        if self.freq_original < 0 or self.freq_replacement < 0:
            raise ValueError("frequencies must be nonnegative")
        if self.source not in ("lmi_adversarial", "synonym"):
            raise ValueError(f"unknown swap source {self.source!r}")


def adversarial_fillers(verb: str, target_relation: str, graph: EventGraph,
                        context: EventTuple, k: int,
                        original: Optional[str] = None,
                        exclude: Iterable[str] = ()) -> list[SwapCandidate]:
    """Top-k LMI associates of the verb as substitution candidates.

    Existing fillers (`exclude`, plus the original being replaced) are
    skipped. The list is a ranked suggestion for human curation, not an
    automatic dataset: whether a candidate yields a genuinely odd event is a
    judgment call.
    """
    if k == 0:
        return []
    if k < 0:
        raise ValueError("k must be >= 0")
    if verb not in graph.nodes:
        logger.warning("verb %r not in graph; no adversarial candidates", verb)
        return []
    excluded = set(exclude)
    if original is not None:
        excluded.add(original)
    ranked = top_associates(graph, verb, target_relation, "as_head", k + len(excluded))
    candidates = []
    for lemma, lmi in ranked:
        if lemma in excluded:
            continue
        candidates.append(
            SwapCandidate(
                original=original or "",
                replacement=lemma,
                freq_original=graph.node_frequency(original) if original else 0,
                freq_replacement=graph.node_frequency(lemma),
                source="lmi_adversarial",
                lmi=lmi,
            )
        )
        if len(candidates) == k:
            break
    return candidates


DEFAULT_FREQUENCY_CAP = 300_000


@dataclass(frozen=True)
class SwapValidation:
    valid: bool
    reason: str

    def __bool__(self) -> bool:
        return self.valid


def validate_synonym_swap(candidate: SwapCandidate, freq: Mapping[str, int],
                          cap: int = DEFAULT_FREQUENCY_CAP) -> SwapValidation:
    """A synonym swap is valid iff the replacement is strictly rarer than the
    original and strictly below the frequency cap. Missing lemmas count as
    frequency 0."""
    f_orig = freq.get(candidate.original, 0)
    f_repl = freq.get(candidate.replacement, 0)
    problems = []
    if not f_repl < f_orig:
        problems.append(
            f"rule 1: replacement frequency {f_repl} is not below original frequency {f_orig}"
        )
    if not f_repl < cap:
        problems.append(f"rule 2: replacement frequency {f_repl} is not below the cap {cap}")
    if problems:
        return SwapValidation(False, "; ".join(problems))
    return SwapValidation(True, f"replacement is rarer than the original and below {cap}")


def write_stimuli(stimuli: Iterable[RealizedStimulus], path) -> None:
    """Stimulus JSONL: item_id, variant, construction, prefix, filler, suffix."""
    with open(path, "w", encoding="utf-8") as handle:
        for stim in stimuli:
            handle.write(json.dumps({
                "item_id": stim.item_id,
                "variant": stim.variant,
                "construction": stim.construction,
                "prefix": stim.text_prefix,
                "filler": stim.filler,
                "suffix": stim.text_suffix,
            }, sort_keys=True) + "\n")


def read_stimuli(path) -> list[RealizedStimulus]:
    stimuli = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            stimuli.append(RealizedStimulus(
                item_id=row["item_id"],
                variant=row["variant"],
                text_prefix=row["prefix"],
                slot_marker=len(row["prefix"]),
                text_suffix=row["suffix"],
                filler=row["filler"],
                construction=row["construction"],
            ))
    return stimuli
