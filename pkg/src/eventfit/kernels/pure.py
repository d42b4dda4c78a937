"""Pure-Python implementations of the hot counting/weighting loops.

These are the reference semantics; eventfit.kernels._native is a compiled
twin with identical behavior. Keep the two in lockstep.
"""

from math import log2

import numpy as np

_ID, _FORM, _LEMMA, _UPOS, _XPOS, _FEATS, _HEAD, _DEPREL, _DEPS, _MISC = range(10)


def _norm_lemma(lemma, form):
    if lemma == "" or lemma == "_":
        lemma = form
    lemma = lemma.lower()
    if " " in lemma:
        lemma = lemma.replace(" ", "_")
    return lemma


def harvest_lines(lines, harvest, max_arity, verb_upos,
                  node_freq, edge_freq, event_freq, relation_totals):
    """Count tokens, dependency edges, and verb-rooted joint events.

    `lines` must cover whole sentences (blank-line separated CoNLL-U).
    Counts are accumulated in place into the four dicts. A sentence with any
    malformed token line is skipped entirely. Returns (n_sentences, n_skipped).
    """
    n_sentences = 0
    n_skipped = 0
    sentence = []

    def flush(sent):
        nonlocal n_sentences, n_skipped
        if not sent:
            return
        if _harvest_sentence(sent, harvest, max_arity, verb_upos,
                             node_freq, edge_freq, event_freq, relation_totals):
            n_sentences += 1
        else:
            n_skipped += 1

    for raw in lines:
        line = raw.rstrip("\r\n")
        if not line:
            flush(sentence)
            sentence = []
            continue
        if line.startswith("#"):
            continue
        sentence.append(line)
    flush(sentence)
    return n_sentences, n_skipped


def _harvest_sentence(token_lines, harvest, max_arity, verb_upos,
                      node_freq, edge_freq, event_freq, relation_totals):
    tokens = {}
    order = []
    for line in token_lines:
        cols = line.split("\t")
        if len(cols) != 10:
            return False
        tok_id = cols[_ID]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword-token range / empty node: no lemma counts, no deps
        try:
            idx = int(tok_id)
            head = int(cols[_HEAD])
        except ValueError:
            return False
        lemma = _norm_lemma(cols[_LEMMA], cols[_FORM])
        if not lemma:
            return False
        deprel = cols[_DEPREL]
        colon = deprel.find(":")
        if colon >= 0:
            deprel = deprel[:colon]
        tokens[idx] = (lemma, cols[_UPOS], head, deprel)
        order.append(idx)

    prep_of = {}
    for idx in order:
        lemma, upos, head, deprel = tokens[idx]
        if deprel == "case" and head not in prep_of:
            prep_of[head] = lemma

    deps_of = {}
    for idx in order:
        lemma, upos, head, deprel = tokens[idx]
        node_freq[lemma] = node_freq.get(lemma, 0) + 1
        if deprel not in harvest or head <= 0 or head not in tokens:
            continue
        label = deprel
        if deprel == "obl" and idx in prep_of:
            label = "obl:" + prep_of[idx]
        edge = (tokens[head][0], label, lemma)
        edge_freq[edge] = edge_freq.get(edge, 0) + 1
        relation_totals[label] = relation_totals.get(label, 0) + 1
        deps_of.setdefault(head, []).append((label, lemma))

    for idx in order:
        lemma, upos, head, deprel = tokens[idx]
        if upos not in verb_upos:
            continue
        participants = []
        seen = set()
        for part in deps_of.get(idx, ()):
            if part in seen:
                continue
            seen.add(part)
            participants.append(part)
            if len(participants) == max_arity:
                break
        if participants:
            key = (lemma, tuple(sorted(participants)))
            event_freq[key] = event_freq.get(key, 0) + 1
    return True


def assoc_scores(counts, head_marginals, dep_marginals, relation_totals):
    """Per-edge association weights from parallel count arrays.

    pmi[i] = log2( (c/T) / ((h/T)(d/T)) ), lmi[i] = c * pmi[i], where c is the
    edge count, h/d the head/dependent marginals, and T the total count of the
    edge's relation. All inputs are float64 arrays of equal length.
    """
    n = len(counts)
    pmi = np.empty(n, dtype=np.float64)
    lmi = np.empty(n, dtype=np.float64)
    for i in range(n):
        c = counts[i]
        value = log2((c * relation_totals[i]) / (head_marginals[i] * dep_marginals[i]))
        pmi[i] = value
        lmi[i] = c * value
    return pmi, lmi
