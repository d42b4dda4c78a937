# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of eventfit.kernels.pure. Keep semantics in lockstep."""

from libc.math cimport log2

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF ID_COL = 0
DEF FORM_COL = 1
DEF LEMMA_COL = 2
DEF UPOS_COL = 3
DEF HEAD_COL = 6
DEF DEPREL_COL = 7


cdef inline object _norm_lemma(object lemma, object form):
    if lemma == "" or lemma == "_":
        lemma = form
    lemma = lemma.lower()
    if " " in lemma:
        lemma = lemma.replace(" ", "_")
    return lemma


def harvest_lines(lines, harvest, int max_arity, verb_upos,
                  dict node_freq, dict edge_freq, dict event_freq, dict relation_totals):
    """See eventfit.kernels.pure.harvest_lines."""
    cdef long n_sentences = 0
    cdef long n_skipped = 0
    cdef list sentence = []
    for raw in lines:
        line = (<str>raw).rstrip("\r\n")
        if not line:
            if sentence:
                if _harvest_sentence(sentence, harvest, max_arity, verb_upos,
                                     node_freq, edge_freq, event_freq, relation_totals):
                    n_sentences += 1
                else:
                    n_skipped += 1
                sentence = []
            continue
        if (<str>line)[0] == "#":
            continue
        sentence.append(line)
    if sentence:
        if _harvest_sentence(sentence, harvest, max_arity, verb_upos,
                             node_freq, edge_freq, event_freq, relation_totals):
            n_sentences += 1
        else:
            n_skipped += 1
    return n_sentences, n_skipped


cdef bint _harvest_sentence(list token_lines, object harvest, int max_arity, object verb_upos,
                            dict node_freq, dict edge_freq, dict event_freq,
                            dict relation_totals) except -1:
    cdef dict tokens = {}
    cdef list order = []
    cdef dict prep_of = {}
    cdef dict deps_of = {}
    cdef long idx, head
    cdef Py_ssize_t colon

    for line in token_lines:
        cols = (<str>line).split("\t")
        if len(cols) != 10:
            return False
        tok_id = <str>cols[ID_COL]
        if "-" in tok_id or "." in tok_id:
            continue
        try:
            idx = int(tok_id)
            head = int(<str>cols[HEAD_COL])
        except ValueError:
            return False
        lemma = _norm_lemma(cols[LEMMA_COL], cols[FORM_COL])
        if not lemma:
            return False
        deprel = <str>cols[DEPREL_COL]
        colon = deprel.find(":")
        if colon >= 0:
            deprel = deprel[:colon]
        tokens[idx] = (lemma, cols[UPOS_COL], head, deprel)
        order.append(idx)

    for idx in order:
        lemma, upos, head, deprel = tokens[idx]
        if deprel == "case" and head not in prep_of:
            prep_of[head] = lemma

    for idx in order:
        lemma, upos, head, deprel = tokens[idx]
        node_freq[lemma] = node_freq.get(lemma, 0) + 1
        if deprel not in harvest or head <= 0 or head not in tokens:
            continue
        label = deprel
        if deprel == "obl" and idx in prep_of:
            label = "obl:" + <str>prep_of[idx]
        edge = (tokens[head][0], label, lemma)
        edge_freq[edge] = edge_freq.get(edge, 0) + 1
        relation_totals[label] = relation_totals.get(label, 0) + 1
        deps_of.setdefault(head, []).append((label, lemma))

    cdef set seen
    cdef list participants
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


def assoc_scores(cnp.ndarray[cnp.float64_t, ndim=1] counts,
                 cnp.ndarray[cnp.float64_t, ndim=1] head_marginals,
                 cnp.ndarray[cnp.float64_t, ndim=1] dep_marginals,
                 cnp.ndarray[cnp.float64_t, ndim=1] relation_totals):
    """See eventfit.kernels.pure.assoc_scores."""
    cdef Py_ssize_t n = counts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pmi = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lmi = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double c, value
    for i in range(n):
        c = counts[i]
        value = log2((c * relation_totals[i]) / (head_marginals[i] * dep_marginals[i]))
        pmi[i] = value
        lmi[i] = c * value
    return pmi, lmi
