/**
 * The three scoring modes over a loaded model, with explicit refusals.
 *
 * masked:              log P(filler | full sentence), filler position masked.
 * restricted_baseline: same, but attention sees only the mask position and
 *                      the mandatory special tokens (context is invisible).
 * causal:              log P(filler | prefix only); refuses stimuli whose
 *                      slot is sentence-initial (no content word precedes it).
 */

import { Model } from "./model.js";
import { ScoreRecord, Stimulus } from "./schema.js";

export type Mode = "masked" | "causal" | "restricted_baseline";

export interface Refusal {
  item_id: string;
  variant: string;
  kind: "multi_token_filler" | "sentence_initial_slot" | "sequence_too_long";
  detail: string;
}

export type Outcome = { record: ScoreRecord } | { refusal: Refusal };

const ARTICLES = new Set(["the", "a", "an"]);

/** True when nothing but articles precedes the slot. */
export function slotIsSentenceInitial(prefix: string): boolean {
  const words = prefix
    .trim()
    .split(/\s+/)
    .filter((w) => w.length > 0);
  return words.every((w) => ARTICLES.has(w.toLowerCase()));
}

function refuse(stimulus: Stimulus, kind: Refusal["kind"], detail: string): Outcome {
  return {
    refusal: { item_id: stimulus.item_id, variant: stimulus.variant, kind, detail },
  };
}

function baseMeta(model: Model, mode: Mode): Record<string, unknown> {
  return {
    model: model.config.name,
    mode,
    revision: model.weightsSha256.slice(0, 12),
  };
}

function scorerName(model: Model, mode: Mode): string {
  return `${model.config.name}:${mode}`;
}

export function scoreMasked(model: Model, stimulus: Stimulus, restricted = false): Outcome {
  const mode: Mode = restricted ? "restricted_baseline" : "masked";
  const fillerId = model.tokenizer.fillerTokenId(stimulus.filler, false);
  if (fillerId === null) {
    return refuse(stimulus, "multi_token_filler",
      `filler ${JSON.stringify(stimulus.filler)} is not a single token for ${model.config.name}`);
  }
  const cls = model.special("cls");
  const sep = model.special("sep");
  const mask = model.special("mask");
  const prefixIds = model.tokenizer.encode(stimulus.prefix, true);
  const suffixIds = model.tokenizer.encode(stimulus.suffix, false);
  const ids = [cls, ...prefixIds, mask, ...suffixIds, sep];
  if (ids.length > model.config.dims.max_len) {
    return refuse(stimulus, "sequence_too_long", `${ids.length} tokens`);
  }
  const maskPosition = 1 + prefixIds.length;

  let visibility: boolean[] | undefined;
  const meta = baseMeta(model, mode);
  meta.mask_position = maskPosition;
  if (restricted) {
    // expose only the mask position plus the mandatory special tokens
    visibility = ids.map((_, i) => i === 0 || i === maskPosition || i === ids.length - 1);
    meta.attention_mask = visibility.map((v) => (v ? 1 : 0));
  }
  const logProbs = model.maskedLogProbs(ids, maskPosition, visibility);
  return {
    record: {
      item_id: stimulus.item_id,
      variant: stimulus.variant,
      scorer: scorerName(model, mode),
      score: logProbs[fillerId],
      meta,
    },
  };
}

export function scoreCausal(model: Model, stimulus: Stimulus): Outcome {
  if (slotIsSentenceInitial(stimulus.prefix)) {
    return refuse(stimulus, "sentence_initial_slot",
      "causal mode cannot predict from an empty context " +
      `(prefix ${JSON.stringify(stimulus.prefix)})`);
  }
  const fillerId = model.tokenizer.fillerTokenId(stimulus.filler, false);
  if (fillerId === null) {
    return refuse(stimulus, "multi_token_filler",
      `filler ${JSON.stringify(stimulus.filler)} is not a single token for ${model.config.name}`);
  }
  const ids = model.tokenizer.encode(stimulus.prefix, true); // suffix ignored
  if (ids.length + 1 > model.config.dims.max_len) {
    return refuse(stimulus, "sequence_too_long", `${ids.length + 1} tokens`);
  }
  const logProbs = model.causalLogProbs(ids);
  const meta = baseMeta(model, "causal");
  meta.context_len = ids.length;
  return {
    record: {
      item_id: stimulus.item_id,
      variant: stimulus.variant,
      scorer: scorerName(model, "causal"),
      score: logProbs[fillerId],
      meta,
    },
  };
}

export function score(model: Model, stimulus: Stimulus, mode: Mode): Outcome {
  switch (mode) {
    case "masked":
      return scoreMasked(model, stimulus, false);
    case "restricted_baseline":
      return scoreMasked(model, stimulus, true);
    case "causal":
      return scoreCausal(model, stimulus);
  }
}

/** Fillers that are single tokens in every given model's vocabulary. */
export function vocabFilter(fillers: Iterable<string>, models: Model[]): Set<string> {
  if (models.length === 0) throw new Error("vocabFilter needs at least one model");
  const kept = new Set<string>();
  for (const filler of fillers) {
    if (models.every((m) => m.tokenizer.fillerTokenId(filler, false) !== null)) {
      kept.add(filler);
    }
  }
  return kept;
}
