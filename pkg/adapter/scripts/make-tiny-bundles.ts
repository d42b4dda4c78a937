/**
 * Generate the pinned tiny model bundles (models/tiny-masked,
 * models/tiny-causal) and the lockfile. Fully seeded: rerunning produces
 * byte-identical bundles, which is what pins them.
 */

import { createHash } from "node:crypto";
import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

const HIDDEN = 32;
const LAYERS = 2;
const HEADS = 4;
const FF = 64;
const MAX_LEN = 48;

/** mulberry32: tiny deterministic PRNG. */
function prng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(rand: () => number): number {
  const u = Math.max(rand(), 1e-12);
  const v = rand();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

const round6 = (x: number) => Number(x.toFixed(6));

function matrix(rand: () => number, rows: number, cols: number, scale: number): number[][] {
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => round6(scale * gaussian(rand))),
  );
}

function vector(rand: () => number, n: number, scale: number, offset = 0): number[] {
  return Array.from({ length: n }, () => round6(offset + scale * gaussian(rand)));
}

const CONTENT_WORDS = [
  "tailor", "sew", "sewed", "dress", "wound", "actor", "win", "won", "award",
  "guard", "open", "opened", "door", "key", "sword", "gun", "boxer", "deliver",
  "delivered", "punch", "ring", "cat", "drink", "drank", "milk", "coffee",
  "mason", "mix", "mixed", "cement", "soup", "painter", "cook", "clean",
  "cleaned", "fish", "knife", "sponge", "sailor", "mop", "mopped", "deck",
  "boat", "theatre", "chase", "chased", "bird", "hunting", "marriage",
  "terrorist", "release", "released", "hostage", "album", "truck", "hit",
  "car", "ball", "student", "climb", "climbed", "ship", "water", "plant",
  "flora", "dog", "puppy", "botanist", "examine", "examined", "waiter",
  "clear", "cleared", "restaurant", "tavern", "smuggler", "sell", "sold",
  "weapon", "property", "soldier", "throw", "threw", "bomb", "command",
];

const FUNCTION_WORDS = [
  "the", "a", "an", "it", "was", "that", "which", "did", "with", "on",
  "during", "in", "at",
];

const PUNCT = [".", ",", "?", "!"];

const TEST_FILLERS = Array.from({ length: 60 }, (_, i) =>
  `filler${String(i).padStart(2, "0")}`);

const SUBWORD_PIECES = ["##maker", "##s", "##ing", "##er"];

function maskedVocab(): string[] {
  return [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    ...FUNCTION_WORDS, ...PUNCT, ...CONTENT_WORDS, ...TEST_FILLERS,
    ...SUBWORD_PIECES,
  ];
}

function causalVocab(): string[] {
  const initialForms = ["The", "It", "Which", "On", "In", "With", "A", "An", "During"];
  const medial = [...FUNCTION_WORDS, ...CONTENT_WORDS, ...TEST_FILLERS].map(
    (w) => `Ġ${w}`);
  return ["<unk>", "<pad>", ...initialForms, ...PUNCT, ...medial];
}

function sharedLayerWeights(rand: () => number, weights: Record<string, unknown>,
                            layer: number): void {
  const p = `layer${layer}`;
  for (const name of ["q", "k", "v", "out"]) {
    weights[`${p}.attn.${name}_w`] = matrix(rand, HIDDEN, HIDDEN, 0.08);
    weights[`${p}.attn.${name}_b`] = vector(rand, HIDDEN, 0.02);
  }
  weights[`${p}.ln1_g`] = vector(rand, HIDDEN, 0.02, 1.0);
  weights[`${p}.ln1_b`] = vector(rand, HIDDEN, 0.02);
  weights[`${p}.ffn_in_w`] = matrix(rand, FF, HIDDEN, 0.08);
  weights[`${p}.ffn_in_b`] = vector(rand, FF, 0.02);
  weights[`${p}.ffn_out_w`] = matrix(rand, HIDDEN, FF, 0.08);
  weights[`${p}.ffn_out_b`] = vector(rand, HIDDEN, 0.02);
  weights[`${p}.ln2_g`] = vector(rand, HIDDEN, 0.02, 1.0);
  weights[`${p}.ln2_b`] = vector(rand, HIDDEN, 0.02);
}

function buildBundle(kind: "masked" | "causal", seed: number) {
  const rand = prng(seed);
  const vocab = kind === "masked" ? maskedVocab() : causalVocab();
  const weights: Record<string, unknown> = {};
  weights.tok_emb = matrix(rand, vocab.length, HIDDEN, 0.1);
  weights.pos_emb = matrix(rand, MAX_LEN, HIDDEN, 0.1);
  if (kind === "masked") {
    weights.seg_emb = matrix(rand, 2, HIDDEN, 0.1);
    weights.ln_emb_g = vector(rand, HIDDEN, 0.02, 1.0);
    weights.ln_emb_b = vector(rand, HIDDEN, 0.02);
  }
  for (let layer = 0; layer < LAYERS; layer++) sharedLayerWeights(rand, weights, layer);
  if (kind === "masked") {
    weights.mlm_transform_w = matrix(rand, HIDDEN, HIDDEN, 0.08);
    weights.mlm_transform_b = vector(rand, HIDDEN, 0.02);
    weights.mlm_ln_g = vector(rand, HIDDEN, 0.02, 1.0);
    weights.mlm_ln_b = vector(rand, HIDDEN, 0.02);
    weights.mlm_bias = vector(rand, vocab.length, 0.02);
  } else {
    weights.ln_f_g = vector(rand, HIDDEN, 0.02, 1.0);
    weights.ln_f_b = vector(rand, HIDDEN, 0.02);
  }
  const config = {
    format: "tlm-bundle/1",
    name: `tiny-${kind}`,
    model_type: kind,
    dims: { hidden: HIDDEN, layers: LAYERS, heads: HEADS, ff: FF, max_len: MAX_LEN },
    tokenizer:
      kind === "masked"
        ? {
            kind: "wordpiece-lower",
            specials: { pad: "[PAD]", unk: "[UNK]", cls: "[CLS]", sep: "[SEP]", mask: "[MASK]" },
          }
        : { kind: "bpe-space", specials: { pad: "<pad>", unk: "<unk>" } },
  };
  return { config, vocab, weights };
}

function writeBundle(root: string, kind: "masked" | "causal", seed: number): [string, string] {
  const { config, vocab, weights } = buildBundle(kind, seed);
  const dir = join(root, "models", `tiny-${kind}`);
  mkdirSync(dir, { recursive: true });
  writeFileSync(join(dir, "config.json"), JSON.stringify(config, null, 2) + "\n");
  writeFileSync(join(dir, "vocab.json"), JSON.stringify(vocab, null, 0) + "\n");
  const weightsBlob = JSON.stringify(weights);
  writeFileSync(join(dir, "weights.json"), weightsBlob);
  const sha = createHash("sha256").update(weightsBlob).digest("hex");
  return [`tiny-${kind}`, sha];
}

const root = process.argv[2] ?? ".";
const pins: Record<string, string> = {};
for (const [name, sha] of [writeBundle(root, "masked", 20240501),
                           writeBundle(root, "causal", 20240502)]) {
  pins[name] = sha;
  process.stderr.write(`wrote ${name} (weights sha256 ${sha.slice(0, 12)}...)\n`);
}
writeFileSync(join(root, "models.lock.json"), JSON.stringify(pins, null, 2) + "\n");
process.stderr.write("wrote models.lock.json\n");
