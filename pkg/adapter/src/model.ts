/**
 * Reference transformer runtime over pinned JSON weight bundles.
 *
 * A bundle directory holds config.json, vocab.json, and weights.json. Two
 * architectures are supported, matching the usual pretrained layouts so a
 * converted real checkpoint behaves identically:
 *
 * - "masked": post-LN bidirectional encoder (token+position+segment
 *   embeddings -> LN; per layer MHA -> add&LN -> FFN(gelu) -> add&LN) with a
 *   transform+LN+tied-decoder LM head. Attention accepts an arbitrary
 *   visibility vector, which is how the restricted baseline is expressed.
 * - "causal": pre-LN decoder (per layer x += MHA(LN(x)) with a triangular
 *   mask, x += MLP(LN(x)) with gelu_new; final LN; tied unembedding).
 */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import { Tokenizer, TokenizerSpec, makeTokenizer } from "./tokenizer.js";
import {
  Mat, Vec, addInPlace, gelu, geluNew, layerNorm, linear, logSumExp,
  softmaxInPlace,
} from "./tensor.js";

export interface BundleConfig {
  format: string;
  name: string;
  model_type: "masked" | "causal";
  dims: { hidden: number; layers: number; heads: number; ff: number; max_len: number };
  tokenizer: TokenizerSpec;
}

type Weights = Record<string, unknown>;

const FORMAT = "tlm-bundle/1";

export class Model {
  readonly config: BundleConfig;
  readonly tokenizer: Tokenizer;
  readonly weightsSha256: string;
  private readonly w: Weights;

  constructor(readonly dir: string) {
    const config = JSON.parse(readFileSync(join(dir, "config.json"), "utf-8")) as BundleConfig;
    if (config.format !== FORMAT) {
      throw new Error(`${dir}: unsupported bundle format ${config.format} (want ${FORMAT})`);
    }
    const vocab = JSON.parse(readFileSync(join(dir, "vocab.json"), "utf-8")) as string[];
    const weightsRaw = readFileSync(join(dir, "weights.json"));
    this.config = config;
    this.tokenizer = makeTokenizer(config.tokenizer, vocab);
    this.w = JSON.parse(weightsRaw.toString("utf-8")) as Weights;
    this.weightsSha256 = createHash("sha256").update(weightsRaw).digest("hex");
    this.mat("tok_emb"); // fail fast on malformed bundles
  }

  special(name: string): number {
    const token = this.config.tokenizer.specials[name];
    if (!token) throw new Error(`bundle ${this.config.name} defines no ${name} token`);
    return this.tokenizer.id(token);
  }

  private mat(name: string): Mat {
    const value = this.w[name];
    if (!Array.isArray(value)) throw new Error(`missing weight tensor ${name}`);
    return value as Mat;
  }

  private vec(name: string): Vec {
    const value = this.w[name];
    if (!Array.isArray(value)) throw new Error(`missing weight vector ${name}`);
    return value as Vec;
  }

  /**
   * Multi-head attention at every position. `visible[i][j]` gates whether
   * position i may attend to position j.
   */
  private attention(xs: Vec[], prefix: string, visible: boolean[][]): Vec[] {
    const { hidden, heads } = this.config.dims;
    const dHead = hidden / heads;
    const q = xs.map((x) => linear(x, this.mat(`${prefix}.q_w`), this.vec(`${prefix}.q_b`)));
    const k = xs.map((x) => linear(x, this.mat(`${prefix}.k_w`), this.vec(`${prefix}.k_b`)));
    const v = xs.map((x) => linear(x, this.mat(`${prefix}.v_w`), this.vec(`${prefix}.v_b`)));
    const scale = 1 / Math.sqrt(dHead);
    const merged: Vec[] = xs.map(() => new Array<number>(hidden).fill(0));
    for (let h = 0; h < heads; h++) {
      const off = h * dHead;
      for (let i = 0; i < xs.length; i++) {
        const scores: number[] = [];
        const allowed: number[] = [];
        for (let j = 0; j < xs.length; j++) {
          if (!visible[i][j]) continue;
          let dot = 0;
          for (let d = 0; d < dHead; d++) dot += q[i][off + d] * k[j][off + d];
          scores.push(dot * scale);
          allowed.push(j);
        }
        softmaxInPlace(scores);
        for (let a = 0; a < allowed.length; a++) {
          const j = allowed[a];
          for (let d = 0; d < dHead; d++) merged[i][off + d] += scores[a] * v[j][off + d];
        }
      }
    }
    return merged.map((m) =>
      linear(m, this.mat(`${prefix}.out_w`), this.vec(`${prefix}.out_b`)),
    );
  }

  /** Token log-probabilities at one position of a masked-model input. */
  maskedLogProbs(ids: number[], position: number, visibility?: boolean[]): Vec {
    if (this.config.model_type !== "masked") {
      throw new Error(`${this.config.name} is not a masked model`);
    }
    const { hidden, layers, max_len } = this.config.dims;
    if (ids.length > max_len) throw new Error(`sequence length ${ids.length} > ${max_len}`);
    const tok = this.mat("tok_emb");
    const pos = this.mat("pos_emb");
    const seg = this.mat("seg_emb");
    let xs: Vec[] = ids.map((id, i) => {
      const x = new Array<number>(hidden);
      for (let d = 0; d < hidden; d++) x[d] = tok[id][d] + pos[i][d] + seg[0][d];
      return layerNorm(x, this.vec("ln_emb_g"), this.vec("ln_emb_b"));
    });
    const mask = visibility ?? ids.map(() => true);
    const visible = ids.map(() => mask.slice());
    for (let layer = 0; layer < layers; layer++) {
      const p = `layer${layer}`;
      const att = this.attention(xs, `${p}.attn`, visible);
      xs = xs.map((x, i) => {
        addInPlace(att[i], x);
        return layerNorm(att[i], this.vec(`${p}.ln1_g`), this.vec(`${p}.ln1_b`));
      });
      xs = xs.map((x) => {
        const inner = linear(x, this.mat(`${p}.ffn_in_w`), this.vec(`${p}.ffn_in_b`)).map(gelu);
        const out = linear(inner, this.mat(`${p}.ffn_out_w`), this.vec(`${p}.ffn_out_b`));
        addInPlace(out, x);
        return layerNorm(out, this.vec(`${p}.ln2_g`), this.vec(`${p}.ln2_b`));
      });
    }
    const transformed = layerNorm(
      linear(xs[position], this.mat("mlm_transform_w"), this.vec("mlm_transform_b")).map(gelu),
      this.vec("mlm_ln_g"),
      this.vec("mlm_ln_b"),
    );
    return this.unembed(transformed, this.vec("mlm_bias"));
  }

  /** Next-token log-probabilities after the last position of a causal input. */
  causalLogProbs(ids: number[]): Vec {
    if (this.config.model_type !== "causal") {
      throw new Error(`${this.config.name} is not a causal model`);
    }
    const { hidden, layers, max_len } = this.config.dims;
    if (ids.length === 0) throw new Error("causal input must be nonempty");
    if (ids.length > max_len) throw new Error(`sequence length ${ids.length} > ${max_len}`);
    const tok = this.mat("tok_emb");
    const pos = this.mat("pos_emb");
    let xs: Vec[] = ids.map((id, i) => {
      const x = new Array<number>(hidden);
      for (let d = 0; d < hidden; d++) x[d] = tok[id][d] + pos[i][d];
      return x;
    });
    const visible = ids.map((_, i) => ids.map((_, j) => j <= i));
    for (let layer = 0; layer < layers; layer++) {
      const p = `layer${layer}`;
      const normed = xs.map((x) => layerNorm(x, this.vec(`${p}.ln1_g`), this.vec(`${p}.ln1_b`)));
      const att = this.attention(normed, `${p}.attn`, visible);
      xs = xs.map((x, i) => {
        addInPlace(x, att[i]);
        return x;
      });
      xs = xs.map((x) => {
        const normed2 = layerNorm(x, this.vec(`${p}.ln2_g`), this.vec(`${p}.ln2_b`));
        const inner = linear(normed2, this.mat(`${p}.ffn_in_w`), this.vec(`${p}.ffn_in_b`))
          .map(geluNew);
        const out = linear(inner, this.mat(`${p}.ffn_out_w`), this.vec(`${p}.ffn_out_b`));
        addInPlace(x, out);
        return x;
      });
    }
    const final = layerNorm(xs[xs.length - 1], this.vec("ln_f_g"), this.vec("ln_f_b"));
    return this.unembed(final);
  }

  private unembed(x: Vec, bias?: Vec): Vec {
    const tok = this.mat("tok_emb");
    const logits = new Array<number>(tok.length);
    for (let t = 0; t < tok.length; t++) {
      let acc = bias ? bias[t] : 0;
      const row = tok[t];
      for (let d = 0; d < x.length; d++) acc += x[d] * row[d];
      logits[t] = acc;
    }
    const lse = logSumExp(logits);
    for (let t = 0; t < logits.length; t++) logits[t] -= lse;
    return logits;
  }
}

export function loadModel(dir: string): Model {
  return new Model(dir);
}
