/** Minimal dense math for the reference transformer runtime. */

export type Vec = number[];
export type Mat = number[][]; // [rows][cols]

/** y = x . W^T + b, with W stored [out][in] (torch Linear convention). */
export function linear(x: Vec, w: Mat, b: Vec): Vec {
  const out = new Array<number>(w.length);
  for (let j = 0; j < w.length; j++) {
    const row = w[j];
    let acc = b[j];
    for (let i = 0; i < row.length; i++) acc += x[i] * row[i];
    out[j] = acc;
  }
  return out;
}

export function layerNorm(x: Vec, gain: Vec, bias: Vec, eps = 1e-12): Vec {
  let mean = 0;
  for (const v of x) mean += v;
  mean /= x.length;
  let variance = 0;
  for (const v of x) variance += (v - mean) * (v - mean);
  variance /= x.length;
  const denom = Math.sqrt(variance + eps);
  return x.map((v, i) => ((v - mean) / denom) * gain[i] + bias[i]);
}

/** Exact gelu (erf form), as used by BERT-style encoders. */
export function gelu(x: number): number {
  return 0.5 * x * (1 + erf(x / Math.SQRT2));
}

/** tanh-approximated gelu, as used by GPT-2-style decoders. */
export function geluNew(x: number): number {
  return 0.5 * x * (1 + Math.tanh(Math.sqrt(2 / Math.PI) * (x + 0.044715 * x * x * x)));
}

/** Abramowitz-Stegun 7.1.26 rational approximation, |error| < 1.5e-7. */
export function erf(x: number): number {
  const sign = x < 0 ? -1 : 1;
  const ax = Math.abs(x);
  const t = 1 / (1 + 0.3275911 * ax);
  const y =
    1 -
    (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t +
      0.254829592) *
      t *
      Math.exp(-ax * ax);
  return sign * y;
}

export function softmaxInPlace(scores: Vec): void {
  let max = -Infinity;
  for (const v of scores) if (v > max) max = v;
  let sum = 0;
  for (let i = 0; i < scores.length; i++) {
    scores[i] = Math.exp(scores[i] - max);
    sum += scores[i];
  }
  for (let i = 0; i < scores.length; i++) scores[i] /= sum;
}

export function logSumExp(scores: Vec): number {
  let max = -Infinity;
  for (const v of scores) if (v > max) max = v;
  let sum = 0;
  for (const v of scores) sum += Math.exp(v - max);
  return max + Math.log(sum);
}

export function addInPlace(a: Vec, b: Vec): void {
  for (let i = 0; i < a.length; i++) a[i] += b[i];
}
