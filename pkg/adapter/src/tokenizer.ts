/**
 * Two tokenizer families, enough to express the single-token conventions of
 * the supported model types:
 *
 * - "wordpiece-lower": lowercase, punctuation split off, greedy
 *   longest-match WordPiece with "##" continuations (BERT-style).
 * - "bpe-space": case-sensitive whole-word vocabulary where a non-initial
 *   word is the "Ġ"-prefixed token (GPT-style leading-space convention).
 */

export interface TokenizerSpec {
  kind: "wordpiece-lower" | "bpe-space";
  specials: Record<string, string>;
}

export interface Tokenizer {
  readonly kind: TokenizerSpec["kind"];
  /** Token ids for running text (never empty unless text is). */
  encode(text: string, atSentenceStart: boolean): number[];
  /** The single token id a filler must map to, or null if it is not a
   * single token under this model's convention. */
  fillerTokenId(filler: string, atSentenceStart: boolean): number | null;
  id(token: string): number;
  token(id: number): string;
  readonly vocabSize: number;
}

const PUNCT = /([.,!?;:'"()])/g;

abstract class BaseTokenizer implements Tokenizer {
  protected readonly ids = new Map<string, number>();
  abstract readonly kind: TokenizerSpec["kind"];

  constructor(protected readonly vocab: string[], protected readonly unk: string) {
    vocab.forEach((token, index) => {
      if (this.ids.has(token)) throw new Error(`duplicate vocab entry ${token}`);
      this.ids.set(token, index);
    });
    if (!this.ids.has(unk)) throw new Error(`unknown-token ${unk} missing from vocab`);
  }

  id(token: string): number {
    const got = this.ids.get(token);
    if (got === undefined) throw new Error(`token ${token} not in vocabulary`);
    return got;
  }

  token(id: number): string {
    if (id < 0 || id >= this.vocab.length) throw new Error(`token id ${id} out of range`);
    return this.vocab[id];
  }

  get vocabSize(): number {
    return this.vocab.length;
  }

  abstract encode(text: string, atSentenceStart: boolean): number[];
  abstract fillerTokenId(filler: string, atSentenceStart: boolean): number | null;
}

export class WordPieceTokenizer extends BaseTokenizer {
  readonly kind = "wordpiece-lower" as const;

  private pieces(word: string): string[] | null {
    if (this.ids.has(word)) return [word];
    const out: string[] = [];
    let start = 0;
    while (start < word.length) {
      let end = word.length;
      let found: string | null = null;
      while (end > start) {
        const candidate = (start > 0 ? "##" : "") + word.slice(start, end);
        if (this.ids.has(candidate)) {
          found = candidate;
          break;
        }
        end--;
      }
      if (found === null) return null;
      out.push(found);
      start = end;
    }
    return out;
  }

  private words(text: string): string[] {
    return text
      .toLowerCase()
      .replace(PUNCT, " $1 ")
      .split(/\s+/)
      .filter((w) => w.length > 0);
  }

  encode(text: string): number[] {
    const out: number[] = [];
    for (const word of this.words(text)) {
      const pieces = this.pieces(word);
      if (pieces === null) {
        out.push(this.id(this.unk));
      } else {
        for (const piece of pieces) out.push(this.id(piece));
      }
    }
    return out;
  }

  fillerTokenId(filler: string): number | null {
    const got = this.ids.get(filler.toLowerCase());
    return got === undefined ? null : got;
  }
}

export class SpaceBpeTokenizer extends BaseTokenizer {
  readonly kind = "bpe-space" as const;

  encode(text: string, atSentenceStart: boolean): number[] {
    const out: number[] = [];
    const words = text.replace(PUNCT, " $1 ").split(/\s+/).filter((w) => w.length > 0);
    words.forEach((word, index) => {
      const medial = index > 0 || !atSentenceStart;
      const surface = medial ? `Ġ${word}` : word;
      const got = this.ids.get(surface) ?? this.ids.get(word);
      out.push(got === undefined ? this.id(this.unk) : got);
    });
    return out;
  }

  fillerTokenId(filler: string, atSentenceStart: boolean): number | null {
    // leading-space convention: a mid-sentence filler is the Ġ-form token
    const surface = atSentenceStart ? filler : `Ġ${filler}`;
    const got = this.ids.get(surface);
    return got === undefined ? null : got;
  }
}

export function makeTokenizer(spec: TokenizerSpec, vocab: string[]): Tokenizer {
  const unk = spec.specials.unk;
  if (!unk) throw new Error("tokenizer spec needs an `unk` special token");
  if (spec.kind === "wordpiece-lower") return new WordPieceTokenizer(vocab, unk);
  return new SpaceBpeTokenizer(vocab, unk);
}
