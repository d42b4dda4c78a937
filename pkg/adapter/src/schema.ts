/**
 * Wire formats shared with the core evaluator: stimulus JSONL in,
 * score-record JSONL out.
 */
import { z } from "zod";

export const StimulusSchema = z.object({
  item_id: z.string().min(1),
  variant: z.enum(["typical", "atypical"]),
  construction: z.string().min(1),
  prefix: z.string(),
  filler: z.string().min(1),
  suffix: z.string(),
});

export type Stimulus = z.infer<typeof StimulusSchema>;

export const ScoreRecordSchema = z.object({
  item_id: z.string().min(1),
  variant: z.enum(["typical", "atypical"]),
  scorer: z.string().min(1),
  score: z.number().finite(),
  meta: z.record(z.unknown()).optional(),
});

export type ScoreRecord = z.infer<typeof ScoreRecordSchema>;

export function parseStimulusLine(line: string, lineNo: number): Stimulus {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new Error(`line ${lineNo}: not valid JSON (${(err as Error).message})`);
  }
  const result = StimulusSchema.safeParse(raw);
  if (!result.success) {
    const issue = result.error.issues[0];
    throw new Error(`line ${lineNo}: ${issue.path.join(".")}: ${issue.message}`);
  }
  return result.data;
}

export function renderRecord(record: ScoreRecord): string {
  ScoreRecordSchema.parse(record);
  const ordered: Record<string, unknown> = {
    item_id: record.item_id,
    score: record.score,
    scorer: record.scorer,
    variant: record.variant,
  };
  if (record.meta !== undefined) ordered.meta = record.meta;
  return JSON.stringify(ordered);
}
