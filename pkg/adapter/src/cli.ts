#!/usr/bin/env node
/**
 * Stimulus JSONL in, score-record JSONL out.
 *
 *   tlm-adapter --model <bundle-dir> --mode masked|causal|restricted_baseline
 *               [--input stimuli.jsonl] [--output scores.jsonl]
 *               [--batch-size N] [--device cpu] [--skip-refusals]
 *               [--lockfile models.lock.json]
 *
 *   tlm-adapter vocab-filter --model <dir> [--model <dir> ...] [--input fillers.txt]
 *
 * Without --input/--output the adapter reads stdin and writes stdout. Any
 * refusal exits nonzero unless --skip-refusals is given, in which case
 * refused stimuli are reported on stderr and skipped.
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import process from "node:process";

import { Model, loadModel } from "./model.js";
import { parseStimulusLine, renderRecord } from "./schema.js";
import { Mode, Outcome, score, vocabFilter } from "./scoring.js";

interface Args {
  command: "score" | "vocab-filter";
  models: string[];
  mode: Mode;
  input?: string;
  output?: string;
  batchSize: number;
  device: string;
  skipRefusals: boolean;
  lockfile?: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = {
    command: "score",
    models: [],
    mode: "masked",
    batchSize: 16,
    device: "cpu",
    skipRefusals: false,
  };
  let i = 0;
  if (argv[0] === "vocab-filter") {
    args.command = "vocab-filter";
    i = 1;
  }
  for (; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[++i];
    };
    switch (flag) {
      case "--model": args.models.push(next()); break;
      case "--mode": {
        const value = next();
        if (!["masked", "causal", "restricted_baseline"].includes(value)) {
          throw new Error(`bad --mode ${value}`);
        }
        args.mode = value as Mode;
        break;
      }
      case "--input": args.input = next(); break;
      case "--output": args.output = next(); break;
      case "--batch-size": {
        args.batchSize = Number(next());
        if (!Number.isInteger(args.batchSize) || args.batchSize < 1) {
          throw new Error("--batch-size must be a positive integer");
        }
        break;
      }
      case "--device": {
        args.device = next();
        if (args.device !== "cpu") throw new Error("only --device cpu is supported");
        break;
      }
      case "--skip-refusals": args.skipRefusals = true; break;
      case "--lockfile": args.lockfile = next(); break;
      case "--help":
      case "-h":
        process.stdout.write(usage());
        process.exit(0);
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (args.models.length === 0) throw new Error("--model is required");
  return args;
}

function usage(): string {
  return (
    "usage: tlm-adapter --model <bundle> --mode <masked|causal|restricted_baseline> " +
    "[--input f] [--output f] [--batch-size n] [--device cpu] [--skip-refusals]\n" +
    "       tlm-adapter vocab-filter --model <bundle> [--model <bundle>...] [--input fillers]\n"
  );
}

function readInput(path?: string): string {
  if (path) return readFileSync(path, "utf-8");
  return readFileSync(0, "utf-8"); // stdin
}

function writeOutput(text: string, path?: string): void {
  if (path) writeFileSync(path, text);
  else process.stdout.write(text);
}

function verifyAgainstLockfile(model: Model, lockfilePath?: string): void {
  const candidates = lockfilePath
    ? [lockfilePath]
    : [join(model.dir, "..", "..", "models.lock.json"), join(process.cwd(), "models.lock.json")];
  const found = candidates.find((p) => existsSync(p));
  if (!found) {
    process.stderr.write(
      `tlm-adapter: warning: no models.lock.json found; ${model.config.name} unpinned\n`);
    return;
  }
  const lock = JSON.parse(readFileSync(found, "utf-8")) as Record<string, string>;
  const pinned = lock[model.config.name];
  if (pinned === undefined) {
    process.stderr.write(
      `tlm-adapter: warning: ${model.config.name} not pinned in ${found}\n`);
    return;
  }
  if (pinned !== model.weightsSha256) {
    throw new Error(
      `${model.config.name}: weights sha256 ${model.weightsSha256} does not match ` +
      `lockfile pin ${pinned} (${found})`);
  }
}

function runScore(args: Args): number {
  const model = loadModel(args.models[0]);
  verifyAgainstLockfile(model, args.lockfile);
  const lines = readInput(args.input).split("\n").filter((l) => l.trim().length > 0);
  const stimuli = lines.map((line, idx) => parseStimulusLine(line, idx + 1));

  const out: string[] = [];
  let refusals = 0;
  // batching is an internal chunking detail; outputs are identical at any size
  for (let start = 0; start < stimuli.length; start += args.batchSize) {
    for (const stimulus of stimuli.slice(start, start + args.batchSize)) {
      const outcome: Outcome = score(model, stimulus, args.mode);
      if ("refusal" in outcome) {
        refusals += 1;
        const r = outcome.refusal;
        const line = `tlm-adapter: refusal [${r.kind}] ${r.item_id}/${r.variant}: ${r.detail}\n`;
        process.stderr.write(line);
        if (!args.skipRefusals) return 1;
        continue;
      }
      out.push(renderRecord(outcome.record));
    }
  }
  writeOutput(out.length ? out.join("\n") + "\n" : "", args.output);
  if (refusals > 0) {
    process.stderr.write(`tlm-adapter: skipped ${refusals} refused stimuli\n`);
  }
  return 0;
}

function runVocabFilter(args: Args): number {
  const models = args.models.map(loadModel);
  const fillers = readInput(args.input)
    .split(/\s+/)
    .filter((w) => w.length > 0);
  const kept = vocabFilter(fillers, models);
  const ordered = fillers.filter((f) => kept.has(f));
  writeOutput(ordered.length ? ordered.join("\n") + "\n" : "", args.output);
  process.stderr.write(`tlm-adapter: ${kept.size}/${new Set(fillers).size} fillers retained\n`);
  return 0;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`tlm-adapter: ${(err as Error).message}\n${usage()}`);
    return 2;
  }
  try {
    return args.command === "vocab-filter" ? runVocabFilter(args) : runScore(args);
  } catch (err) {
    process.stderr.write(`tlm-adapter: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() as string);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
