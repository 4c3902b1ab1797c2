/**
 * Command-line entry: init-base, extend, train, infer.
 *
 * Files are the only interface to the annotation toolkit: the vocabulary file
 * and extension manifest come from `miscue prepare`, and the hypotheses JSONL
 * written by `infer` feeds `miscue evaluate`.
 */

import * as fs from "node:fs";

import { initBackend } from "./backend";
import { datasetMode, loadPrepared } from "./data";
import { inferExample } from "./infer";
import {
  buildModel,
  Checkpoint,
  checkpointFromModel,
  growVocab,
  modelFromCheckpoint,
} from "./model";
import { finetune } from "./train";
import { ExtendedTokenizer, loadExtension, loadVocab } from "./vocab";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new UsageError(`malformed arguments near ${key}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

class UsageError extends Error {}

function need(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new UsageError(`missing required flag --${name}`);
  return value;
}

function numberFlag(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (Number.isNaN(value)) throw new UsageError(`--${name} expects a number, got ${raw}`);
  return value;
}

function readCheckpoint(path: string): Checkpoint {
  return JSON.parse(fs.readFileSync(path, "utf-8"));
}

function writeCheckpoint(checkpoint: Checkpoint, path: string): void {
  fs.writeFileSync(path, JSON.stringify(checkpoint));
}

export function cmdInitBase(flags: Map<string, string>): void {
  const vocab = loadVocab(need(flags, "vocab"));
  const config = {
    vocabSize: vocab.surfaces.length,
    embedDim: numberFlag(flags, "embed", 48),
    hiddenDim: numberFlag(flags, "hidden", 96),
    seed: numberFlag(flags, "seed", 0),
  };
  const model = buildModel(config);
  writeCheckpoint(checkpointFromModel(model, config), need(flags, "output"));
  console.log(`base checkpoint: vocab ${config.vocabSize}, embed ${config.embedDim}, hidden ${config.hiddenDim}`);
}

export function cmdExtend(flags: Map<string, string>): void {
  const checkpoint = readCheckpoint(need(flags, "checkpoint"));
  const extension = loadExtension(need(flags, "extension"));
  if (extension.baseVocabSize !== checkpoint.config.vocabSize) {
    throw new Error(
      `vocabulary size mismatch: checkpoint has ${checkpoint.config.vocabSize}, ` +
        `extension manifest expects base ${extension.baseVocabSize}`,
    );
  }
  const expected = extension.added.map(([, id]) => id);
  const first = checkpoint.config.vocabSize;
  expected.forEach((id, offset) => {
    if (id !== first + offset) {
      throw new Error(`extension ids not contiguous from ${first}: ${expected.join(", ")}`);
    }
  });
  const grown = growVocab(checkpoint, extension.added.length);
  writeCheckpoint(grown, need(flags, "output"));
  console.log(`extended checkpoint: vocab ${checkpoint.config.vocabSize} -> ${grown.config.vocabSize}`);
}

export async function cmdTrain(flags: Map<string, string>): Promise<void> {
  const checkpoint = readCheckpoint(need(flags, "checkpoint"));
  const mode = flags.get("mode") ?? "e2e";
  const examples = loadPrepared(need(flags, "data"), flags.get("split") ?? "train");
  if (examples.length === 0) throw new Error("no examples selected for training");
  if (datasetMode(examples) !== mode) {
    throw new Error(`dataset mode ${datasetMode(examples)} does not match --mode ${mode}`);
  }
  const maxId = Math.max(...examples.flatMap((e) => e.inputIds));
  if (maxId >= checkpoint.config.vocabSize) {
    throw new Error(
      `dataset uses token id ${maxId} but checkpoint vocabulary is ${checkpoint.config.vocabSize}; ` +
        `extend the checkpoint first`,
    );
  }
  const model = modelFromCheckpoint(checkpoint);
  const options = {
    epochs: numberFlag(flags, "epochs", 300),
    learningRate: numberFlag(flags, "lr", 0.01),
    batchSize: numberFlag(flags, "batch-size", 16),
    seed: numberFlag(flags, "seed", 0),
  };
  const logPath = flags.get("log");
  const logLines: string[] = ["epoch,loss"];
  const losses = await finetune(model, checkpoint.config.vocabSize, examples, options, (epoch, loss) => {
    logLines.push(`${epoch},${loss}`);
    if (epoch % 25 === 0 || epoch === options.epochs - 1) {
      console.log(`epoch ${epoch}: loss ${loss.toFixed(4)}`);
    }
  });
  if (logPath) fs.writeFileSync(logPath, logLines.join("\n") + "\n");
  const tuned = checkpointFromModel(model, { ...checkpoint.config, mode });
  writeCheckpoint(tuned, need(flags, "output"));
  console.log(`final loss ${losses[losses.length - 1].toFixed(4)} after ${options.epochs} epochs`);
}

export function cmdInfer(flags: Map<string, string>): void {
  const checkpoint = readCheckpoint(need(flags, "checkpoint"));
  const mode = flags.get("mode") ?? "e2e";
  if (checkpoint.config.mode !== undefined && checkpoint.config.mode !== mode) {
    throw new Error(`checkpoint was trained in mode ${checkpoint.config.mode}, not ${mode}`);
  }
  const vocab = loadVocab(need(flags, "vocab"));
  const extension = loadExtension(need(flags, "extension"));
  const tokenizer = new ExtendedTokenizer(vocab, extension);
  if (tokenizer.vocabSize !== checkpoint.config.vocabSize) {
    throw new Error(
      `checkpoint vocabulary ${checkpoint.config.vocabSize} does not match ` +
        `extended tokenizer ${tokenizer.vocabSize}`,
    );
  }
  const examples = loadPrepared(need(flags, "data"), flags.get("split") ?? "all");
  const prompt = (flags.get("prompt") ?? "on") === "on";
  const label = flags.get("label") ?? "e2e";
  const model = modelFromCheckpoint(checkpoint);
  const lines = examples
    .slice()
    .sort((a, b) => a.utteranceId.localeCompare(b.utteranceId))
    .map((example) => JSON.stringify(inferExample(model, tokenizer, example, mode, prompt, label)));
  fs.writeFileSync(need(flags, "output"), lines.join("\n") + (lines.length ? "\n" : ""));
  console.log(`wrote ${lines.length} hypotheses`);
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    await initBackend();
    const flags = parseFlags(rest);
    switch (command) {
      case "init-base":
        cmdInitBase(flags);
        return 0;
      case "extend":
        cmdExtend(flags);
        return 0;
      case "train":
        await cmdTrain(flags);
        return 0;
      case "infer":
        cmdInfer(flags);
        return 0;
      default:
        console.error("usage: harness {init-base|extend|train|infer} [--flag value ...]");
        return 1;
    }
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(`harness ${command}: ${error.message}`);
      return 1;
    }
    console.error(`harness ${command}: ${(error as Error).message}`);
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
