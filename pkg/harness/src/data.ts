/** Prepared training JSONL reader (the data-prep pipeline's output format). */

import * as fs from "node:fs";

export interface PreparedExample {
  utteranceId: string;
  audioPath: string | null;
  inputIds: number[];
  lossMask: boolean[];
  split: string;
  mode: string;
}

export function loadPrepared(path: string, split: string | "all" = "all"): PreparedExample[] {
  const examples: PreparedExample[] = [];
  for (const line of fs.readFileSync(path, "utf-8").split("\n")) {
    if (line.trim().length === 0) continue;
    const row = JSON.parse(line);
    if (row.input_ids.length !== row.loss_mask.length) {
      throw new Error(`${path}: ${row.utterance_id}: input_ids and loss_mask lengths differ`);
    }
    if (split !== "all" && row.split !== split) continue;
    examples.push({
      utteranceId: row.utterance_id,
      audioPath: row.audio_path ?? null,
      inputIds: row.input_ids,
      lossMask: row.loss_mask,
      split: row.split,
      mode: row.mode,
    });
  }
  return examples;
}

export function datasetMode(examples: PreparedExample[]): string {
  const modes = new Set(examples.map((e) => e.mode));
  if (modes.size !== 1) throw new Error(`dataset mixes modes: ${[...modes].join(", ")}`);
  return [...modes][0];
}
