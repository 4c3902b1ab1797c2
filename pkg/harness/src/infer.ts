/**
 * Greedy decoding from the prompt context of prepared examples.
 *
 * The decoder context is the example's mask-false prefix (reading-text prompt
 * plus start-of-token); nothing from the supervised label region is shown.
 * With prompting off, the prompt is dropped and only the final control token
 * remains as context.
 */

import * as tf from "@tensorflow/tfjs";

import { PreparedExample } from "./data";
import { encodeIds } from "./model";
import { ExtendedTokenizer } from "./vocab";

export interface DecodeOptions {
  maxNewTokens: number;
  budget: number;
}

export const DEFAULT_DECODE: DecodeOptions = { maxNewTokens: 64, budget: 448 };

export function contextIds(example: PreparedExample, prompt: boolean): number[] {
  const prefix: number[] = [];
  for (let i = 0; i < example.inputIds.length; i++) {
    if (example.lossMask[i]) break;
    prefix.push(example.inputIds[i]);
  }
  if (prompt || prefix.length === 0) return prefix;
  return prefix.slice(-1);
}

export function greedyDecode(
  model: tf.LayersModel,
  vocabSize: number,
  prefix: number[],
  eotId: number,
  options: DecodeOptions = DEFAULT_DECODE,
): number[] {
  const generated: number[] = [];
  const ids = prefix.slice();
  while (generated.length < options.maxNewTokens && ids.length < options.budget) {
    const next = tf.tidy(() => {
      const input = tf.tensor2d([ids], [1, ids.length], "int32");
      const logits = model.apply(encodeIds(input, vocabSize)) as tf.Tensor3D;
      const last = logits.slice([0, ids.length - 1, 0], [1, 1, vocabSize]);
      return last.reshape([vocabSize]).argMax().dataSync()[0];
    });
    if (next === eotId) break;
    generated.push(next);
    ids.push(next);
  }
  return generated;
}

export interface HypothesisRow {
  utterance_id: string;
  hypothesis_kind: "plain" | "annotated";
  text: string;
  system_label: string;
}

export function inferExample(
  model: tf.LayersModel,
  tokenizer: ExtendedTokenizer,
  example: PreparedExample,
  mode: string,
  prompt: boolean,
  label: string,
): HypothesisRow {
  const prefix = contextIds(example, prompt);
  const generated = greedyDecode(model, tokenizer.vocabSize, prefix, tokenizer.vocab.eotId);
  return {
    utterance_id: example.utteranceId,
    hypothesis_kind: mode === "e2e" ? "annotated" : "plain",
    text: tokenizer.decode(generated),
    system_label: label,
  };
}
