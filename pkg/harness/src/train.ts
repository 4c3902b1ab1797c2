/**
 * Fine-tuning loop with prompt-masked loss: only label and end positions
 * (loss mask true) contribute to the cross-entropy; the model is never
 * trained to reproduce the reading-text prompt.
 */

import * as tf from "@tensorflow/tfjs";

import { PreparedExample } from "./data";
import { encodeIds } from "./model";

export interface TrainOptions {
  epochs: number;
  learningRate: number;
  batchSize: number;
  seed: number;
}

export interface Batch {
  ids: tf.Tensor2D; // [B, T] int32
  targets: tf.Tensor2D; // [B, T-1] int32, ids shifted left
  mask: tf.Tensor2D; // [B, T-1] float32, lossMask shifted left
}

export function makeBatch(examples: PreparedExample[]): Batch {
  const maxLen = Math.max(...examples.map((e) => e.inputIds.length));
  const ids: number[][] = [];
  const targets: number[][] = [];
  const mask: number[][] = [];
  for (const example of examples) {
    const padded = example.inputIds.concat(new Array(maxLen - example.inputIds.length).fill(0));
    const paddedMask = example.lossMask
      .map((m) => (m ? 1 : 0))
      .concat(new Array(maxLen - example.lossMask.length).fill(0));
    ids.push(padded);
    targets.push(padded.slice(1));
    mask.push(paddedMask.slice(1)); // mask[t] governs predicting token t from position t-1
  }
  return {
    ids: tf.tensor2d(ids, [examples.length, maxLen], "int32"),
    targets: tf.tensor2d(targets, [examples.length, maxLen - 1], "int32"),
    mask: tf.tensor2d(mask, [examples.length, maxLen - 1], "float32"),
  };
}

/** Mean masked next-token cross-entropy; an all-false mask yields exactly 0. */
export function maskedLoss(model: tf.LayersModel, batch: Batch, vocabSize: number): tf.Scalar {
  return tf.tidy(() => {
    const logits = model.apply(encodeIds(batch.ids, vocabSize)) as tf.Tensor3D; // [B, T, V]
    const [b, t] = batch.ids.shape;
    const predLogits = logits.slice([0, 0, 0], [b, t - 1, vocabSize]);
    // stable log-softmax from basic ops (kernel support on every backend)
    const shifted = tf.sub(predLogits, tf.max(predLogits, -1, true));
    const logProbs = tf.sub(shifted, tf.log(tf.sum(tf.exp(shifted), -1, true)));
    const oneHot = tf.oneHot(batch.targets, vocabSize);
    const tokenLoss = tf.neg(tf.sum(tf.mul(oneHot.toFloat(), logProbs), -1)); // [B, T-1]
    const maskSum = tf.sum(batch.mask);
    const total = tf.sum(tf.mul(tokenLoss, batch.mask));
    // an all-false mask gives total 0, so the quotient is exactly 0
    return tf.div(total, tf.maximum(maskSum, 1)) as tf.Scalar;
  });
}

function shuffled<T>(items: T[], rand: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Runs the loop and returns the mean loss per epoch. */
export async function finetune(
  model: tf.LayersModel,
  vocabSize: number,
  examples: PreparedExample[],
  options: TrainOptions,
  onEpoch?: (epoch: number, loss: number) => void,
): Promise<number[]> {
  const optimizer = tf.train.adam(options.learningRate);
  const rand = mulberry32(options.seed);
  // LayerVariable.val is typed protected but is the supported way to hand
  // layer weights to a custom optimizer loop
  const variables = model.trainableWeights.map(
    (w) => (w as unknown as { val: tf.Variable }).val,
  );
  const epochLosses: number[] = [];
  for (let epoch = 0; epoch < options.epochs; epoch++) {
    const order = shuffled(examples, rand);
    let total = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += options.batchSize) {
      const slice = order.slice(start, start + options.batchSize);
      const batch = makeBatch(slice);
      const loss = optimizer.minimize(
        () => maskedLoss(model, batch, vocabSize),
        true,
        variables,
      ) as tf.Scalar;
      total += loss.dataSync()[0];
      batches += 1;
      tf.dispose([batch.ids, batch.targets, batch.mask, loss]);
    }
    const mean = total / Math.max(batches, 1);
    epochLosses.push(mean);
    if (onEpoch) onEpoch(epoch, mean);
    await tf.nextFrame();
  }
  optimizer.dispose();
  return epochLosses;
}
