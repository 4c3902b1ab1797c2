/**
 * Tiny GRU language model over token ids, with JSON checkpoints.
 *
 * The "base" checkpoint plays the role of a pretrained recognizer at smoke
 * scale; extending it appends rows for the three miscue marker ids to the
 * embedding and output layers without touching any existing weight.
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelConfig {
  vocabSize: number;
  embedDim: number;
  hiddenDim: number;
  seed: number;
  mode?: string;
}

export interface CheckpointWeight {
  name: string;
  shape: number[];
  values: number[];
}

export interface Checkpoint {
  config: ModelConfig;
  weights: CheckpointWeight[];
}

export function buildModel(config: ModelConfig): tf.LayersModel {
  // The embedding is a bias-free dense layer over one-hot ids: identical math,
  // gradient support on every backend, and a [vocab, embed] kernel whose rows
  // grow exactly like an embedding table.
  const model = tf.sequential();
  model.add(
    tf.layers.dense({
      units: config.embedDim,
      useBias: false,
      kernelInitializer: tf.initializers.randomNormal({
        mean: 0,
        stddev: 0.05,
        seed: config.seed,
      }),
      inputShape: [null as unknown as number, config.vocabSize],
      name: "embed",
    }),
  );
  model.add(
    tf.layers.gru({
      units: config.hiddenDim,
      returnSequences: true,
      kernelInitializer: tf.initializers.glorotUniform({ seed: config.seed + 1 }),
      recurrentInitializer: tf.initializers.glorotUniform({ seed: config.seed + 2 }),
      name: "gru",
    }),
  );
  model.add(
    tf.layers.dense({
      units: config.vocabSize,
      kernelInitializer: tf.initializers.glorotUniform({ seed: config.seed + 3 }),
      name: "out",
    }),
  );
  return model;
}

/** One-hot id lookup feeding the model's dense embedding. */
export function encodeIds(ids: tf.Tensor2D, vocabSize: number): tf.Tensor3D {
  return tf.oneHot(ids, vocabSize).toFloat() as tf.Tensor3D;
}

export function checkpointFromModel(model: tf.LayersModel, config: ModelConfig): Checkpoint {
  const weights: CheckpointWeight[] = model.weights.map((weight) => {
    const tensor = weight.read();
    const values = Array.from(tensor.dataSync());
    return { name: weight.name, shape: tensor.shape.slice(), values };
  });
  return { config, weights };
}

export function modelFromCheckpoint(checkpoint: Checkpoint): tf.LayersModel {
  const model = buildModel(checkpoint.config);
  // Names carry tfjs uniquifier suffixes; restore positionally and verify shapes.
  if (model.weights.length !== checkpoint.weights.length) {
    throw new Error(
      `checkpoint has ${checkpoint.weights.length} weights, model expects ${model.weights.length}`,
    );
  }
  model.setWeights(
    checkpoint.weights.map((w) => tf.tensor(w.values, w.shape as [number, number])),
  );
  return model;
}

/** Deterministic small values for freshly added marker rows. */
function seededValues(count: number, seed: number): number[] {
  let state = seed >>> 0;
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    // mulberry32
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    out.push((((t ^ (t >>> 14)) >>> 0) / 4294967296 - 0.5) * 0.1);
  }
  return out;
}

/**
 * Grow the checkpoint's vocabulary-indexed weights by `extra` ids: new rows in
 * the embedding, new columns and biases in the output layer.  Every existing
 * weight value is preserved bit-for-bit.
 */
export function growVocab(checkpoint: Checkpoint, extra: number): Checkpoint {
  const oldVocab = checkpoint.config.vocabSize;
  const newVocab = oldVocab + extra;
  const weights = checkpoint.weights.map((weight): CheckpointWeight => {
    const { name, shape, values } = weight;
    if (name.startsWith("embed") && shape[0] === oldVocab) {
      const embedDim = shape[1];
      return {
        name,
        shape: [newVocab, embedDim],
        values: values.concat(seededValues(extra * embedDim, checkpoint.config.seed + 101)),
      };
    }
    if (name.startsWith("out") && shape.length === 2 && shape[1] === oldVocab) {
      const hidden = shape[0];
      const extraCols = seededValues(hidden * extra, checkpoint.config.seed + 202);
      const grown: number[] = [];
      for (let row = 0; row < hidden; row++) {
        for (let col = 0; col < oldVocab; col++) grown.push(values[row * oldVocab + col]);
        for (let col = 0; col < extra; col++) grown.push(extraCols[row * extra + col]);
      }
      return { name, shape: [hidden, newVocab], values: grown };
    }
    if (name.startsWith("out") && shape.length === 1 && shape[0] === oldVocab) {
      return { name, shape: [newVocab], values: values.concat(new Array(extra).fill(0)) };
    }
    return weight;
  });
  return { config: { ...checkpoint.config, vocabSize: newVocab }, weights };
}
