/** Prefer the WASM backend (much faster in Node); fall back to plain cpu. */

import * as tf from "@tensorflow/tfjs";

export async function initBackend(): Promise<string> {
  try {
    await import("@tensorflow/tfjs-backend-wasm");
    await tf.setBackend("wasm");
    await tf.ready();
  } catch {
    await tf.ready();
  }
  return tf.getBackend();
}
