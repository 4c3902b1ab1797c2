/**
 * Tokenizer boundary: reads the vocabulary file and the vocabulary-extension
 * manifest produced by the data-prep pipeline, and exposes an extended
 * tokenizer whose miscue marker tokens are single atomic ids.
 */

import * as fs from "node:fs";

export interface Vocab {
  surfaces: string[];
  ids: Map<string, number>;
  sotId: number;
  eotId: number;
}

export function loadVocab(path: string): Vocab {
  const specials = new Map<string, number>();
  const surfaces: string[] = [];
  for (const rawLine of fs.readFileSync(path, "utf-8").split("\n")) {
    const line = rawLine.replace(/\r$/, "");
    if (line.startsWith("#special ")) {
      const parts = line.split(" ");
      if (parts.length !== 3) throw new Error(`${path}: malformed special line: ${line}`);
      specials.set(parts[1], parseInt(parts[2], 10));
    } else if (line.length > 0) {
      surfaces.push(line);
    }
  }
  const sotId = specials.get("sot");
  const eotId = specials.get("eot");
  if (sotId === undefined || eotId === undefined) {
    throw new Error(`${path}: vocabulary lacks #special sot/eot declarations`);
  }
  const ids = new Map<string, number>();
  surfaces.forEach((surface, i) => ids.set(surface, i));
  return { surfaces, ids, sotId, eotId };
}

export interface VocabExtension {
  baseVocabSize: number;
  added: Array<[string, number]>;
}

export function loadExtension(path: string): VocabExtension {
  const lines = fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
  if (lines.length === 0 || typeof lines[0].base_vocab_size !== "number") {
    throw new Error(`${path}: missing base_vocab_size header`);
  }
  const added = lines.slice(1).map((row): [string, number] => [row.surface, row.id]);
  return { baseVocabSize: lines[0].base_vocab_size, added };
}

/** Word-level tokenizer grown by the extension manifest's marker ids. */
export class ExtendedTokenizer {
  readonly vocab: Vocab;
  readonly extension: VocabExtension;
  private readonly markerIds = new Map<string, number>();
  private readonly markerSurfaces = new Map<number, string>();

  constructor(vocab: Vocab, extension: VocabExtension) {
    if (extension.baseVocabSize !== vocab.surfaces.length) {
      throw new Error(
        `vocabulary size mismatch: extension expects base ${extension.baseVocabSize}, ` +
          `vocabulary file has ${vocab.surfaces.length} tokens`,
      );
    }
    for (const [surface, id] of extension.added) {
      this.markerIds.set(surface, id);
      this.markerSurfaces.set(id, surface);
    }
    this.vocab = vocab;
    this.extension = extension;
  }

  get vocabSize(): number {
    return this.vocab.surfaces.length + this.extension.added.length;
  }

  encode(text: string): number[] {
    const out: number[] = [];
    for (const token of text.split(/\s+/).filter((t) => t.length > 0)) {
      const markerId = this.markerIds.get(token);
      if (markerId !== undefined) {
        out.push(markerId);
        continue;
      }
      const id = this.vocab.ids.get(token);
      if (id === undefined) throw new Error(`token ${JSON.stringify(token)} not in vocabulary`);
      out.push(id);
    }
    return out;
  }

  decode(ids: number[], skipSpecial = true): string {
    const words: string[] = [];
    for (const id of ids) {
      const marker = this.markerSurfaces.get(id);
      if (marker !== undefined) {
        words.push(marker);
        continue;
      }
      if (id < 0 || id >= this.vocab.surfaces.length) {
        throw new Error(`token id ${id} out of range`);
      }
      if (skipSpecial && (id === this.vocab.sotId || id === this.vocab.eotId)) continue;
      words.push(this.vocab.surfaces[id]);
    }
    return words.join(" ");
  }
}
