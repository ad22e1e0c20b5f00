/**
 * Contextual embedding dump in the training engine's text format.
 *
 * One vector per corpus token occurrence, keyed `docid:sent:idx` so the
 * same surface form keeps context-dependent vectors.  The built-in
 * encoder ("hash-ctx") is fully deterministic: each surface form hashes
 * to a base direction and neighbouring tokens are mixed in with decaying
 * weights, then the vector is L2-normalized.  Real pretrained encoders
 * are not downloadable in an offline build; the encoder registry keeps
 * the model-name surface so one can be added, and unknown names fail
 * with a nonzero exit as an unobtainable model.
 */

import * as fs from "fs";

import { ColumnarSentence } from "./types";

export class EncoderError extends Error {}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function baseVector(token: string, dim: number): Float64Array {
  const rand = mulberry32(fnv1a(token.toLowerCase()));
  const v = new Float64Array(dim);
  for (let i = 0; i < dim; i++) v[i] = rand() * 2 - 1;
  return v;
}

export interface ContextEncoder {
  name: string;
  dim: number;
  encode(tokens: string[]): Float64Array[];
}

export function hashContextEncoder(dim: number): ContextEncoder {
  const WINDOW = [
    [-2, 0.15],
    [-1, 0.3],
    [0, 1.0],
    [1, 0.3],
    [2, 0.15],
  ] as const;
  return {
    name: `hash-ctx-${dim}`,
    dim,
    encode(tokens: string[]): Float64Array[] {
      const bases = tokens.map((t) => baseVector(t, dim));
      return tokens.map((_, i) => {
        const v = new Float64Array(dim);
        for (const [offset, weight] of WINDOW) {
          const j = i + offset;
          if (j < 0 || j >= tokens.length) continue;
          for (let k = 0; k < dim; k++) v[k] += weight * bases[j][k];
        }
        let norm = 0;
        for (let k = 0; k < dim; k++) norm += v[k] * v[k];
        norm = Math.sqrt(norm) || 1;
        for (let k = 0; k < dim; k++) v[k] /= norm;
        return v;
      });
    },
  };
}

export function encoderByName(name: string): ContextEncoder {
  const match = /^hash-ctx-(\d+)$/.exec(name);
  if (match) {
    const dim = Number(match[1]);
    if (dim < 1 || dim > 4096) throw new EncoderError(`bad encoder dimension in ${name}`);
    return hashContextEncoder(dim);
  }
  throw new EncoderError(
    `encoder ${JSON.stringify(name)} is not obtainable in this offline build; available: hash-ctx-<dim>`
  );
}

export function exportEmbeddings(
  sentences: ColumnarSentence[],
  encoder: ContextEncoder
): { keys: string[]; vectors: Float64Array[] } {
  const keys: string[] = [];
  const vectors: Float64Array[] = [];
  for (const sent of sentences) {
    const vecs = encoder.encode(sent.tokens);
    sent.tokens.forEach((_, i) => {
      keys.push(`${sent.provenance}:${i}`);
      vectors.push(vecs[i]);
    });
  }
  return { keys, vectors };
}

export function writeEmbeddings(path: string, keys: string[], vectors: Float64Array[]): void {
  if (keys.length !== vectors.length) throw new EncoderError("keys/vectors length mismatch");
  const dim = vectors.length ? vectors[0].length : 0;
  const lines = [`${keys.length} ${dim}`];
  for (let i = 0; i < keys.length; i++) {
    const vals = Array.from(vectors[i], (v) => v.toFixed(6));
    lines.push(`${keys[i]} ${vals.join(" ")}`);
  }
  const tmp = `${path}.tmp-${process.pid}`;
  fs.writeFileSync(tmp, lines.join("\n") + "\n", "utf-8");
  fs.renameSync(tmp, path);
}
