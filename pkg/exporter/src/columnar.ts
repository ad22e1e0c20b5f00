/**
 * The training engine's columnar file format:
 *
 *     SURFACE<TAB>POS<TAB>MEDNER<TAB>ENTITY
 *
 * blank line between sentences, `#id <provenance>` before each sentence,
 * other `#` lines are free-form headers.  Unused columns hold `_`.
 */

import * as fs from "fs";

import { ColumnarSentence } from "./types";

export class ColumnarError extends Error {}

export function formatColumnar(sentences: ColumnarSentence[], headers: string[] = []): string {
  const chunks: string[] = [];
  for (const header of headers) chunks.push(`# ${header}`);
  sentences.forEach((sent, i) => {
    const lines = [`#id ${sent.provenance || `s${i}`}`];
    for (let t = 0; t < sent.tokens.length; t++) {
      lines.push(`${sent.tokens[t]}\t${sent.pos[t]}\t${sent.medner[t]}\t${sent.entity[t]}`);
    }
    chunks.push(lines.join("\n"));
  });
  return chunks.join("\n\n") + (chunks.length ? "\n" : "");
}

export function parseColumnar(content: string, source = "<columnar>"): {
  sentences: ColumnarSentence[];
  headers: string[];
} {
  const sentences: ColumnarSentence[] = [];
  const headers: string[] = [];
  let rows: string[][] = [];
  let pendingId: string | null = null;

  const flush = () => {
    if (rows.length) {
      sentences.push({
        provenance: pendingId ?? `s${sentences.length}`,
        tokens: rows.map((r) => r[0]),
        pos: rows.map((r) => r[1]),
        medner: rows.map((r) => r[2]),
        entity: rows.map((r) => r[3]),
      });
      rows = [];
      pendingId = null;
    }
  };

  const lines = content.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) {
      flush();
      continue;
    }
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      if (body.startsWith("id ") && rows.length === 0) {
        pendingId = body.slice(3).trim();
      } else {
        headers.push(body);
      }
      continue;
    }
    const fields = line.split("\t");
    if (fields.length !== 4) {
      throw new ColumnarError(`${source}:${i + 1}: expected 4 tab-separated columns, got ${fields.length}`);
    }
    rows.push(fields);
  }
  flush();
  return { sentences, headers };
}

export function writeColumnar(path: string, sentences: ColumnarSentence[], headers: string[] = []): void {
  const tmp = `${path}.tmp-${process.pid}`;
  fs.writeFileSync(tmp, formatColumnar(sentences, headers), "utf-8");
  fs.renameSync(tmp, path);
}

export function readColumnar(path: string) {
  return parseColumnar(fs.readFileSync(path, "utf-8"), path);
}
