/**
 * Standoff annotation reader.
 *
 * A document is a pair of files: `<name>.txt` holds the raw text and
 * `<name>.ann` holds one annotation per line:
 *
 *     T1<TAB>Label start end[;start end...]<TAB>surface copy
 *
 * Semicolon-separated character ranges encode discontinuous mentions.
 * Lines whose id does not start with "T" (relations, notes) are skipped.
 */

import * as fs from "fs";
import * as path from "path";

import { StandoffAnnotation, StandoffDocument } from "./types";

export class StandoffError extends Error {}

export function parseAnnotations(content: string, source: string): StandoffAnnotation[] {
  const annotations: StandoffAnnotation[] = [];
  const lines = content.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim() || line.startsWith("#")) continue;
    if (!line.startsWith("T")) continue; // relations/events/notes are out of scope
    const where = `${source}:${i + 1}`;
    const fields = line.split("\t");
    if (fields.length < 2) {
      throw new StandoffError(`${where}: expected id<TAB>label+ranges[<TAB>surface]`);
    }
    const [id, body] = fields;
    const surface = fields.slice(2).join("\t");
    const firstSpace = body.indexOf(" ");
    if (firstSpace < 0) {
      throw new StandoffError(`${where}: annotation body ${JSON.stringify(body)} has no ranges`);
    }
    const label = body.slice(0, firstSpace);
    const charRanges: Array<[number, number]> = [];
    for (const part of body.slice(firstSpace + 1).split(";")) {
      const bits = part.trim().split(/\s+/);
      if (bits.length !== 2) {
        throw new StandoffError(`${where}: bad range ${JSON.stringify(part)}, expected "start end"`);
      }
      const start = Number(bits[0]);
      const end = Number(bits[1]);
      if (!Number.isInteger(start) || !Number.isInteger(end) || start < 0 || end <= start) {
        throw new StandoffError(`${where}: bad range bounds ${JSON.stringify(part)}`);
      }
      charRanges.push([start, end]);
    }
    charRanges.sort((a, b) => a[0] - b[0]);
    annotations.push({ id, label, charRanges, surface });
  }
  return annotations;
}

export function readDocument(txtPath: string): StandoffDocument {
  const annPath = txtPath.replace(/\.txt$/, ".ann");
  const text = fs.readFileSync(txtPath, "utf-8");
  if (!fs.existsSync(annPath)) {
    throw new StandoffError(`annotation file missing for ${txtPath}: expected ${annPath}`);
  }
  const annotations = parseAnnotations(fs.readFileSync(annPath, "utf-8"), annPath);
  for (const ann of annotations) {
    for (const [s, e] of ann.charRanges) {
      if (e > text.length) {
        throw new StandoffError(
          `${annPath}: annotation ${ann.id} range ${s}-${e} exceeds text length ${text.length}`
        );
      }
    }
  }
  return { docId: path.basename(txtPath, ".txt"), text, annotations };
}

export function readDocumentDir(dir: string): StandoffDocument[] {
  const names = fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(".txt"))
    .sort();
  if (names.length === 0) {
    throw new StandoffError(`no .txt documents found in ${dir}`);
  }
  return names.map((name) => readDocument(path.join(dir, name)));
}
