#!/usr/bin/env node
/**
 * mcdre-exporter: offline corpus preparation for the tagging engine.
 *
 *   convert            standoff documents -> columnar file
 *   add-silver         fill POS / medical-NER columns with annotators
 *   export-embeddings  dump per-occurrence contextual vectors
 *
 * Exit codes: 0 ok, 1 usage, 2 data/annotator/encoder problem.
 */

import { readColumnar, writeColumnar } from "./columnar";
import { ColumnarError } from "./columnar";
import { convertCorpus, writeCorpus } from "./convert";
import { EncoderError, encoderByName, exportEmbeddings, writeEmbeddings } from "./embeddings";
import { AnnotatorError, addSilverColumns } from "./silver";
import { StandoffError, readDocumentDir } from "./standoff";
import { CapacityError } from "./tags";

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[], allowed: string[], required: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || !allowed.includes(key.slice(2))) {
      throw new UsageError(`unknown flag ${key}; allowed: ${allowed.map((f) => `--${f}`).join(", ")}`);
    }
    if (i + 1 >= argv.length) throw new UsageError(`flag ${key} needs a value`);
    flags[key.slice(2)] = argv[i + 1];
  }
  for (const need of required) {
    if (!(need in flags)) throw new UsageError(`missing required flag --${need}`);
  }
  return flags;
}

class UsageError extends Error {}

function cmdConvert(argv: string[]): number {
  const flags = parseFlags(argv, ["docs", "out", "scheme"], ["docs", "out"]);
  const scheme = flags.scheme ?? "biohd";
  const docs = readDocumentDir(flags.docs);
  const result = convertCorpus(docs, scheme);
  for (const rej of result.rejections) {
    console.error(`rejected ${rej.docId}/${rej.annotationId}: ${rej.reason}`);
  }
  writeCorpus(flags.out, result, scheme);
  const kept = docs.reduce((n, d) => n + d.annotations.length, 0) - result.rejections.length;
  console.log(
    `converted ${docs.length} documents, ${result.sentences.length} sentences, ` +
      `${kept} mentions kept, ${result.rejections.length} rejected -> ${flags.out}`
  );
  return 0;
}

function cmdAddSilver(argv: string[]): number {
  const flags = parseFlags(argv, ["in", "out", "pos", "medner"], ["in", "out"]);
  const { sentences, headers } = readColumnar(flags.in);
  const result = addSilverColumns(sentences, flags.pos ?? "wink", flags.medner ?? "gazetteer");
  writeColumnar(flags.out, result.sentences, [...headers, ...result.headers]);
  console.log(`annotated ${result.sentences.length} sentences -> ${flags.out}`);
  return 0;
}

function cmdExportEmbeddings(argv: string[]): number {
  const flags = parseFlags(argv, ["in", "out", "model"], ["in", "out"]);
  const encoder = encoderByName(flags.model ?? "hash-ctx-32");
  const { sentences } = readColumnar(flags.in);
  const { keys, vectors } = exportEmbeddings(sentences, encoder);
  writeEmbeddings(flags.out, keys, vectors);
  console.log(`wrote ${keys.length} vectors (dim ${encoder.dim}, model ${encoder.name}) -> ${flags.out}`);
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "convert":
        return cmdConvert(rest);
      case "add-silver":
        return cmdAddSilver(rest);
      case "export-embeddings":
        return cmdExportEmbeddings(rest);
      case undefined:
      case "--help":
      case "help":
        console.log("usage: mcdre-exporter <convert|add-silver|export-embeddings> [flags]");
        console.log("  convert            --docs DIR --out FILE [--scheme biohd|bio]");
        console.log("  add-silver         --in FILE --out FILE [--pos wink|lexicon] [--medner gazetteer]");
        console.log("  export-embeddings  --in FILE --out FILE [--model hash-ctx-32]");
        return command === undefined ? 1 : 0;
      default:
        console.error(`unknown command ${JSON.stringify(command)}`);
        return 1;
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`mcdre-exporter: ${err.message}`);
      return 1;
    }
    if (
      err instanceof StandoffError ||
      err instanceof ColumnarError ||
      err instanceof CapacityError ||
      err instanceof AnnotatorError ||
      err instanceof EncoderError ||
      (err as NodeJS.ErrnoException).code === "ENOENT"
    ) {
      console.error(`mcdre-exporter: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
