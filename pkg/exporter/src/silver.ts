/**
 * Silver auxiliary columns: part-of-speech and general medical NER.
 *
 * POS sources: "wink" uses the third-party wink-pos-tagger (Penn Treebank
 * tags) when installed, tagging the existing tokens 1:1 via
 * tagRawTokens; "lexicon" is a built-in closed-class + suffix tagger that
 * needs no install.  Medical NER source "gazetteer" matches a built-in
 * dictionary of conditions, chemicals and anatomy, longest entry first,
 * emitting BIO tags over {COND, CHEM, ANAT}.
 *
 * Sources and versions are recorded in `#` headers of the output file.
 */

import { ColumnarSentence } from "./types";

export class AnnotatorError extends Error {}

// -- built-in lexicon POS tagger ---------------------------------------------

const CLOSED_CLASS: Record<string, string> = {
  the: "DET", a: "DET", an: "DET", this: "DET", that: "DET", both: "DET", each: "DET",
  he: "PRON", she: "PRON", it: "PRON", they: "PRON", i: "PRON", we: "PRON", you: "PRON",
  of: "ADP", in: "ADP", on: "ADP", at: "ADP", for: "ADP", with: "ADP", after: "ADP",
  before: "ADP", about: "ADP", from: "ADP", to: "ADP", by: "ADP", per: "ADP",
  and: "CCONJ", or: "CCONJ", but: "CCONJ",
  is: "AUX", was: "AUX", are: "AUX", were: "AUX", be: "AUX", been: "AUX", has: "AUX",
  have: "AUX", had: "AUX", did: "AUX", does: "AUX", do: "AUX",
  not: "PART", no: "DET",
  very: "ADV", daily: "ADV", twice: "ADV", once: "ADV", often: "ADV", weekly: "ADV",
  yesterday: "ADV", today: "ADV", when: "ADV", then: "ADV",
};

const VERB_LIST = new Set([
  "take", "takes", "took", "taken", "taking", "give", "given", "gave", "start", "started",
  "stop", "stopped", "use", "used", "report", "reported", "prescribe", "prescribed",
  "cause", "caused", "feel", "felt", "help", "helps", "helped", "mention", "mentioned",
  "discuss", "discussed", "develop", "developed", "complain", "complained",
]);

function lexiconPos(token: string): string {
  const lower = token.toLowerCase();
  if (/^[0-9]+([.,][0-9]+)?$/.test(token)) return "NUM";
  if (/^[^A-Za-z0-9]+$/.test(token)) return "PUNCT";
  if (lower in CLOSED_CLASS) return CLOSED_CLASS[lower];
  if (VERB_LIST.has(lower)) return "VERB";
  if (/(ing|ed)$/.test(lower) && lower.length > 4) return "VERB";
  if (/(ly)$/.test(lower) && lower.length > 3) return "ADV";
  if (/(ous|ful|ive|al|ic)$/.test(lower) && lower.length > 4) return "ADJ";
  if (/^[A-Z]/.test(token)) return "PROPN";
  return "NOUN";
}

// -- built-in medical gazetteer ----------------------------------------------

const GAZETTEER: Array<[string, string]> = [
  // multi-word entries first; matching is longest-first anyway
  ["adverse drug reaction", "COND"],
  ["blood pressure", "COND"],
  ["joint pain", "COND"],
  ["pain", "COND"], ["swelling", "COND"], ["rash", "COND"], ["nausea", "COND"],
  ["headache", "COND"], ["dizziness", "COND"], ["fever", "COND"], ["cramps", "COND"],
  ["numbness", "COND"], ["constipation", "COND"], ["insomnia", "COND"], ["fatigue", "COND"],
  ["anxiety", "COND"], ["infection", "COND"], ["stiffness", "COND"], ["vomiting", "COND"],
  ["diarrhea", "COND"], ["bleeding", "COND"], ["ache", "COND"], ["aches", "COND"],
  ["aspirin", "CHEM"], ["ibuprofen", "CHEM"], ["paracetamol", "CHEM"], ["colace", "CHEM"],
  ["insulin", "CHEM"], ["warfarin", "CHEM"], ["lipitor", "CHEM"], ["voltaren", "CHEM"],
  ["diclofenac", "CHEM"], ["metformin", "CHEM"], ["tablet", "CHEM"], ["tablets", "CHEM"],
  ["mg", "CHEM"], ["ml", "CHEM"], ["mcg", "CHEM"],
  ["shoulder", "ANAT"], ["knee", "ANAT"], ["hip", "ANAT"], ["arm", "ANAT"], ["leg", "ANAT"],
  ["hand", "ANAT"], ["hands", "ANAT"], ["wrist", "ANAT"], ["ankle", "ANAT"], ["elbow", "ANAT"],
  ["neck", "ANAT"], ["back", "ANAT"], ["stomach", "ANAT"], ["head", "ANAT"], ["jaw", "ANAT"],
];

function gazetteerTags(tokens: string[]): string[] {
  const entries = [...GAZETTEER].sort((a, b) => b[0].split(" ").length - a[0].split(" ").length);
  const tags = new Array<string>(tokens.length).fill("O");
  const lower = tokens.map((t) => t.toLowerCase());
  for (let i = 0; i < tokens.length; i++) {
    if (tags[i] !== "O") continue;
    for (const [entry, label] of entries) {
      const words = entry.split(" ");
      if (i + words.length > tokens.length) continue;
      if (words.every((w, k) => lower[i + k] === w) && tags.slice(i, i + words.length).every((t) => t === "O")) {
        tags[i] = `B-${label}`;
        for (let k = 1; k < words.length; k++) tags[i + k] = `I-${label}`;
        break;
      }
    }
  }
  return tags;
}

// -- wink-pos-tagger (optional third-party source) ----------------------------

interface PosSource {
  name: string;
  version: string;
  tag(tokens: string[]): string[];
}

function winkSource(): PosSource {
  let makeTagger: any;
  try {
    // eslint-disable-next-line @typescript-eslint/no-var-requires
    makeTagger = require("wink-pos-tagger");
  } catch {
    throw new AnnotatorError(
      "POS source 'wink' needs the wink-pos-tagger package; run: npm install wink-pos-tagger"
    );
  }
  // eslint-disable-next-line @typescript-eslint/no-var-requires
  const version = require("wink-pos-tagger/package.json").version as string;
  const tagger = makeTagger();
  return {
    name: "wink-pos-tagger",
    version,
    tag(tokens: string[]): string[] {
      if (tokens.length === 0) return [];
      const tagged = tagger.tagRawTokens(tokens) as Array<{ pos: string }>;
      if (tagged.length !== tokens.length) {
        throw new AnnotatorError(
          `wink-pos-tagger returned ${tagged.length} tags for ${tokens.length} tokens`
        );
      }
      return tagged.map((t) => t.pos);
    },
  };
}

function lexiconSource(): PosSource {
  return { name: "builtin-lexicon", version: "1", tag: (toks) => toks.map(lexiconPos) };
}

export function posSource(name: string): PosSource {
  if (name === "wink") return winkSource();
  if (name === "lexicon") return lexiconSource();
  throw new AnnotatorError(`unknown POS source ${JSON.stringify(name)}; use 'wink' or 'lexicon'`);
}

export function mednerSource(name: string): PosSource {
  if (name === "gazetteer") {
    return { name: "builtin-gazetteer", version: "1", tag: gazetteerTags };
  }
  throw new AnnotatorError(`unknown medner source ${JSON.stringify(name)}; use 'gazetteer'`);
}

export function addSilverColumns(
  sentences: ColumnarSentence[],
  posName: string,
  mednerName: string
): { sentences: ColumnarSentence[]; headers: string[] } {
  const pos = posSource(posName);
  const med = mednerSource(mednerName);
  const out = sentences.map((sent) => ({
    ...sent,
    pos: pos.tag(sent.tokens),
    medner: med.tag(sent.tokens),
  }));
  return {
    sentences: out,
    headers: [
      `pos-source: ${pos.name}@${pos.version}`,
      `medner-source: ${med.name}@${med.version}`,
    ],
  };
}
