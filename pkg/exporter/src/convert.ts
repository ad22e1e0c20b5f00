/**
 * Standoff documents -> columnar training file.
 *
 * Character ranges map to token ranges by overlap; ranges that land in
 * different sentences, cover no token, or exceed the tagging scheme's
 * capacity are rejected loudly (annotation ids logged), never silently.
 */

import { writeColumnar } from "./columnar";
import { CapacityError, encodeTags } from "./tags";
import { charRangeToTokens, splitSentences } from "./tokenize";
import { ColumnarSentence, Fragment, MentionT, StandoffDocument } from "./types";

export interface Rejection {
  docId: string;
  annotationId: string;
  reason: string;
}

export interface ConvertResult {
  sentences: ColumnarSentence[];
  rejections: Rejection[];
}

function mergeOverlapping(fragments: Fragment[]): Fragment[] {
  // Adjacent fragments stay separate: semicolon-separated ranges express
  // intentional fragment structure (a shared head next to its modifier),
  // and collapsing them would break exact-span sharing.
  const sorted = [...fragments].sort((a, b) => a[0] - b[0]);
  const merged: Fragment[] = [];
  for (const frag of sorted) {
    const last = merged[merged.length - 1];
    if (last && frag[0] < last[1]) {
      last[1] = Math.max(last[1], frag[1]);
    } else {
      merged.push([frag[0], frag[1]]);
    }
  }
  return merged;
}

export function convertDocument(doc: StandoffDocument, scheme: string): ConvertResult {
  const sentences = splitSentences(doc.text);
  const perSentence: MentionT[][] = sentences.map(() => []);
  const rejections: Rejection[] = [];

  for (const ann of doc.annotations) {
    let sentenceIndex = -1;
    const fragments: Fragment[] = [];
    let reason: string | null = null;
    for (const [cs, ce] of ann.charRanges) {
      const si = sentences.findIndex(
        (s) => s.tokens.length > 0 && s.tokens[0].start < ce && s.tokens[s.tokens.length - 1].end > cs
      );
      if (si < 0) {
        reason = `range ${cs}-${ce} covers no token`;
        break;
      }
      if (sentenceIndex >= 0 && si !== sentenceIndex) {
        reason = "fragments span multiple sentences";
        break;
      }
      sentenceIndex = si;
      const tokRange = charRangeToTokens(sentences[si], cs, ce);
      if (!tokRange) {
        reason = `range ${cs}-${ce} covers no token`;
        break;
      }
      fragments.push(tokRange);
    }
    if (reason === null && fragments.length === 0) {
      reason = "annotation has no usable ranges";
    }
    if (reason !== null) {
      rejections.push({ docId: doc.docId, annotationId: ann.id, reason });
      continue;
    }
    perSentence[sentenceIndex].push({
      id: ann.id,
      label: ann.label,
      fragments: mergeOverlapping(fragments),
    });
  }

  const out: ColumnarSentence[] = [];
  sentences.forEach((sentence, si) => {
    // greedy representability: add mentions one by one, drop (and log) any
    // that push the set beyond the scheme's capacity
    const accepted: MentionT[] = [];
    const ordered = [...perSentence[si]].sort(
      (a, b) => a.fragments[0][0] - b.fragments[0][0] || a.id.localeCompare(b.id)
    );
    for (const mention of ordered) {
      const trial = [...accepted, mention];
      try {
        encodeTags(trial, sentence.tokens.length, scheme);
        accepted.push(mention);
      } catch (err) {
        if (err instanceof CapacityError) {
          rejections.push({ docId: doc.docId, annotationId: mention.id, reason: err.message });
        } else {
          throw err;
        }
      }
    }
    out.push({
      provenance: `${doc.docId}:${si}`,
      tokens: sentence.tokens.map((t) => t.text),
      pos: sentence.tokens.map(() => "_"),
      medner: sentence.tokens.map(() => "_"),
      entity: encodeTags(accepted, sentence.tokens.length, scheme),
    });
  });
  return { sentences: out, rejections };
}

export function convertCorpus(docs: StandoffDocument[], scheme: string): ConvertResult {
  const sentences: ColumnarSentence[] = [];
  const rejections: Rejection[] = [];
  for (const doc of docs) {
    const result = convertDocument(doc, scheme);
    sentences.push(...result.sentences);
    rejections.push(...result.rejections);
  }
  return { sentences, rejections };
}

export function writeCorpus(path: string, result: ConvertResult, scheme: string): void {
  writeColumnar(path, result.sentences, [
    `converter: mcdre-exporter standoff_to_columnar scheme=${scheme}`,
  ]);
}
