/**
 * Whitespace-plus-punctuation tokenizer with character alignment.
 *
 * Word tokens are runs of letters/digits (internal hyphens/apostrophes
 * stay inside the token, as in "co-trimoxazole"); every other
 * non-whitespace character is its own token.  Sentences end at newlines
 * and after sentence-final punctuation (. ! ?).
 */

import { Sentence, Token } from "./types";

const TOKEN_RE = /[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*|[^\sA-Za-z0-9]/g;
const SENTENCE_FINAL = new Set([".", "!", "?"]);

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    tokens.push({ text: match[0], start: match.index!, end: match.index! + match[0].length });
  }
  return tokens;
}

export function splitSentences(text: string): Sentence[] {
  const sentences: Sentence[] = [];
  let current: Token[] = [];

  const flush = () => {
    if (current.length) {
      sentences.push({ tokens: current });
      current = [];
    }
  };

  let cursor = 0;
  for (const token of tokenize(text)) {
    if (text.slice(cursor, token.start).includes("\n")) flush();
    current.push(token);
    cursor = token.end;
    if (SENTENCE_FINAL.has(token.text)) flush();
  }
  flush();
  return sentences;
}

/**
 * Map a character range to the token range it overlaps within one
 * sentence: a token belongs to the range iff their character spans
 * intersect.  Returns null when no token of this sentence overlaps.
 */
export function charRangeToTokens(
  sentence: Sentence,
  charStart: number,
  charEnd: number
): [number, number] | null {
  let first = -1;
  let last = -1;
  sentence.tokens.forEach((tok, i) => {
    if (tok.start < charEnd && tok.end > charStart) {
      if (first < 0) first = i;
      last = i;
    }
  });
  return first < 0 ? null : [first, last + 1];
}
