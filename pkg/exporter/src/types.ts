export type Fragment = [number, number]; // half-open token range

export interface MentionT {
  id: string; // annotation id, e.g. "T3"
  label: string;
  fragments: Fragment[]; // sorted, non-overlapping
}

export interface StandoffAnnotation {
  id: string;
  label: string;
  charRanges: Array<[number, number]>; // semicolon-separated ranges = discontinuous
  surface: string;
}

export interface StandoffDocument {
  docId: string;
  text: string;
  annotations: StandoffAnnotation[];
}

export interface Token {
  text: string;
  start: number; // char offset into the document text
  end: number;
}

export interface Sentence {
  tokens: Token[];
}

export interface ColumnarSentence {
  provenance: string;
  tokens: string[];
  pos: string[];
  medner: string[];
  entity: string[];
}
