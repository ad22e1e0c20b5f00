import * as fs from "fs";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { formatColumnar, parseColumnar } from "../src/columnar";
import { addSilverColumns, mednerSource, posSource } from "../src/silver";

const GOLDEN = path.join(__dirname, "golden");

function corpus() {
  return parseColumnar(fs.readFileSync(path.join(GOLDEN, "corpus.tsv"), "utf-8")).sentences;
}

describe("posSource", () => {
  it("lexicon tagger starts 'the drug' with a determiner", () => {
    expect(posSource("lexicon").tag(["the", "drug"])[0]).toBe("DET");
  });

  it("wink tagger starts 'the drug' with a determiner tag", () => {
    // golden behaviour of the third-party annotator, recorded here
    expect(posSource("wink").tag(["the", "drug"])).toEqual(["DT", "NN"]);
  });

  it("unknown source names the options", () => {
    expect(() => posSource("stanza")).toThrow(/wink|lexicon/);
  });
});

describe("mednerSource", () => {
  it("tags gazetteer entries with BIO over COND/CHEM/ANAT", () => {
    const tags = mednerSource("gazetteer").tag(["joint", "pain", "after", "aspirin"]);
    expect(tags).toEqual(["B-COND", "I-COND", "O", "B-CHEM"]);
  });
});

describe("addSilverColumns", () => {
  it("preserves token counts exactly and fills every slot", () => {
    const { sentences } = addSilverColumns(corpus(), "wink", "gazetteer");
    for (const sent of sentences) {
      expect(sent.pos).toHaveLength(sent.tokens.length);
      expect(sent.medner).toHaveLength(sent.tokens.length);
      expect(sent.pos).not.toContain("_");
      expect(sent.medner).not.toContain("_");
    }
  });

  it("records sources and versions in headers", () => {
    const { headers } = addSilverColumns(corpus(), "wink", "gazetteer");
    expect(headers.some((h) => /pos-source: wink-pos-tagger@\d/.test(h))).toBe(true);
    expect(headers.some((h) => h.includes("medner-source: builtin-gazetteer"))).toBe(true);
  });

  it("is byte-stable against the committed golden file", () => {
    const { sentences: fromGolden, headers: priorHeaders } = parseColumnar(
      fs.readFileSync(path.join(GOLDEN, "corpus.tsv"), "utf-8")
    );
    const result = addSilverColumns(fromGolden, "wink", "gazetteer");
    const text = formatColumnar(result.sentences, [...priorHeaders, ...result.headers]);
    expect(text).toBe(fs.readFileSync(path.join(GOLDEN, "corpus_silver.tsv"), "utf-8"));
  });
});
