import { describe, expect, it } from "vitest";

import { CapacityError, decodeBiohd, encodeBio, encodeBiohd } from "../src/tags";
import { MentionT } from "../src/types";

const m = (id: string, label: string, ...fragments: Array<[number, number]>): MentionT => ({
  id,
  label,
  fragments,
});

describe("encodeBio", () => {
  it("tags a flat mention", () => {
    expect(encodeBio([m("T1", "Drug", [0, 1])], 3)).toEqual(["B-Drug", "O", "O"]);
  });

  it("rejects discontinuous mentions", () => {
    expect(() => encodeBio([m("T1", "ADE", [0, 1], [2, 3])], 4)).toThrow(CapacityError);
  });

  it("rejects overlaps", () => {
    expect(() => encodeBio([m("T1", "A", [0, 3]), m("T2", "A", [2, 4])], 5)).toThrow(CapacityError);
  });
});

describe("encodeBiohd", () => {
  it("shared head becomes H, unshared discontinuous parts D", () => {
    const tags = encodeBiohd(
      [m("T1", "ADE", [0, 2], [4, 5]), m("T2", "ADE", [3, 4], [4, 5])],
      5
    );
    expect(tags).toEqual(["DB-ADE", "DI-ADE", "O", "DB-ADE", "HB-ADE"]);
  });

  it("flat unshared mentions stay plain BIO", () => {
    expect(encodeBiohd([m("T1", "Drug", [1, 3])], 4)).toEqual(["O", "B-Drug", "I-Drug", "O"]);
  });

  it("rejects cross-label sharing", () => {
    expect(() =>
      encodeBiohd([m("T1", "A", [0, 1], [2, 3]), m("T2", "B", [4, 5], [2, 3])], 6)
    ).toThrow(/across labels/);
  });

  it("rejects partial overlap", () => {
    expect(() => encodeBiohd([m("T1", "A", [0, 3]), m("T2", "A", [2, 4], [6, 7])], 8)).toThrow(
      /overlap/
    );
  });

  it("rejects sets the pairing rule cannot reconstruct", () => {
    expect(() => encodeBiohd([m("T1", "A", [0, 1], [2, 3], [4, 5])], 6)).toThrow(
      /not representable/
    );
  });
});

describe("decodeBiohd", () => {
  it("round-trips the shared-head case", () => {
    const tags = ["DB-ADE", "DI-ADE", "O", "DB-ADE", "HB-ADE"];
    const got = decodeBiohd(tags).map((x) => `${x.label}:${JSON.stringify(x.fragments)}`);
    expect(got.sort()).toEqual([
      "ADE:[[0,2],[4,5]]",
      "ADE:[[3,4],[4,5]]",
    ]);
  });

  it("pairs lone D and H of the same label", () => {
    expect(decodeBiohd(["HB-A", "O", "DB-A"])).toEqual([
      { label: "A", fragments: [[0, 1], [2, 3]] },
    ]);
  });

  it("is total on junk", () => {
    expect(decodeBiohd(["wat", "", "B-", "-X"])).toEqual([]);
  });
});
