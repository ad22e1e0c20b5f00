/**
 * BIO / BIOHD tag encoding with a decode-based representability check.
 *
 * Matches the training engine's scheme semantics exactly: a span shared
 * (same label, identical boundaries) by several mentions becomes an H
 * segment, a span owned by one discontinuous mention a D segment, flat
 * unshared mentions plain B/I.  Decoding pairs each D segment with the
 * nearest H segment of its label (tie: the following one); D segments
 * without an H partner join pairwise in textual order; leftover segments
 * stand alone.  Encoding re-decodes its own output and throws when the
 * mention set cannot be reconstructed, so everything accepted round-trips.
 */

import { Fragment, MentionT } from "./types";

export class CapacityError extends Error {}

type Kind = "flat" | "d" | "h";

interface Segment {
  kind: Kind;
  label: string;
  start: number;
  end: number;
}

const PREFIX_KIND: Record<string, Kind> = {
  B: "flat", I: "flat", DB: "d", DI: "d", HB: "h", HI: "h",
};
const KIND_PREFIX: Record<Kind, [string, string]> = {
  flat: ["B", "I"], d: ["DB", "DI"], h: ["HB", "HI"],
};

function parseTag(tag: string): { prefix: string; label: string } | null {
  if (!tag || tag === "O") return null;
  const dash = tag.indexOf("-");
  if (dash <= 0) return null;
  const prefix = tag.slice(0, dash);
  const label = tag.slice(dash + 1);
  if (!(prefix in PREFIX_KIND) || !label) return null;
  return { prefix, label };
}

function scanSegments(tags: string[]): Segment[] {
  const segments: Segment[] = [];
  let current: Segment | null = null;
  tags.forEach((tag, i) => {
    const parsed = parseTag(tag);
    if (!parsed) {
      current = null;
      return;
    }
    const kind = PREFIX_KIND[parsed.prefix];
    const continuing = ["I", "DI", "HI"].includes(parsed.prefix);
    if (continuing && current && current.kind === kind && current.label === parsed.label) {
      current.end = i + 1;
      return;
    }
    current = { kind, label: parsed.label, start: i, end: i + 1 };
    segments.push(current);
  });
  return segments;
}

function gap(a: [number, number], b: [number, number]): number {
  return b[0] >= a[1] ? b[0] - a[1] : a[0] - b[1];
}

function sortFragments(frags: Fragment[]): Fragment[] {
  return [...frags].sort((x, y) => x[0] - y[0] || x[1] - y[1]);
}

function mentionKey(m: { label: string; fragments: Fragment[] }): string {
  return `${m.label}|${m.fragments.map(([s, e]) => `${s}-${e}`).join(",")}`;
}

export function decodeBiohd(tags: string[]): Array<{ label: string; fragments: Fragment[] }> {
  const segments = scanSegments(tags);
  const labels: string[] = [];
  for (const seg of segments) if (!labels.includes(seg.label)) labels.push(seg.label);

  const mentions: Array<{ label: string; fragments: Fragment[] }> = [];
  for (const label of labels) {
    const ds = segments.filter((s) => s.label === label && s.kind === "d");
    const hs = segments.filter((s) => s.label === label && s.kind === "h");
    const flats = segments.filter((s) => s.label === label && s.kind === "flat");
    for (const f of flats) mentions.push({ label, fragments: [[f.start, f.end]] });
    if (hs.length) {
      const partnered = new Set<number>();
      for (const d of ds) {
        let best = 0;
        let bestKey: [number, number] | null = null;
        hs.forEach((h, j) => {
          const key: [number, number] = [
            gap([d.start, d.end], [h.start, h.end]),
            h.start > d.start ? 0 : 1,
          ];
          if (!bestKey || key[0] < bestKey[0] || (key[0] === bestKey[0] && key[1] < bestKey[1])) {
            bestKey = key;
            best = j;
          }
        });
        partnered.add(best);
        mentions.push({
          label,
          fragments: sortFragments([[d.start, d.end], [hs[best].start, hs[best].end]]),
        });
      }
      hs.forEach((h, j) => {
        if (!partnered.has(j)) mentions.push({ label, fragments: [[h.start, h.end]] });
      });
    } else {
      for (let i = 0; i < ds.length; i += 2) {
        if (i + 1 < ds.length) {
          mentions.push({
            label,
            fragments: sortFragments([
              [ds[i].start, ds[i].end],
              [ds[i + 1].start, ds[i + 1].end],
            ]),
          });
        } else {
          mentions.push({ label, fragments: [[ds[i].start, ds[i].end]] });
        }
      }
    }
  }
  return mentions;
}

/** Encode under BIOHD; throws CapacityError when the set is not representable. */
export function encodeBiohd(mentions: MentionT[], length: number): string[] {
  const owners = new Map<string, { frag: Fragment; label: string; ids: string[]; disc: boolean[] }>();
  for (const m of mentions) {
    for (const frag of m.fragments) {
      const key = `${frag[0]}:${frag[1]}`;
      let entry = owners.get(key);
      if (!entry) {
        entry = { frag, label: m.label, ids: [], disc: [] };
        owners.set(key, entry);
      }
      if (entry.label !== m.label) {
        throw new CapacityError(
          `span ${frag[0]}-${frag[1]} is shared across labels (${entry.label} vs ${m.label}; ${m.id})`
        );
      }
      entry.ids.push(m.id);
      entry.disc.push(m.fragments.length > 1);
    }
  }
  const frags = [...owners.values()].sort((a, b) => a.frag[0] - b.frag[0]);
  for (let i = 1; i < frags.length; i++) {
    if (frags[i].frag[0] < frags[i - 1].frag[1]) {
      throw new CapacityError(
        `fragments ${frags[i - 1].frag} (${frags[i - 1].ids}) and ${frags[i].frag} ` +
          `(${frags[i].ids}) overlap without identical spans`
      );
    }
  }

  const tags = new Array<string>(length).fill("O");
  for (const { frag, label, ids, disc } of frags) {
    const [s, e] = frag;
    if (s < 0 || e > length) {
      throw new CapacityError(`fragment ${s}-${e} (${ids}) outside sentence of length ${length}`);
    }
    const kind: Kind = ids.length >= 2 ? "h" : disc[0] ? "d" : "flat";
    const [begin, inside] = KIND_PREFIX[kind];
    tags[s] = `${begin}-${label}`;
    for (let t = s + 1; t < e; t++) tags[t] = `${inside}-${label}`;
  }

  const want = new Set(
    mentions.map((m) => mentionKey({ label: m.label, fragments: sortFragments(m.fragments) }))
  );
  const got = new Set(decodeBiohd(tags).map(mentionKey));
  if (want.size !== got.size || [...want].some((k) => !got.has(k))) {
    throw new CapacityError(
      `mention set not representable in BIOHD: ${mentions.map((m) => m.id).join(", ")}`
    );
  }
  return tags;
}

/** Plain BIO; flat, non-overlapping mentions only. */
export function encodeBio(mentions: MentionT[], length: number): string[] {
  const tags = new Array<string>(length).fill("O");
  const taken = new Map<number, string>();
  for (const m of [...mentions].sort((a, b) => a.fragments[0][0] - b.fragments[0][0])) {
    if (m.fragments.length > 1) {
      throw new CapacityError(`BIO cannot encode discontinuous mention ${m.id}`);
    }
    const [s, e] = m.fragments[0];
    for (let t = s; t < e; t++) {
      if (taken.has(t)) {
        throw new CapacityError(`BIO cannot encode overlapping mentions ${taken.get(t)} and ${m.id}`);
      }
      taken.set(t, m.id);
    }
    tags[s] = `B-${m.label}`;
    for (let t = s + 1; t < e; t++) tags[t] = `I-${m.label}`;
  }
  return tags;
}

export function encodeTags(mentions: MentionT[], length: number, scheme: string): string[] {
  if (scheme === "bio") return encodeBio(mentions, length);
  if (scheme === "biohd") return encodeBiohd(mentions, length);
  throw new CapacityError(`unknown scheme ${scheme}`);
}
