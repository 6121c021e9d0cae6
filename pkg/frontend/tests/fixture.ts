/** A miniature in-memory stand-in for the /api/images endpoint.
 *
 * Implements exactly the documented server semantics: every search word must
 * appear as a whole token of some description of the image, AND every named
 * score must lie inside its [min, max] range.  Used to check that the UI's
 * query building plus faithful rendering reproduces server-side filtering.
 */

import type { BrowseImage, BrowseResponse } from "../src/types";

export interface FixtureImage extends BrowseImage {
  tokens: string[];
}

export const FIXTURE_IMAGES: FixtureImage[] = [
  {
    id: "img000",
    reference: "a dog runs across the park",
    tokens: ["dog", "runs", "across", "the", "park", "grass"],
    scores: { specificity: 0.91, memorability: 0.4, mean_sentence_length: 6 },
  },
  {
    id: "img001",
    reference: "a dog sleeps on the couch",
    tokens: ["dog", "sleeps", "couch", "the", "lazy"],
    scores: { specificity: 0.72, memorability: 0.8, mean_sentence_length: 5 },
  },
  {
    id: "img002",
    reference: "woman walking a dog",
    tokens: ["woman", "walking", "dog", "leash"],
    scores: { specificity: 0.55, memorability: 0.65, mean_sentence_length: 4 },
  },
  {
    id: "img003",
    reference: "a crowded market street",
    tokens: ["crowded", "market", "street", "people", "stalls"],
    scores: { specificity: 0.18, memorability: 0.3, mean_sentence_length: 7 },
  },
  {
    id: "img004",
    reference: "sunset over calm water",
    tokens: ["sunset", "over", "calm", "water", "orange"],
    scores: { specificity: 0.34, memorability: 0.2, mean_sentence_length: 5 },
  },
  {
    id: "img005",
    reference: "woman reading in a cafe",
    tokens: ["woman", "reading", "cafe", "coffee", "book"],
    scores: { specificity: 0.63, memorability: 0.55, mean_sentence_length: 6 },
  },
];

const SCORE_NAMES = new Set(["specificity", "memorability", "mean_sentence_length"]);
const MAX_WORDS = 6;

export class FixtureError extends Error {
  readonly status = 400;
}

/** Apply the documented filter semantics to the fixture dataset. */
export function fixtureBrowse(params: URLSearchParams): BrowseResponse {
  const words = (params.get("words") ?? "")
    .split(/[\s,]+/)
    .filter((w) => w.length > 0)
    .map((w) => w.toLowerCase());
  if (words.length > MAX_WORDS) {
    throw new FixtureError(`at most ${MAX_WORDS} search words are allowed`);
  }
  const ranges = new Map<string, { min: number; max: number }>();
  for (const [key, raw] of params.entries()) {
    if (key === "words") continue;
    const isMin = key.endsWith("_min");
    const isMax = key.endsWith("_max");
    if (!isMin && !isMax) throw new FixtureError(`unknown parameter ${key}`);
    const name = key.slice(0, -4);
    if (!SCORE_NAMES.has(name)) throw new FixtureError(`unknown score ${name}`);
    const value = Number(raw);
    if (Number.isNaN(value)) throw new FixtureError(`parameter ${key} must be a number`);
    const range = ranges.get(name) ?? { min: -Infinity, max: Infinity };
    if (isMin) range.min = value;
    else range.max = value;
    ranges.set(name, range);
  }
  for (const [name, range] of ranges) {
    if (range.min > range.max) throw new FixtureError(`inverted range for ${name}`);
  }
  const images = FIXTURE_IMAGES.filter((image) => {
    if (!words.every((w) => image.tokens.includes(w))) return false;
    for (const [name, range] of ranges) {
      const value = image.scores[name];
      if (value === undefined || value < range.min || value > range.max) return false;
    }
    return true;
  }).map(({ tokens: _tokens, ...image }) => image);
  return { count: images.length, images };
}
