import { describe, expect, it } from "vitest";

import { buildBrowseQuery, validateFilter, type BrowseFilter } from "../src/state";
import { gridOrder } from "../src/views";
import { FIXTURE_IMAGES, FixtureError, fixtureBrowse } from "./fixture";

/** Full client loop against the fixture server: UI filter state -> query
 * string -> documented server AND semantics -> displayed grid. */
function roundTrip(filter: BrowseFilter): string[] {
  expect(validateFilter(filter)).toBeNull();
  const response = fixtureBrowse(buildBrowseQuery(filter));
  return gridOrder(response);
}

function directFilter(
  words: string[],
  predicate: (scores: Record<string, number>) => boolean,
): string[] {
  return FIXTURE_IMAGES.filter(
    (image) => words.every((w) => image.tokens.includes(w)) && predicate(image.scores),
  ).map((image) => image.id);
}

describe("slider filtering reproduces server-side AND semantics", () => {
  it("empty filter returns the whole dataset", () => {
    expect(roundTrip({ words: [], ranges: {} })).toEqual(FIXTURE_IMAGES.map((i) => i.id));
  });

  it("word search is whole-word AND", () => {
    expect(roundTrip({ words: ["dog", "woman"], ranges: {} })).toEqual(
      directFilter(["dog", "woman"], () => true),
    );
    // "wom" is not a whole word of any description
    expect(roundTrip({ words: ["wom"], ranges: {} })).toEqual([]);
  });

  it("two-sided range", () => {
    const filter = { words: [], ranges: { specificity: { min: 0.3, max: 0.8 } } };
    expect(roundTrip(filter)).toEqual(
      directFilter([], (s) => s.specificity >= 0.3 && s.specificity <= 0.8),
    );
  });

  it("one-sided ranges", () => {
    expect(roundTrip({ words: [], ranges: { memorability: { min: 0.5 } } })).toEqual(
      directFilter([], (s) => s.memorability >= 0.5),
    );
    expect(roundTrip({ words: [], ranges: { mean_sentence_length: { max: 5 } } })).toEqual(
      directFilter([], (s) => s.mean_sentence_length <= 5),
    );
  });

  it("words and several ranges combine with AND", () => {
    const filter: BrowseFilter = {
      words: ["dog"],
      ranges: { specificity: { min: 0.5 }, memorability: { min: 0.5, max: 0.9 } },
    };
    expect(roundTrip(filter)).toEqual(
      directFilter(
        ["dog"],
        (s) => s.specificity >= 0.5 && s.memorability >= 0.5 && s.memorability <= 0.9,
      ),
    );
  });

  it("a range narrowed to nothing yields zero results, not an error", () => {
    const filter = { words: [], ranges: { specificity: { min: 0.95, max: 1.0 } } };
    expect(roundTrip(filter)).toEqual([]);
  });

  it("client and server enforce the same word limit", () => {
    const seven = Array.from({ length: 7 }, (_, i) => `w${i}`);
    // client side
    expect(validateFilter({ words: seven, ranges: {} })).toMatch(/at most 6/);
    // server side (fixture mirrors the real endpoint's rule)
    const params = new URLSearchParams();
    params.set("words", seven.join(" "));
    expect(() => fixtureBrowse(params)).toThrow(FixtureError);
  });

  it("server rejects inverted ranges like the client does", () => {
    const params = new URLSearchParams("specificity_min=0.9&specificity_max=0.1");
    expect(() => fixtureBrowse(params)).toThrow(/inverted/);
    expect(
      validateFilter({ words: [], ranges: { specificity: { min: 0.9, max: 0.1 } } }),
    ).toMatch(/inverted/);
  });
});
