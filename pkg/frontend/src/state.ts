/** Client-side view state and request building.
 *
 * The word-count limit is enforced here, before any request is sent, with
 * exactly the server's rule (at most MAX_WORDS whole words).
 */

import type { Method } from "./types";

export const MAX_WORDS = 6;

export interface SliderRange {
  /** Unset sides are simply not sent; the server treats them as unbounded. */
  min?: number;
  max?: number;
}

export interface BrowseFilter {
  words: string[];
  ranges: Record<string, SliderRange>;
}

export interface ConsoleState {
  query: string;
  methods: Method[];
  targetId: string | null;
  limit: number;
}

/** Split free text into whole-word search terms (comma or whitespace separated). */
export function parseWords(input: string): string[] {
  return input
    .split(/[\s,]+/)
    .map((w) => w.trim().toLowerCase())
    .filter((w) => w.length > 0);
}

/** Null when the filter is sendable, otherwise a user-facing message. */
export function validateFilter(filter: BrowseFilter): string | null {
  if (filter.words.length > MAX_WORDS) {
    return `at most ${MAX_WORDS} search words are allowed (got ${filter.words.length})`;
  }
  for (const [name, range] of Object.entries(filter.ranges)) {
    if (range.min !== undefined && range.max !== undefined && range.min > range.max) {
      return `inverted range for ${name}: ${range.min} > ${range.max}`;
    }
  }
  return null;
}

/** Query string for GET /api/images; ranges become {score}_min / {score}_max. */
export function buildBrowseQuery(filter: BrowseFilter): URLSearchParams {
  const params = new URLSearchParams();
  if (filter.words.length > 0) {
    params.set("words", filter.words.join(" "));
  }
  for (const name of Object.keys(filter.ranges).sort()) {
    const range = filter.ranges[name];
    if (range.min !== undefined) params.set(`${name}_min`, String(range.min));
    if (range.max !== undefined) params.set(`${name}_max`, String(range.max));
  }
  return params;
}

/** Query string for GET /api/search. */
export function buildSearchQuery(query: string, method: Method, limit: number): URLSearchParams {
  const params = new URLSearchParams();
  params.set("q", query);
  params.set("method", method);
  params.set("limit", String(limit));
  return params;
}

export function emptyFilter(): BrowseFilter {
  return { words: [], ranges: {} };
}
