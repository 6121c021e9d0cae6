/** Thin fetch client for the specsearch API.
 *
 * Every call accepts an AbortSignal so the app can cancel in-flight requests
 * when the filter or query changes.  Non-2xx responses raise ApiError with
 * the server's message, which views surface inline.
 */

import type {
  BrowseResponse,
  ImageDetail,
  Meta,
  Method,
  SearchResponse,
} from "./types";
import { buildBrowseQuery, buildSearchQuery, type BrowseFilter } from "./state";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) message = body.error;
    } catch {
      // non-JSON error body: keep the status message
    }
    throw new ApiError(response.status, message);
  }
  return (await response.json()) as T;
}

export function fetchMeta(base: string, signal?: AbortSignal): Promise<Meta> {
  return getJson<Meta>(`${base}/api/meta`, signal);
}

export function fetchSearch(
  base: string,
  query: string,
  method: Method,
  limit: number,
  signal?: AbortSignal,
): Promise<SearchResponse> {
  const params = buildSearchQuery(query, method, limit);
  return getJson<SearchResponse>(`${base}/api/search?${params.toString()}`, signal);
}

export function fetchImages(
  base: string,
  filter: BrowseFilter,
  signal?: AbortSignal,
): Promise<BrowseResponse> {
  const params = buildBrowseQuery(filter);
  const suffix = params.toString();
  return getJson<BrowseResponse>(`${base}/api/images${suffix ? "?" + suffix : ""}`, signal);
}

export function fetchImage(base: string, id: string, signal?: AbortSignal): Promise<ImageDetail> {
  return getJson<ImageDetail>(`${base}/api/image/${encodeURIComponent(id)}`, signal);
}
