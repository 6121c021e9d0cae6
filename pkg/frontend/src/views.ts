/** View-model builders and HTML renderers.
 *
 * Renderers iterate API response arrays exactly as received; nothing here
 * sorts, filters or re-ranks, so the displayed order is always the server's.
 */

import type { BrowseImage, BrowseResponse, Method, SearchResponse } from "./types";

export interface ConsoleColumn {
  method: Method;
  /** Results in the exact order of the API response. */
  results: SearchResponse["results"];
  targetRank: number | null;
  error: string | null;
}

export const METHOD_LABELS: Record<Method, string> = {
  baseline: "Baseline",
  gt: "GT-Spec",
  pred: "P-Spec",
};

export function buildConsoleColumn(
  method: Method,
  response: SearchResponse | null,
  targetId: string | null,
  error: string | null = null,
): ConsoleColumn {
  if (error !== null || response === null) {
    return { method, results: [], targetRank: null, error };
  }
  let targetRank: number | null = null;
  if (targetId) {
    for (const row of response.results) {
      if (row.image_id === targetId) {
        targetRank = row.rank;
        break;
      }
    }
  }
  return { method, results: response.results, targetRank, error: null };
}

/** Ordered image ids of a column, exactly as displayed. */
export function displayedOrder(column: ConsoleColumn): string[] {
  return column.results.map((row) => row.image_id);
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderConsoleColumn(column: ConsoleColumn, targetId: string | null): string {
  const title = METHOD_LABELS[column.method];
  if (column.error !== null) {
    return `<div class="column" data-method="${column.method}">
      <h3>${title}</h3><p class="error">${escapeHtml(column.error)}</p></div>`;
  }
  const targetNote =
    targetId && column.targetRank !== null
      ? `<p class="target">target <code>${escapeHtml(targetId)}</code> at rank ${column.targetRank}</p>`
      : targetId
        ? `<p class="target">target <code>${escapeHtml(targetId)}</code> not in the top ${column.results.length}</p>`
        : "";
  const rows = column.results
    .map((row) => {
      const highlight = targetId !== null && row.image_id === targetId ? ' class="hit"' : "";
      return `<tr${highlight}><td>${row.rank}</td><td>${escapeHtml(row.image_id)}</td>` +
        `<td>${row.relevance.toFixed(4)}</td><td>${row.specificity.toFixed(3)}</td></tr>`;
    })
    .join("");
  return `<div class="column" data-method="${column.method}">
    <h3>${title}</h3>${targetNote}
    <table><thead><tr><th>#</th><th>image</th><th>relevance</th><th>specificity</th></tr></thead>
    <tbody>${rows}</tbody></table></div>`;
}

export interface Page<T> {
  items: T[];
  page: number;
  pageCount: number;
}

/** Window ``page`` (0-based, clamped) of ``items`` without reordering them. */
export function paginate<T>(items: T[], page: number, pageSize: number): Page<T> {
  const pageCount = Math.max(1, Math.ceil(items.length / pageSize));
  const clamped = Math.min(Math.max(page, 0), pageCount - 1);
  return {
    items: items.slice(clamped * pageSize, (clamped + 1) * pageSize),
    page: clamped,
    pageCount,
  };
}

export function renderImageCard(image: BrowseImage): string {
  const spec = image.scores["specificity"];
  const badge = spec === undefined ? "" : `<span class="badge">${spec.toFixed(3)}</span>`;
  return `<div class="card" data-id="${escapeHtml(image.id)}">
    ${badge}<h4>${escapeHtml(image.id)}</h4>
    <p>${escapeHtml(image.reference)}</p></div>`;
}

export function renderGrid(response: BrowseResponse, page = 0, pageSize = 24): string {
  const window = paginate(response.images, page, pageSize);
  const cards = window.items.map(renderImageCard).join("");
  const pager =
    window.pageCount > 1
      ? `<div class="pager">
          <button data-page="${window.page - 1}" ${window.page === 0 ? "disabled" : ""}>prev</button>
          <span>page ${window.page + 1} / ${window.pageCount}</span>
          <button data-page="${window.page + 1}" ${window.page === window.pageCount - 1 ? "disabled" : ""}>next</button>
        </div>`
      : "";
  return `<p class="count">${response.count} matching image${response.count === 1 ? "" : "s"}</p>
    <div class="grid">${cards}</div>${pager}`;
}

/** Ordered image ids of a browse grid, exactly as displayed. */
export function gridOrder(response: BrowseResponse): string[] {
  return response.images.map((image) => image.id);
}
