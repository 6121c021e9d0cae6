/** Application wiring: tabs, the dataset browser and the query console.
 *
 * All data work happens on the server; this file only reads inputs, issues
 * requests (cancelling stale ones) and injects rendered HTML.
 */

import { ApiError, fetchImages, fetchMeta, fetchSearch } from "./api";
import {
  emptyFilter,
  parseWords,
  validateFilter,
  type BrowseFilter,
  type SliderRange,
} from "./state";
import type { BrowseResponse, Meta, Method, SearchResponse } from "./types";
import { buildConsoleColumn, renderConsoleColumn, renderGrid } from "./views";

const BASE = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class BrowserPanel {
  private filter: BrowseFilter = emptyFilter();
  private inflight: AbortController | null = null;
  private page = 0;
  private lastResponse: BrowseResponse | null = null;

  constructor(private meta: Meta) {}

  mount(): void {
    const sliders = el<HTMLDivElement>("sliders");
    sliders.innerHTML = this.meta.scores
      .map(
        (name) => `<div class="slider" data-score="${name}">
          <label>${name}</label>
          <input type="number" step="any" class="lo" placeholder="min">
          <input type="number" step="any" class="hi" placeholder="max">
        </div>`,
      )
      .join("");
    sliders.querySelectorAll("input").forEach((input) => {
      input.addEventListener("change", () => this.refresh());
    });
    el<HTMLInputElement>("browse-words").addEventListener("input", () => this.refresh());
    this.refresh();
  }

  private readFilter(): BrowseFilter {
    const words = parseWords(el<HTMLInputElement>("browse-words").value);
    const ranges: Record<string, SliderRange> = {};
    document.querySelectorAll<HTMLDivElement>("#sliders .slider").forEach((slider) => {
      const name = slider.dataset.score!;
      const lo = (slider.querySelector(".lo") as HTMLInputElement).value;
      const hi = (slider.querySelector(".hi") as HTMLInputElement).value;
      if (lo === "" && hi === "") return;
      const range: SliderRange = {};
      if (lo !== "") range.min = Number(lo);
      if (hi !== "") range.max = Number(hi);
      ranges[name] = range;
    });
    return { words, ranges };
  }

  private refresh(): void {
    this.filter = this.readFilter();
    const error = validateFilter(this.filter);
    const banner = el<HTMLParagraphElement>("browse-error");
    if (error) {
      // Client-side rejection: show the message, keep the previous grid.
      banner.textContent = error;
      return;
    }
    banner.textContent = "";
    this.inflight?.abort();
    this.inflight = new AbortController();
    this.page = 0;
    fetchImages(BASE, this.filter, this.inflight.signal)
      .then((response) => {
        this.lastResponse = response;
        this.renderPage();
      })
      .catch((err) => {
        if ((err as Error).name === "AbortError") return;
        banner.textContent = err instanceof ApiError ? err.message : String(err);
      });
  }

  private renderPage(): void {
    if (!this.lastResponse) return;
    const results = el<HTMLDivElement>("browse-results");
    results.innerHTML = renderGrid(this.lastResponse, this.page);
    results.querySelectorAll<HTMLButtonElement>(".pager button").forEach((button) => {
      button.addEventListener("click", () => {
        this.page = Number(button.dataset.page);
        this.renderPage();
      });
    });
  }
}

interface MethodOutcome {
  response: SearchResponse | null;
  error: string | null;
}

class ConsolePanel {
  private inflight: AbortController | null = null;
  private outcomes = new Map<Method, MethodOutcome>();

  constructor(private meta: Meta) {}

  mount(): void {
    const toggles = el<HTMLDivElement>("method-toggles");
    toggles.innerHTML = this.meta.methods
      .map(
        (method) => `<label><input type="checkbox" data-method="${method}" checked> ${method}</label>`,
      )
      .join(" ");
    el<HTMLFormElement>("console-form").addEventListener("submit", (event) => {
      event.preventDefault();
      this.run();
    });
    const query = el<HTMLInputElement>("console-query");
    const submit = el<HTMLButtonElement>("console-submit");
    const syncDisabled = () => {
      submit.disabled = query.value.trim().length === 0;
    };
    query.addEventListener("input", syncDisabled);
    syncDisabled();
    toggles.querySelectorAll("input").forEach((toggle) => {
      // Toggling a method only shows/hides its column; no refetch of others.
      toggle.addEventListener("change", () => this.renderColumns());
    });
  }

  private selectedMethods(): Method[] {
    const picked: Method[] = [];
    document
      .querySelectorAll<HTMLInputElement>("#method-toggles input:checked")
      .forEach((toggle) => picked.push(toggle.dataset.method as Method));
    return picked;
  }

  private run(): void {
    const query = el<HTMLInputElement>("console-query").value.trim();
    if (!query) return;
    const limit = Number(el<HTMLInputElement>("console-limit").value) || 10;
    this.inflight?.abort();
    this.inflight = new AbortController();
    this.outcomes.clear();
    const methods = this.selectedMethods();
    Promise.all(
      methods.map((method) =>
        fetchSearch(BASE, query, method, limit, this.inflight!.signal)
          .then((response) => this.outcomes.set(method, { response, error: null }))
          .catch((err) => {
            if ((err as Error).name !== "AbortError") {
              const message = err instanceof ApiError ? err.message : String(err);
              this.outcomes.set(method, { response: null, error: message });
            }
          }),
      ),
    ).then(() => this.renderColumns());
  }

  private renderColumns(): void {
    const targetId = el<HTMLInputElement>("console-target").value.trim() || null;
    const columns = this.selectedMethods()
      .filter((method) => this.outcomes.has(method))
      .map((method) => {
        const outcome = this.outcomes.get(method)!;
        return renderConsoleColumn(
          buildConsoleColumn(method, outcome.response, targetId, outcome.error),
          targetId,
        );
      });
    el<HTMLDivElement>("console-columns").innerHTML = columns.join("");
  }
}

async function boot(): Promise<void> {
  try {
    const meta = await fetchMeta(BASE);
    el<HTMLSpanElement>("dataset-name").textContent =
      `${meta.dataset} - ${meta.size} images, ${meta.pool_size} sentences each`;
    new BrowserPanel(meta).mount();
    new ConsolePanel(meta).mount();
    document.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
      button.addEventListener("click", () => {
        document.querySelectorAll("main > section").forEach((section) => {
          section.classList.toggle("active", section.id === button.dataset.panel);
        });
        document
          .querySelectorAll("nav button")
          .forEach((other) => other.classList.toggle("active", other === button));
      });
    });
  } catch (err) {
    document.body.innerHTML = `<p class="error">failed to reach the API: ${String(err)}</p>`;
  }
}

boot();
