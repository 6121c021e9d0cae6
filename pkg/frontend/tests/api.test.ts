import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, fetchImages, fetchMeta, fetchSearch } from "../src/api";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("fetches meta from the expected path", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({ dataset: "d", size: 1 }));
    vi.stubGlobal("fetch", mock);
    const meta = await fetchMeta("");
    expect(meta.dataset).toBe("d");
    expect(mock.mock.calls[0][0]).toBe("/api/meta");
  });

  it("propagates server error messages as ApiError", async () => {
    const mock = vi
      .fn()
      .mockImplementation(async () =>
        jsonResponse({ error: "query text must be non-empty" }, 400),
      );
    vi.stubGlobal("fetch", mock);
    await expect(fetchSearch("", "", "baseline", 10)).rejects.toThrowError(ApiError);
    await expect(fetchSearch("", "", "baseline", 10)).rejects.toThrow(/non-empty/);
  });

  it("falls back to the status code for non-JSON error bodies", async () => {
    const mock = vi.fn().mockResolvedValue(new Response("boom", { status: 500 }));
    vi.stubGlobal("fetch", mock);
    await expect(fetchMeta("")).rejects.toThrow(/HTTP 500/);
  });

  it("passes the abort signal through to fetch", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse({ count: 0, images: [] }));
    vi.stubGlobal("fetch", mock);
    const controller = new AbortController();
    await fetchImages("", { words: ["dog"], ranges: {} }, controller.signal);
    expect(mock.mock.calls[0][1].signal).toBe(controller.signal);
    expect(mock.mock.calls[0][0]).toBe("/api/images?words=dog");
  });
});
