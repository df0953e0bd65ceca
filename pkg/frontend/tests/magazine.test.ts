import { describe, expect, it } from "vitest";

import { SLOTS_PER_FACE, SPREAD_SIZE, renderOnboarding, renderSpread, snippet, toSpread } from "../src/magazine.js";
import { ACCEPT_WEIGHT, renderProgress, renderRecommendations, renderSaved } from "../src/panels.js";
import type { MagazinePageResponse, MagazineSlot } from "../src/types.js";
import { fixtureContent } from "./mockserver.js";

function slots(n: number): MagazineSlot[] {
  return Array.from({ length: n }, (_, i) => ({
    content: fixtureContent(`c${i}`, `Story ${i}`, ["cricket"]),
    matched_keywords: ["cricket"],
    score: 1 - i * 0.05,
  }));
}

function page(slotCount: number, pageNumber = 1, totalPages = 3): MagazinePageResponse {
  return {
    user_id: "u-test",
    cold_start: false,
    page_number: pageNumber,
    total_pages: totalPages,
    total_items: slotCount,
    generated_at: "2026-08-01T12:00:00+00:00",
    slots: slots(slotCount),
  };
}

describe("spread layout", () => {
  it("splits one server page into two faces", () => {
    const spread = toSpread(page(SPREAD_SIZE));
    expect(spread.left.length).toBe(SLOTS_PER_FACE);
    expect(spread.right.length).toBe(SLOTS_PER_FACE);
    expect(spread.left[0]?.content.id).toBe("c0");
    expect(spread.right[0]?.content.id).toBe(`c${SLOTS_PER_FACE}`);
  });

  it("handles a short final page", () => {
    const spread = toSpread(page(2, 3, 3));
    expect(spread.left.length).toBe(2);
    expect(spread.right.length).toBe(0);
    expect(spread.hasNext).toBe(false);
    expect(spread.hasPrevious).toBe(true);
  });

  it("first spread has no previous", () => {
    const spread = toSpread(page(SPREAD_SIZE, 1, 3));
    expect(spread.hasPrevious).toBe(false);
    expect(spread.hasNext).toBe(true);
  });
});

describe("spread rendering", () => {
  it("shows title, snippet, first image, and all actions per slot", () => {
    const html = renderSpread(toSpread(page(1)), new Map(), new Set());
    expect(html).toContain("Story 0");
    expect(html).toContain("http://img.example/c0.jpg");
    expect(html).toContain('data-action="open"');
    expect(html).toContain('data-action="save"');
    expect(html).toContain('data-action="rate"');
    expect(html).toContain('data-channel="twitter"');
    expect(html).toContain('data-channel="mail"');
    expect(html).toContain('data-action="page-next"');
  });

  it("marks saved items and lights rated stars", () => {
    const html = renderSpread(toSpread(page(1)), new Map([["c0", 3]]), new Set(["c0"]));
    expect(html).toContain(">saved<");
    expect((html.match(/star lit/g) ?? []).length).toBe(3);
  });

  it("truncates long snippets with an ellipsis", () => {
    expect(snippet("y".repeat(500))).toHaveLength(180);
    expect(snippet("y".repeat(500)).endsWith("…")).toBe(true);
    expect(snippet("short")).toBe("short");
  });

  it("onboarding offers profile import and manual interests", () => {
    const html = renderOnboarding();
    expect(html).toContain('data-action="import-profile"');
    expect(html).toContain('data-action="add-interest"');
  });
});

describe("panels", () => {
  it("accept weight is the High-tier floor", () => {
    expect(ACCEPT_WEIGHT).toBe(0.6);
  });

  it("renders recommendation rows with accept buttons", () => {
    const html = renderRecommendations([
      { keyword: "sachin tendulkar", score: 0.6, reason: "similar_user", contributing_user: "u2" },
      { keyword: "movies", score: 0.4, reason: "own_mid_tier", contributing_user: null },
    ]);
    expect(html).toContain('data-action="accept-recommendation"');
    expect(html).toContain("sachin tendulkar");
    expect(html).toContain("readers like you");
    expect(html).toContain("rising interest");
  });

  it("saved panel offers both sort orders", () => {
    const html = renderSaved([], "saved_at");
    expect(html).toContain('data-sort="publish_date"');
    expect(html).toContain('data-sort="saved_at"');
  });

  it("progress bar shows the server percentage verbatim", () => {
    const html = renderProgress(63);
    expect(html).toContain("width:63%");
    expect(html).toContain("63%</span>");
    expect(html).toContain('aria-valuenow="63"');
  });
});
