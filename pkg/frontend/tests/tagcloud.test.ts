import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AppController } from "../src/controller.js";
import {
  MAX_FONT_PX,
  MIN_FONT_PX,
  buildTagCloud,
  fontSizeFor,
  renderTagCloud,
} from "../src/tagcloud.js";
import type { InterestEntry } from "../src/types.js";
import { MockServer } from "./mockserver.js";

function entry(keyword: string, weight: number): InterestEntry {
  return {
    keyword,
    weight,
    tier: weight >= 0.6 ? "High" : weight >= 0.3 ? "Mid" : "Low",
    origin: "manual",
    visibility: "public",
    last_touched: "2026-08-01T12:00:00+00:00",
  };
}

describe("font sizing", () => {
  it("maps [0,1] linearly onto the size range", () => {
    expect(fontSizeFor(0)).toBe(MIN_FONT_PX);
    expect(fontSizeFor(1)).toBe(MAX_FONT_PX);
    expect(fontSizeFor(0.5)).toBe((MIN_FONT_PX + MAX_FONT_PX) / 2);
  });

  it("is monotone in weight", () => {
    for (let i = 0; i < 100; i++) {
      const a = Math.random();
      const b = Math.random();
      const [lo, hi] = a <= b ? [a, b] : [b, a];
      expect(fontSizeFor(lo)).toBeLessThanOrEqual(fontSizeFor(hi));
    }
  });

  it("clamps out-of-range weights", () => {
    expect(fontSizeFor(-1)).toBe(MIN_FONT_PX);
    expect(fontSizeFor(2)).toBe(MAX_FONT_PX);
  });
});

describe("cloud model", () => {
  it("orders entries by weight then keyword", () => {
    const model = buildTagCloud([entry("zeta", 0.5), entry("alpha", 0.5), entry("big", 0.9)]);
    expect(model.entries.map((e) => e.keyword)).toEqual(["big", "alpha", "zeta"]);
  });

  it("renders a slider and a removal control per keyword", () => {
    const html = renderTagCloud(buildTagCloud([entry("cricket", 0.8)]));
    expect(html).toContain('data-keyword="cricket"');
    expect(html).toContain("tag-slider");
    expect(html).toContain("tag-remove");
    expect(html).toContain("font-size:34.4px"); // 12 + 28*0.8
  });

  it("escapes markup in keywords", () => {
    const html = renderTagCloud(buildTagCloud([entry('<b>"x"&y', 0.5)]));
    expect(html).not.toContain("<b>");
    expect(html).toContain("&lt;b&gt;");
  });
});

describe("slider writes", () => {
  async function session() {
    const server = new MockServer();
    const api = new ApiClient(server.transport());
    const app = new AppController(api);
    await app.signUp("reader@example.net");
    await app.addManualInterest("cricket", 0.5);
    return { server, api, app };
  }

  it("failed PUT reverts to the last acknowledged weight and raises a toast", async () => {
    const { server, app } = await session();
    server.failNextPut = true;
    await app.setInterestWeight("cricket", 0.9);
    const shown = app.state.tagCloud.entries.find((e) => e.keyword === "cricket");
    expect(shown?.weight).toBe(0.5); // reverted, not 0.9
    expect(server.weights.get("cricket")).toBe(0.5);
    expect(app.state.toasts.some((t) => t.includes("cricket"))).toBe(true);
  });

  it("keeps one PUT in flight per keyword and coalesces the newest release", async () => {
    const { server, api, app } = await session();
    let release: () => void = () => {};
    server.putDelay = new Promise((resolve) => {
      release = resolve;
    });
    const first = app.setInterestWeight("cricket", 0.6);
    const second = app.setInterestWeight("cricket", 0.7); // queued while in flight
    const third = app.setInterestWeight("cricket", 0.8); // replaces the queued value
    server.putDelay = null;
    release();
    await Promise.all([first, second, third]);

    const puts = api.calls().filter((c) => c.method === "PUT");
    expect(puts.length).toBe(3); // add + first release + coalesced follow-up
    expect((puts[puts.length - 1]?.body as { weight: number }).weight).toBe(0.8);
    expect(server.weights.get("cricket")).toBe(0.8);
  });

  it("removal deletes server-side and drops the tag after the ack", async () => {
    const { server, app } = await session();
    await app.removeInterest("cricket");
    expect(server.weights.has("cricket")).toBe(false);
    expect(app.state.tagCloud.entries).toEqual([]);
  });
});
