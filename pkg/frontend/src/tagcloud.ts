// Tag cloud: font size is a linear map of the server-acknowledged weight,
// so size ordering always equals weight ordering. Sliders write weights
// back with one in-flight PUT per keyword; the newest release while a PUT
// is pending is coalesced into a follow-up, and a failed PUT reverts the
// slider to the last acknowledged weight.

import type { ApiClient } from "./api.js";
import type { InterestEntry } from "./types.js";

export const MIN_FONT_PX = 12;
export const MAX_FONT_PX = 40;

export function fontSizeFor(weight: number): number {
  const clamped = Math.min(1, Math.max(0, weight));
  return MIN_FONT_PX + (MAX_FONT_PX - MIN_FONT_PX) * clamped;
}

export interface TagCloudEntry {
  keyword: string;
  /** last server-acknowledged weight; the only thing rendering trusts */
  weight: number;
  tier: string;
  fontPx: number;
  /** transient slider position while the user drags; null when idle */
  sliderPosition: number | null;
}

export interface TagCloudModel {
  entries: TagCloudEntry[];
}

export function buildTagCloud(interests: InterestEntry[]): TagCloudModel {
  const entries = interests
    .map((entry) => ({
      keyword: entry.keyword,
      weight: entry.weight,
      tier: entry.tier,
      fontPx: fontSizeFor(entry.weight),
      sliderPosition: null,
    }))
    .sort((a, b) => b.weight - a.weight || a.keyword.localeCompare(b.keyword));
  return { entries };
}

export function renderTagCloud(model: TagCloudModel): string {
  if (model.entries.length === 0) {
    return `<p class="empty">No interests yet. Import a profile or add keywords.</p>`;
  }
  const spans = model.entries
    .map(
      (entry) => `
  <span class="tag" data-keyword="${escapeHtml(entry.keyword)}">
    <a class="tag-word tier-${entry.tier.toLowerCase()}" style="font-size:${entry.fontPx.toFixed(1)}px">${escapeHtml(entry.keyword)}</a>
    <input class="tag-slider" type="range" min="0" max="1" step="0.01"
           value="${(entry.sliderPosition ?? entry.weight).toFixed(2)}"
           data-keyword="${escapeHtml(entry.keyword)}">
    <button class="tag-remove" data-keyword="${escapeHtml(entry.keyword)}" title="remove">&times;</button>
  </span>`,
    )
    .join("\n");
  return `<div class="tag-cloud">${spans}\n</div>`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

interface PendingPut {
  inFlight: boolean;
  queued: number | null;
}

/** Serializes interest writes: one live PUT per keyword, last value wins. */
export class InterestWriter {
  private pending = new Map<string, PendingPut>();

  constructor(
    private api: ApiClient,
    private userId: string,
    private onAck: (entry: InterestEntry) => void,
    private onError: (keyword: string, message: string) => void,
  ) {}

  hasPending(keyword: string): boolean {
    return this.pending.get(keyword)?.inFlight ?? false;
  }

  async setWeight(keyword: string, weight: number): Promise<void> {
    const state = this.pending.get(keyword);
    if (state?.inFlight) {
      state.queued = weight; // coalesce: newest release wins
      return;
    }
    this.pending.set(keyword, { inFlight: true, queued: null });
    try {
      const acked = await this.api.putInterest(this.userId, keyword, weight);
      this.onAck(acked);
    } catch (error) {
      this.onError(keyword, error instanceof Error ? error.message : String(error));
    } finally {
      const after = this.pending.get(keyword);
      this.pending.set(keyword, { inFlight: false, queued: null });
      if (after?.queued !== null && after?.queued !== undefined) {
        await this.setWeight(keyword, after.queued);
      }
    }
  }
}
