// Side panels: recommendations (accept promotes the keyword straight to
// the publish threshold), saved items with both sort orders, and the
// progress bar showing the server percentage verbatim.

import type { Recommendation, SavedRow } from "./types.js";
import { escapeHtml } from "./tagcloud.js";

/** Accepting a recommendation assigns this weight: the High-tier floor. */
export const ACCEPT_WEIGHT = 0.6;

export function renderRecommendations(recommendations: Recommendation[]): string {
  if (recommendations.length === 0) {
    return `<p class="empty">Nothing to recommend yet.</p>`;
  }
  const rows = recommendations
    .map(
      (rec) => `
  <li>
    <span class="rec-keyword">${escapeHtml(rec.keyword)}</span>
    <span class="rec-why">${rec.reason === "similar_user" ? "readers like you" : "rising interest"}</span>
    <button data-action="accept-recommendation" data-keyword="${escapeHtml(rec.keyword)}">add</button>
  </li>`,
    )
    .join("\n");
  return `<ul class="recommendations">${rows}\n</ul>`;
}

export function renderSaved(saved: SavedRow[], sort: "saved_at" | "publish_date"): string {
  const toggle = `
  <div class="saved-sort">
    <button data-action="saved-sort" data-sort="saved_at" ${sort === "saved_at" ? "disabled" : ""}>by save date</button>
    <button data-action="saved-sort" data-sort="publish_date" ${sort === "publish_date" ? "disabled" : ""}>by publish date</button>
  </div>`;
  if (saved.length === 0) {
    return `${toggle}<p class="empty">Nothing saved.</p>`;
  }
  const rows = saved
    .map(
      (row) => `
  <li>
    <a href="${escapeHtml(row.content.canonical_link)}" data-action="open" data-content="${row.content_id}">${escapeHtml(row.content.title)}</a>
    ${row.rating !== null ? `<span class="saved-rating">${row.rating}★</span>` : ""}
    <button data-action="unsave" data-content="${row.content_id}">remove</button>
  </li>`,
    )
    .join("\n");
  return `${toggle}<ul class="saved-list">${rows}\n</ul>`;
}

export function renderProgress(percent: number): string {
  return `
<div class="progress" role="progressbar" aria-valuenow="${percent}" aria-valuemin="0" aria-valuemax="100">
  <div class="progress-fill" style="width:${percent}%"></div>
  <span class="progress-label">${percent}%</span>
</div>`;
}
