// Magazine rendering: one server page is split into the two facing pages
// of a spread, so turning the page costs exactly one API call. Each slot
// shows title, snippet, first image, and the action row (open, save,
// stars, share, mail).

import type { MagazinePageResponse, MagazineSlot } from "./types.js";
import { escapeHtml } from "./tagcloud.js";

export const SLOTS_PER_FACE = 3;
export const SPREAD_SIZE = SLOTS_PER_FACE * 2;
export const SNIPPET_CHARS = 180;

export function snippet(text: string): string {
  if (text.length <= SNIPPET_CHARS) return text;
  return text.slice(0, SNIPPET_CHARS - 1) + "…";
}

export interface Spread {
  left: MagazineSlot[];
  right: MagazineSlot[];
  pageNumber: number;
  totalPages: number;
  hasPrevious: boolean;
  hasNext: boolean;
}

export function toSpread(response: MagazinePageResponse): Spread {
  return {
    left: response.slots.slice(0, SLOTS_PER_FACE),
    right: response.slots.slice(SLOTS_PER_FACE, SPREAD_SIZE),
    pageNumber: response.page_number,
    totalPages: response.total_pages,
    hasPrevious: response.page_number > 1,
    hasNext: response.page_number < response.total_pages,
  };
}

function renderSlot(slot: MagazineSlot, rating: number | null, saved: boolean): string {
  const item = slot.content;
  const image = item.image_urls[0]
    ? `<img class="slot-image" src="${escapeHtml(item.image_urls[0])}" alt="">`
    : "";
  const stars = [1, 2, 3, 4, 5]
    .map(
      (value) =>
        `<button class="star${rating !== null && value <= rating ? " lit" : ""}" ` +
        `data-action="rate" data-content="${item.id}" data-value="${value}">★</button>`,
    )
    .join("");
  return `
  <article class="slot" data-content="${item.id}">
    ${image}
    <h3><a href="${escapeHtml(item.canonical_link)}" data-action="open" data-content="${item.id}">${escapeHtml(item.title)}</a></h3>
    <p class="snippet">${escapeHtml(snippet(item.body_text))}</p>
    <footer class="slot-actions">
      <button data-action="save" data-content="${item.id}">${saved ? "saved" : "save"}</button>
      <span class="stars">${stars}</span>
      <button data-action="share" data-content="${item.id}" data-channel="twitter">share</button>
      <button data-action="share" data-content="${item.id}" data-channel="mail">mail</button>
    </footer>
  </article>`;
}

export function renderSpread(
  spread: Spread,
  ratings: Map<string, number>,
  savedIds: Set<string>,
): string {
  const face = (slots: MagazineSlot[]) =>
    slots
      .map((slot) => renderSlot(slot, ratings.get(slot.content.id) ?? null, savedIds.has(slot.content.id)))
      .join("\n");
  return `
<div class="spread">
  <section class="page page-left">${face(spread.left)}</section>
  <section class="page page-right">${face(spread.right)}</section>
</div>
<nav class="pager">
  <button data-action="page-prev" ${spread.hasPrevious ? "" : "disabled"}>&#8678; previous</button>
  <span>spread ${spread.pageNumber} / ${Math.max(spread.totalPages, 1)}</span>
  <button data-action="page-next" ${spread.hasNext ? "" : "disabled"}>next &#8680;</button>
</nav>`;
}

export function renderOnboarding(): string {
  return `
<div class="onboarding">
  <h2>Your magazine is empty so far</h2>
  <p>The engine has no strong interests for you yet. Import a profile
     document or add a few keywords by hand and the first issue will
     assemble itself.</p>
  <form class="import-form">
    <textarea name="likes" placeholder="things you like, one per line"></textarea>
    <button data-action="import-profile">import profile</button>
  </form>
  <form class="manual-form">
    <input name="keyword" placeholder="keyword">
    <button data-action="add-interest">add interest</button>
  </form>
</div>`;
}
