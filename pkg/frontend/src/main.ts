// Browser bootstrap: binds the controller to the document via event
// delegation. Logic stays in the controller; this file only reads the DOM
// and writes HTML.

import { ApiClient, fetchTransport } from "./api.js";
import { AppController } from "./controller.js";
import { renderOnboarding, renderSpread } from "./magazine.js";
import { renderProgress, renderRecommendations, renderSaved } from "./panels.js";
import { renderTagCloud } from "./tagcloud.js";

declare global {
  interface Window {
    EMAG_API_BASE?: string;
  }
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function render(app: AppController): void {
  const state = app.state;
  const magazine = el("magazine");
  if (state.userId === null) {
    magazine.innerHTML = `<form id="signup"><input name="email" placeholder="email"><button>start reading</button></form>`;
  } else if (state.coldStart) {
    magazine.innerHTML = renderOnboarding();
  } else if (state.spread) {
    // page-turn effect: re-rendering with the CSS animation class replays it
    magazine.innerHTML = renderSpread(state.spread, state.ratings, state.savedIds);
    magazine.querySelector(".spread")?.classList.add("turning");
  } else {
    magazine.innerHTML = "";
  }
  el("tag-cloud").innerHTML = renderTagCloud(state.tagCloud);
  el("recommendations").innerHTML = renderRecommendations(state.recommendations);
  el("saved").innerHTML = renderSaved(state.saved, state.savedSort);
  el("progress").innerHTML = renderProgress(state.progressPercent);
  el("toasts").innerHTML = state.toasts
    .slice(-3)
    .map((t) => `<div class="toast">${t}</div>`)
    .join("");
  if (state.lastSharePayload) {
    el("share-box").textContent = `${state.lastSharePayload.title} — ${state.lastSharePayload.link}`;
  }
}

function bind(app: AppController): void {
  document.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset["action"];
    const content = target.dataset["content"] ?? "";
    const keyword = target.dataset["keyword"] ?? "";
    if (action === "open") {
      event.preventDefault(); // click event posts first, then we navigate
      void app.openLink(content, (url) => window.open(url, "_blank"));
      return;
    }
    event.preventDefault();
    if (action === "save") void app.save(content);
    else if (action === "unsave") void app.unsave(content);
    else if (action === "rate") void app.rate(content, Number(target.dataset["value"]));
    else if (action === "share") void app.share(content, target.dataset["channel"] ?? "twitter");
    else if (action === "page-next") void app.pageNext();
    else if (action === "page-prev") void app.pagePrevious();
    else if (action === "accept-recommendation") void app.acceptRecommendation(keyword);
    else if (action === "saved-sort")
      void app.reloadSaved(target.dataset["sort"] as "saved_at" | "publish_date");
    else if (action === "import-profile") {
      const box = document.querySelector<HTMLTextAreaElement>(".import-form textarea");
      const likes = (box?.value ?? "").split("\n").map((s) => s.trim()).filter(Boolean);
      void app.importProfile(likes).then(() => app.openMagazine());
    } else if (action === "add-interest") {
      const input = document.querySelector<HTMLInputElement>(".manual-form input");
      if (input?.value) void app.addManualInterest(input.value).then(() => app.openMagazine());
    }
  });

  // slider release (change fires on release, not during drag)
  document.addEventListener("change", (event) => {
    const slider = event.target as HTMLInputElement;
    if (slider.classList?.contains("tag-slider")) {
      void app.setInterestWeight(slider.dataset["keyword"] ?? "", Number(slider.value));
    }
  });

  document.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (form.id === "signup") {
      event.preventDefault();
      const email = new FormData(form).get("email");
      void app.signUp(String(email ?? "")).then(() => app.openMagazine());
    }
  });

  // removal control on the cloud
  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList?.contains("tag-remove")) {
      void app.removeInterest(target.dataset["keyword"] ?? "");
    }
  });
}

export function boot(): AppController {
  const base = window.EMAG_API_BASE ?? "http://127.0.0.1:8470";
  const app = new AppController(new ApiClient(fetchTransport(base)), () => render(app));
  bind(app);
  render(app);
  return app;
}

if (typeof document !== "undefined" && document.getElementById("magazine")) {
  boot();
}
