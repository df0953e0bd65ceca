// Session controller: owns the view state and funnels every reader action
// into exactly one API call. State only changes from server acknowledgments
// (the response of that one call); nothing is applied optimistically, so
// what the cloud and panels show is always what the engine has accepted.

import { ApiClient } from "./api.js";
import type { InterestEntry, MagazinePageResponse, Recommendation, SavedRow, SharePayload } from "./types.js";
import { InterestWriter, TagCloudModel, buildTagCloud } from "./tagcloud.js";
import { SPREAD_SIZE, Spread, toSpread } from "./magazine.js";
import { ACCEPT_WEIGHT } from "./panels.js";

export interface ViewState {
  userId: string | null;
  coldStart: boolean;
  spread: Spread | null;
  tagCloud: TagCloudModel;
  recommendations: Recommendation[];
  saved: SavedRow[];
  savedSort: "saved_at" | "publish_date";
  progressPercent: number;
  ratings: Map<string, number>;
  savedIds: Set<string>;
  lastSharePayload: SharePayload | null;
  toasts: string[];
}

function emptyState(): ViewState {
  return {
    userId: null,
    coldStart: false,
    spread: null,
    tagCloud: { entries: [] },
    recommendations: [],
    saved: [],
    savedSort: "saved_at",
    progressPercent: 0,
    ratings: new Map(),
    savedIds: new Set(),
    lastSharePayload: null,
    toasts: [],
  };
}

export class AppController {
  readonly state: ViewState = emptyState();
  private interests = new Map<string, InterestEntry>();
  private writer: InterestWriter | null = null;
  private lastMagazine: MagazinePageResponse | null = null;

  constructor(
    readonly api: ApiClient,
    private onChange: () => void = () => {},
  ) {}

  private notify(): void {
    this.onChange();
  }

  private toast(message: string): void {
    this.state.toasts.push(message);
    this.notify();
  }

  private ackInterest(entry: InterestEntry): void {
    this.interests.set(entry.keyword, entry);
    this.state.tagCloud = buildTagCloud([...this.interests.values()]);
    this.notify();
  }

  private requireUser(): string {
    if (this.state.userId === null) throw new Error("no session");
    return this.state.userId;
  }

  // ---------------------------------------------------------------- session

  async signUp(email: string): Promise<void> {
    const made = await this.api.register(email);
    this.state.userId = made.user_id;
    this.writer = new InterestWriter(
      this.api,
      made.user_id,
      (entry) => this.ackInterest(entry),
      (keyword, message) => this.revertSlider(keyword, message),
    );
    this.notify();
  }

  async importProfile(likes: string[], professional: string[] = []): Promise<void> {
    const userId = this.requireUser();
    const result = await this.api.importProfile(userId, { likes, professional });
    for (const entry of result.imported) this.interests.set(entry.keyword, entry);
    this.state.tagCloud = buildTagCloud([...this.interests.values()]);
    this.notify();
  }

  /** Initial view load: magazine spread plus the three panels. */
  async openMagazine(): Promise<void> {
    const userId = this.requireUser();
    await this.loadSpread(1);
    const interestList = await this.api.interests(userId);
    this.interests = new Map(interestList.interests.map((e) => [e.keyword, e]));
    this.state.tagCloud = buildTagCloud(interestList.interests);
    this.state.recommendations = (await this.api.recommendations(userId)).recommendations;
    await this.reloadSaved();
    this.state.progressPercent = (await this.api.progress(userId)).percent;
    this.notify();
  }

  private async loadSpread(page: number): Promise<void> {
    const response = await this.api.magazine(this.requireUser(), page, SPREAD_SIZE);
    this.lastMagazine = response;
    this.state.coldStart = response.cold_start;
    this.state.spread = response.cold_start ? null : toSpread(response);
    this.notify();
  }

  async pageNext(): Promise<void> {
    if (this.state.spread?.hasNext) await this.loadSpread(this.state.spread.pageNumber + 1);
  }

  async pagePrevious(): Promise<void> {
    if (this.state.spread?.hasPrevious) await this.loadSpread(this.state.spread.pageNumber - 1);
  }

  // ---------------------------------------------------------------- actions

  /** Open-link emits the click event first; navigation runs after the post. */
  async openLink(contentId: string, navigate: (url: string) => void): Promise<void> {
    await this.api.postEvent("click", contentId);
    const url = this.findContent(contentId)?.canonical_link;
    if (url) navigate(url);
  }

  async save(contentId: string): Promise<void> {
    const userId = this.requireUser();
    const ack = await this.api.saveContent(userId, contentId);
    this.state.savedIds.add(contentId);
    const content = this.findContent(contentId);
    if (ack.created && content) {
      this.state.saved = [
        { content_id: contentId, saved_at: ack.saved_at, rating: this.state.ratings.get(contentId) ?? null, content },
        ...this.state.saved,
      ];
    }
    this.notify();
  }

  async unsave(contentId: string): Promise<void> {
    await this.api.unsaveContent(this.requireUser(), contentId);
    this.state.savedIds.delete(contentId);
    this.state.saved = this.state.saved.filter((row) => row.content_id !== contentId);
    this.notify();
  }

  async rate(contentId: string, value: number): Promise<void> {
    const ack = await this.api.rate(contentId, value);
    this.state.ratings.set(contentId, ack.value);
    this.notify();
  }

  async share(contentId: string, channel: string): Promise<void> {
    const ack = await this.api.share(contentId, channel);
    this.state.lastSharePayload = ack.payload;
    this.notify();
  }

  async reloadSaved(sort?: "saved_at" | "publish_date"): Promise<void> {
    const userId = this.requireUser();
    if (sort) this.state.savedSort = sort;
    const rows = (await this.api.saved(userId, this.state.savedSort)).saved;
    this.state.saved = rows;
    this.state.savedIds = new Set(rows.map((row) => row.content_id));
    for (const row of rows) {
      if (row.rating !== null) this.state.ratings.set(row.content_id, row.rating);
    }
    this.notify();
  }

  // -------------------------------------------------------------- tag cloud

  /** Slider release: the cloud re-renders only from the PUT acknowledgment. */
  async setInterestWeight(keyword: string, weight: number): Promise<void> {
    if (this.writer === null) throw new Error("no session");
    await this.writer.setWeight(keyword, weight);
  }

  private revertSlider(keyword: string, message: string): void {
    // known weight is the last acked one; rebuilding from it reverts the slider
    this.state.tagCloud = buildTagCloud([...this.interests.values()]);
    this.toast(`could not update "${keyword}": ${message}`);
  }

  async removeInterest(keyword: string): Promise<void> {
    await this.api.deleteInterest(this.requireUser(), keyword);
    this.interests.delete(keyword);
    this.state.tagCloud = buildTagCloud([...this.interests.values()]);
    this.notify();
  }

  async addManualInterest(keyword: string, weight = 0.5): Promise<void> {
    const ack = await this.api.putInterest(this.requireUser(), keyword, weight);
    this.ackInterest(ack);
  }

  async acceptRecommendation(keyword: string): Promise<void> {
    const ack = await this.api.putInterest(this.requireUser(), keyword, ACCEPT_WEIGHT);
    this.state.recommendations = this.state.recommendations.filter((r) => r.keyword !== keyword);
    this.ackInterest(ack);
  }

  // ----------------------------------------------------------------- lookup

  private findContent(contentId: string) {
    for (const slot of this.lastMagazine?.slots ?? []) {
      if (slot.content.id === contentId) return slot.content;
    }
    for (const row of this.state.saved) {
      if (row.content_id === contentId) return row.content;
    }
    return null;
  }
}
