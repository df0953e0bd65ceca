// Scripted reader session: every step must produce exactly the expected
// API calls, and after each step the tag cloud's size order must equal the
// server's weight order (server-authoritative rendering).

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AppController } from "../src/controller.js";
import { MockServer, USER_ID, fixtureContent } from "./mockserver.js";

function cloudOrder(app: AppController): string[] {
  return app.state.tagCloud.entries.map((e) => e.keyword);
}

function sizeOrder(app: AppController): string[] {
  return [...app.state.tagCloud.entries]
    .sort((a, b) => b.fontPx - a.fontPx || (a.keyword < b.keyword ? -1 : 1))
    .map((e) => e.keyword);
}

function expectCloudMatchesServer(app: AppController, server: MockServer): void {
  expect(sizeOrder(app)).toEqual(server.weightOrder());
  expect(cloudOrder(app)).toEqual(server.weightOrder());
}

function setup() {
  const server = new MockServer();
  server.contents = [
    fixtureContent("c1", "Cricket final tonight", ["cricket"]),
    fixtureContent("c2", "Golf tour heads north", ["golf"]),
  ];
  server.recommendations = [
    { keyword: "sachin tendulkar", score: 0.63, reason: "similar_user", contributing_user: "u-b" },
  ];
  const api = new ApiClient(server.transport());
  const app = new AppController(api);
  return { server, api, app };
}

describe("scripted browser session", () => {
  it("produces exactly the expected API call sequence", async () => {
    const { server, api, app } = setup();

    await app.signUp("reader@example.net");
    await app.importProfile(["cricket", "Cricket World Cup highlights", "street golf"]);
    await app.openMagazine();
    await app.save("c1");
    await app.rate("c1", 5);
    await app.setInterestWeight("golf", 0.8); // one slider release
    await app.acceptRecommendation("sachin tendulkar");

    expect(api.calls().map((c) => `${c.method} ${c.path}`)).toEqual([
      "POST /users",
      `POST /users/${USER_ID}/profile-import`,
      `GET /users/${USER_ID}/magazine?page=1&page_size=6`,
      `GET /users/${USER_ID}/interests`,
      `GET /users/${USER_ID}/recommendations`,
      `GET /users/${USER_ID}/saved?sort=saved_at`,
      `GET /users/${USER_ID}/progress`,
      `POST /users/${USER_ID}/saved`,
      "POST /contents/c1/rating",
      `PUT /users/${USER_ID}/interests/golf`,
      `PUT /users/${USER_ID}/interests/sachin%20tendulkar`,
    ]);
    expect(server.events.map((e) => e.kind)).toEqual(["save", "rate"]);
  });

  it("keeps tag cloud size order equal to server weights after every step", async () => {
    const { server, app } = setup();

    await app.signUp("reader@example.net");
    expectCloudMatchesServer(app, server); // both empty

    await app.importProfile(["cricket", "Cricket World Cup highlights", "street golf"]);
    expect(server.weights.get("cricket")).toBeCloseTo(0.4);
    expect(server.weights.get("golf")).toBeCloseTo(0.3);
    expectCloudMatchesServer(app, server);

    await app.openMagazine();
    expectCloudMatchesServer(app, server);

    await app.save("c1");
    await app.rate("c1", 5);
    expectCloudMatchesServer(app, server);

    await app.setInterestWeight("golf", 0.8);
    expect(server.weights.get("golf")).toBe(0.8);
    expectCloudMatchesServer(app, server); // golf now renders largest

    await app.acceptRecommendation("sachin tendulkar");
    expectCloudMatchesServer(app, server);
  });

  it("accepting a recommendation promotes the keyword to the High floor", async () => {
    const { server, app } = setup();
    await app.signUp("reader@example.net");
    await app.openMagazine();

    await app.acceptRecommendation("sachin tendulkar");
    expect(server.weights.get("sachin tendulkar")).toBe(0.6);
    const entry = app.state.tagCloud.entries.find((e) => e.keyword === "sachin tendulkar");
    expect(entry?.tier).toBe("High");
    // accepted keyword leaves the recommendations panel
    expect(app.state.recommendations).toEqual([]);
  });

  it("updates saved list and ratings from acknowledgments only", async () => {
    const { app } = setup();
    await app.signUp("reader@example.net");
    await app.openMagazine();

    await app.save("c1");
    expect(app.state.saved.map((r) => r.content_id)).toEqual(["c1"]);
    await app.rate("c1", 4);
    expect(app.state.ratings.get("c1")).toBe(4);
    await app.unsave("c1");
    expect(app.state.saved).toEqual([]);
  });

  it("posts the click event before navigating the reader away", async () => {
    const { api, app } = setup();
    await app.signUp("reader@example.net");
    await app.openMagazine();

    const order: string[] = [];
    const original = api.postEvent.bind(api);
    api.postEvent = async (kind, target) => {
      order.push(`event:${kind}`);
      return original(kind, target);
    };
    await app.openLink("c1", (url) => {
      order.push(`navigate:${url}`);
    });
    expect(order).toEqual(["event:click", "navigate:http://content.example/c1"]);
  });

  it("shows onboarding when the magazine is cold", async () => {
    const server = new MockServer(); // no contents at all
    const app = new AppController(new ApiClient(server.transport()));
    await app.signUp("reader@example.net");
    await app.openMagazine();
    expect(app.state.coldStart).toBe(true);
    expect(app.state.spread).toBeNull();
  });

  it("share stores the returned payload for display", async () => {
    const { app } = setup();
    await app.signUp("reader@example.net");
    await app.openMagazine();
    await app.share("c2", "mail");
    expect(app.state.lastSharePayload?.link).toBe("http://content.example/c2");
  });
});
