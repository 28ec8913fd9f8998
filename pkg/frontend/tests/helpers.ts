import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

export function fixtureBytes(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

// Stateful stand-in for the bundle service, replaying captured responses.
// Posting a verdict flips survey/ratio to their post-review snapshots, the
// same transition the live service performs.
export class FakeService {
  reviewed = false;
  failPosts = false;
  conflictPosts = false;
  readonly posts: unknown[] = [];

  readonly fetch: FetchLike = async (url, init) => {
    const parsed = new URL(url, "http://service.test");
    const route = parsed.pathname;
    if (init?.method === "POST" && route === "/api/survey/responses") {
      if (this.failPosts) {
        throw new TypeError("fetch failed");
      }
      if (this.conflictPosts) {
        return new Response(JSON.stringify({ detail: "item already reviewed" }), { status: 422 });
      }
      this.posts.push(JSON.parse(String(init.body)));
      this.reviewed = true;
      return this.ok("post_response.json");
    }
    if (route === "/api/graph") {
      const percentile = Number(parsed.searchParams.get("percentile") ?? "90");
      return this.ok(percentile >= 95 ? "graph_p95.json" : "graph_p90.json");
    }
    if (route === "/api/layout") return this.ok("layout.json");
    if (route === "/api/flows") return this.ok("flows.json");
    if (route === "/api/viewpoints") return this.ok("viewpoints.json");
    if (route === "/api/survey") {
      return this.ok(this.reviewed ? "survey_after.json" : "survey_before.json");
    }
    if (route === "/api/ratio") {
      return this.ok(this.reviewed ? "ratio_after.json" : "ratio_before.json");
    }
    return new Response(JSON.stringify({ detail: "unknown route" }), { status: 404 });
  };

  private ok(name: string): Response {
    return new Response(fixtureBytes(name), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }
}
