import { ServiceError, type ServiceClient } from "./api.js";
import type { SurveyItem, SurveyPayload, SurveyResponse, SurveyStats } from "./types.js";

// Review queue over the survey. Verdicts are buffered locally and flushed to
// the service; a failed flush keeps them queued so the reviewer can retry
// (offline banner), and the rate indicator only shows service-reported stats.
// A 4xx rejection means the batch conflicts with server state (an item was
// already reviewed elsewhere); retrying it verbatim can never succeed, so the
// queue drops it and flags the conflict for a survey refresh instead.

export class ReviewQueue {
  readonly items: SurveyItem[];
  cursor = 0;
  stats: SurveyStats | null;
  offline = false;
  conflict = false;
  private pending: SurveyResponse[] = [];

  constructor(
    survey: SurveyPayload,
    private readonly reviewer: string,
  ) {
    this.items = survey.items;
    this.stats = survey.stats ?? null;
  }

  get current(): SurveyItem | null {
    return this.items[this.cursor] ?? null;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  advance(): void {
    if (this.cursor < this.items.length - 1) {
      this.cursor += 1;
    }
  }

  recordVerdict(verdict: "agree" | "disagree", comment = ""): void {
    const item = this.current;
    if (!item) {
      throw new RangeError("no survey item under the cursor");
    }
    this.pending.push({ item_id: item.id, reviewer: this.reviewer, verdict, comment });
    this.advance();
  }

  // Push buffered verdicts. On success the queue empties and stats refresh;
  // on failure everything stays queued for a retry.
  async flush(client: ServiceClient): Promise<boolean> {
    if (this.pending.length === 0) {
      return true;
    }
    const batch = [...this.pending];
    try {
      this.stats = await client.submitResponses(batch);
    } catch (error) {
      if (error instanceof ServiceError && error.status >= 400 && error.status < 500) {
        this.conflict = true;
        this.pending = [];
      } else {
        this.offline = true;
      }
      return false;
    }
    this.offline = false;
    this.conflict = false;
    this.pending = [];
    return true;
  }

  indicator(): string {
    if (!this.stats || this.stats.reviewed === 0) {
      return "no reviews yet";
    }
    return `${this.stats.disagreement_rate.toFixed(2)}% disagreement (${this.stats.reviewed}/${this.stats.total_items} reviewed)`;
  }
}
