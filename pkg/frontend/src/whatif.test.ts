import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "./api.js";
import { RecordedCall, mockFetch, referenceModel, serverWhatIf } from "./testutil.js";
import { WhatIfDisplay } from "./whatif.js";
import { WhatIfExplorer } from "./whatif.js";

function explorerWith(delayMs = 0) {
  const model = referenceModel();
  const calls: RecordedCall[] = [];
  const api = new ApiClient("", mockFetch({
    "POST /projects/p1/whatif": {
      delayMs,
      body: call => serverWhatIf(
        model, (call.body as { deltas: Record<string, number> }).deltas),
    },
  }, calls));
  const updates: WhatIfDisplay[] = [];
  const explorer = new WhatIfExplorer(api, "p1", model,
                                      display => updates.push(display));
  return { explorer, updates, calls, model };
}

describe("WhatIfExplorer", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces slider movement to one request per 150 ms window", async () => {
    const { explorer, calls } = explorerWith();
    for (const value of [0.5, 1.0, 1.5, 2.0, 2.5]) {
      explorer.setDelta("duration_min", value);
      await vi.advanceTimersByTimeAsync(30);
    }
    expect(calls).toHaveLength(0); // still within the debounce window
    await vi.advanceTimersByTimeAsync(150);
    expect(calls).toHaveLength(1);
    expect((calls[0].body as { deltas: Record<string, number> })
      .deltas.duration_min).toBe(2.5);
  });

  it("displays the API value at one-decimal rounding", async () => {
    const { explorer, updates, model } = explorerWith();
    explorer.setDelta("duration_min", model.stds[0]); // +1 sigma
    await vi.advanceTimersByTimeAsync(200);
    expect(updates).toHaveLength(1);
    expect(updates[0].scenario.delta_engagement).toBe(-21.81);
    expect(updates[0].delta).toBe("-21.8");
    expect(updates[0].predictedNew).toBe((74.0 - 21.81).toFixed(1));
  });

  it("shows 0.0 for the zero-delta scenario", async () => {
    const { explorer, updates } = explorerWith();
    explorer.refresh();
    await vi.advanceTimersByTimeAsync(10);
    expect(updates).toHaveLength(1);
    expect(updates[0].delta).toBe("0.0");
    expect(updates[0].scenario.delta_engagement).toBe(0);
    expect(updates[0].predictedNew).toBe(updates[0].predictedBaseline);
  });

  it("renders only the newest response when changes race (latest wins)", async () => {
    const { explorer, updates, calls } = explorerWith(400);
    explorer.setDelta("duration_min", 1.0);
    await vi.advanceTimersByTimeAsync(150); // request 1 in flight until t=550
    explorer.setDelta("duration_min", 2.0);
    await vi.advanceTimersByTimeAsync(150); // request 2 starts, aborting 1
    await vi.advanceTimersByTimeAsync(500); // request 2 resolves
    expect(calls).toHaveLength(2);
    expect(updates).toHaveLength(1);
    expect(updates[0].scenario.deltas[0]).toBe(2.0);
  });

  it("builds slider controls from the model payload only", () => {
    const { explorer, model } = explorerWith();
    expect(explorer.controls.map(c => c.name)).toEqual(model.feature_names);
    const duration = explorer.controls[0];
    expect(duration.baseline).toBe(model.means[0]);
    expect(duration.min).toBe(-2 * model.stds[0]);
    expect(duration.max).toBe(2 * model.stds[0]);
  });

  it("surfaces API errors through the error callback", async () => {
    const model = referenceModel();
    const api = new ApiClient("", mockFetch({
      "POST /projects/p1/whatif": {
        status: 409,
        body: { error: { type: "StageOrderViolation", message: "train first" } },
      },
    }));
    const errors: unknown[] = [];
    const explorer = new WhatIfExplorer(api, "p1", model, () => {},
                                        e => errors.push(e));
    explorer.setDelta("duration_min", 1.0);
    await vi.advanceTimersByTimeAsync(200);
    expect(errors).toHaveLength(1);
  });
});
