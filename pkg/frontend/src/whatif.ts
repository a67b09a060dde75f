import { ApiClient, isAbort } from "./api.js";
import { debounce, Debounced } from "./debounce.js";
import { points } from "./format.js";
import type { ModelPayload, WhatIfScenario } from "./types.js";

export interface FeatureControl {
  name: string;
  baseline: number; // training mean, from the model payload
  std: number;
  delta: number;
  min: number; // slider bounds: +/- 2 standard deviations
  max: number;
  step: number;
}

export interface WhatIfDisplay {
  predictedBaseline: string;
  predictedNew: string;
  delta: string;
  scenario: WhatIfScenario;
}

/**
 * Per-feature slider state driving the live prediction. Slider changes
 * debounce to one POST /whatif per window; the API client's latest-wins
 * cancellation guarantees only the newest response renders. Displayed
 * numbers are the API's values at 1-decimal rounding, never recomputed.
 */
export class WhatIfExplorer {
  readonly controls: FeatureControl[];
  private send: Debounced<[]>;
  private lastError: unknown = null;

  constructor(private api: ApiClient, private projectId: string,
              model: ModelPayload,
              private onUpdate: (display: WhatIfDisplay) => void,
              private onError: (error: unknown) => void = () => {},
              debounceMs = 150) {
    this.controls = model.feature_names.map((name, j) => ({
      name,
      baseline: model.means[j],
      std: model.stds[j],
      delta: 0,
      min: -2 * model.stds[j],
      max: 2 * model.stds[j],
      step: model.stds[j] / 20,
    }));
    this.send = debounce(() => { void this.post(); }, debounceMs);
  }

  setDelta(name: string, delta: number): void {
    const control = this.controls.find(c => c.name === name);
    if (!control) throw new Error(`unknown feature ${name}`);
    control.delta = delta;
    this.send();
  }

  resetDeltas(): void {
    for (const control of this.controls) control.delta = 0;
    this.send();
  }

  /** Immediately issue the pending request (used on first render). */
  refresh(): void {
    this.send();
    this.send.flush();
  }

  deltas(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const control of this.controls) out[control.name] = control.delta;
    return out;
  }

  private async post(): Promise<void> {
    try {
      const scenario = await this.api.whatIf(this.projectId, this.deltas());
      this.onUpdate({
        predictedBaseline: points(scenario.predicted_baseline),
        predictedNew: points(scenario.predicted_new),
        delta: points(scenario.delta_engagement),
        scenario,
      });
    } catch (error) {
      if (isAbort(error)) return; // superseded by a newer slider change
      this.lastError = error;
      this.onError(error);
    }
  }
}
