import type { FetchLike } from "./api.js";
import type { ModelPayload, WhatIfScenario } from "./types.js";

export interface RecordedCall {
  path: string;
  method: string;
  body: unknown;
}

export interface MockRoute {
  status?: number;
  body: unknown | ((call: RecordedCall) => unknown);
  delayMs?: number;
}

/**
 * fetch stand-in with abort support: a pending response rejects with
 * AbortError when its signal fires, like the real thing.
 */
export function mockFetch(routes: Record<string, MockRoute>,
                          calls: RecordedCall[] = []): FetchLike {
  return (input, init) => new Promise<Response>((resolve, reject) => {
    const method = init?.method ?? "GET";
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    const key = `${method} ${path}`;
    const route = routes[key] ?? routes[path];
    const call: RecordedCall = {
      path, method,
      body: typeof init?.body === "string" ? JSON.parse(init.body) : init?.body,
    };
    calls.push(call);
    if (!route) {
      resolve(new Response(JSON.stringify({
        error: { type: "NotFoundError", message: `no route ${key}` },
      }), { status: 404 }));
      return;
    }
    const respond = () => {
      const body = typeof route.body === "function"
        ? (route.body as (c: RecordedCall) => unknown)(call) : route.body;
      resolve(new Response(JSON.stringify(body),
                           { status: route.status ?? 200 }));
    };
    const signal = init?.signal;
    if (signal?.aborted) {
      reject(new DOMException("aborted", "AbortError"));
      return;
    }
    const timer = setTimeout(respond, route.delayMs ?? 0);
    signal?.addEventListener("abort", () => {
      clearTimeout(timer);
      reject(new DOMException("aborted", "AbortError"));
    });
  });
}

/** Published reference weights; the shape the train endpoint returns. */
export function referenceModel(): ModelPayload {
  return {
    feature_names: ["duration_min", "word_count", "speaking_speed_wpm",
                    "scene_count", "scene_rate_spm"],
    means: [5.9, 1050.0, 205.0, 11.0, 2.2],
    stds: [2.5, 380.0, 12.0, 6.0, 1.1],
    weights: [-21.81, 20.52, -3.04, -1.02, 1.15],
    intercept: 74.0,
    metrics: { rmse: 8.6, r_squared: 0.0853, n: 144 },
    vif: [9.4, 9.8, 1.6, 2.3, 2.1],
  };
}

/**
 * Server-side what-if arithmetic for the mocked API: the UI never computes
 * these numbers itself, so tests feed it exactly what the service would.
 */
export function serverWhatIf(model: ModelPayload,
                             deltas: Record<string, number>): WhatIfScenario {
  const deltaVec = model.feature_names.map(name => deltas[name] ?? 0);
  let delta = 0;
  model.feature_names.forEach((_, j) => {
    delta += model.weights[j] * (deltaVec[j] / model.stds[j]);
  });
  return {
    baseline: [...model.means],
    deltas: deltaVec,
    predicted_baseline: model.intercept,
    predicted_new: model.intercept + delta,
    delta_engagement: delta,
  };
}
