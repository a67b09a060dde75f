import type { StageFiles } from "./types.js";

// Mirrors the service's 409 ordering contract exactly: a stage is locked
// in the UI if and only if calling its endpoint would return 409 given the
// project's stage files. Keep this table in sync with the server runners.

export type StageId =
  | "ingest" | "extract" | "dataset" | "eda" | "train" | "insights" | "report";

export type StageState = "locked" | "ready" | "done";

export const STAGE_ORDER: StageId[] = [
  "ingest", "extract", "dataset", "eda", "train", "insights", "report",
];

export const STAGE_REQUIRES: Record<StageId, (keyof StageFiles)[]> = {
  ingest: [],
  extract: [],
  dataset: ["metadata", "features"],
  eda: ["dataset"],
  train: ["dataset"],
  insights: ["model", "eda"],
  report: ["model", "eda"],
};

const STAGE_DONE: Record<StageId, (s: StageFiles) => boolean> = {
  ingest: s => s.metadata && s.engagement,
  extract: s => s.features,
  dataset: s => s.dataset,
  eda: s => s.eda,
  train: s => s.model,
  insights: () => false, // live view, no persisted artefact
  report: s => s.report,
};

export function isLocked(stage: StageId, stages: StageFiles): boolean {
  return STAGE_REQUIRES[stage].some(file => !stages[file]);
}

export function stageState(stage: StageId, stages: StageFiles): StageState {
  if (isLocked(stage, stages)) return "locked";
  return STAGE_DONE[stage](stages) ? "done" : "ready";
}

export function stageStates(stages: StageFiles): Record<StageId, StageState> {
  const out = {} as Record<StageId, StageState>;
  for (const stage of STAGE_ORDER) out[stage] = stageState(stage, stages);
  return out;
}
