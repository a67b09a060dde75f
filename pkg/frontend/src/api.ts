import type {
  ApiErrorBody,
  DatasetView,
  DesignReport,
  EdaReport,
  JobRecord,
  ManualVideoIn,
  ModelPayload,
  ProjectDetail,
  ProjectRecord,
  ValidationReport,
  WhatIfScenario,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public type: string, message: string,
              public row?: number) {
    super(message);
    this.name = "ApiError";
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === "AbortError";
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Typed client over the service JSON API. At most one request per endpoint
 * key is in flight: a newer call aborts the older one (latest-wins), which
 * keeps the what-if explorer from rendering stale responses.
 */
export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(private baseUrl: string = "",
              private fetchImpl: FetchLike =
                (input, init) => globalThis.fetch(input, init)) {}

  private async request<T>(key: string, method: string, path: string,
                           body?: unknown, form?: FormData): Promise<T> {
    this.inflight.get(key)?.abort();
    const controller = new AbortController();
    this.inflight.set(key, controller);
    const init: RequestInit = { method, signal: controller.signal };
    if (form !== undefined) {
      init.body = form;
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    try {
      const response = await this.fetchImpl(this.baseUrl + path, init);
      if (!response.ok) {
        let parsed: ApiErrorBody | null = null;
        try {
          parsed = (await response.json()) as ApiErrorBody;
        } catch {
          parsed = null;
        }
        throw new ApiError(response.status,
                           parsed?.error?.type ?? "HttpError",
                           parsed?.error?.message ?? response.statusText,
                           parsed?.error?.row);
      }
      return (await response.json()) as T;
    } finally {
      if (this.inflight.get(key) === controller) this.inflight.delete(key);
    }
  }

  listProjects(): Promise<ProjectRecord[]> {
    return this.request("projects", "GET", "/projects");
  }

  createProject(name: string): Promise<ProjectRecord> {
    return this.request("projects", "POST", "/projects", { name });
  }

  getProject(id: string): Promise<ProjectDetail> {
    return this.request("project", "GET", `/projects/${id}`);
  }

  postMetadata(id: string, videos: ManualVideoIn[]): Promise<{ videos: number }> {
    return this.request("metadata", "POST", `/projects/${id}/metadata`,
                        { videos, fetch: false });
  }

  uploadEngagement(id: string, file: Blob,
                   name = "engagement.csv"): Promise<{ engagement_records: number }> {
    const form = new FormData();
    form.append("file", file, name);
    return this.request("engagement", "POST", `/projects/${id}/engagement`,
                        undefined, form);
  }

  uploadVideo(id: string, videoId: string, frames: Blob,
              transcript: Blob): Promise<{ video_id: string }> {
    const form = new FormData();
    form.append("video_id", videoId);
    form.append("frames", frames, `${videoId}.evf`);
    form.append("transcript", transcript, `${videoId}.txt`);
    return this.request("videos", "POST", `/projects/${id}/videos`,
                        undefined, form);
  }

  startExtract(id: string, videos?: string[]): Promise<JobRecord> {
    return this.request("extract", "POST", `/projects/${id}/extract`,
                        videos ? { videos } : {});
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request("job", "GET", `/jobs/${jobId}`);
  }

  buildDataset(id: string): Promise<ValidationReport> {
    return this.request("dataset-build", "POST", `/projects/${id}/dataset/build`);
  }

  getDataset(id: string): Promise<DatasetView> {
    return this.request("dataset", "GET", `/projects/${id}/dataset`);
  }

  getEda(id: string, span?: number): Promise<EdaReport> {
    const query = span === undefined ? "" : `?span=${span}`;
    return this.request("eda", "GET", `/projects/${id}/eda${query}`);
  }

  train(id: string, cv = 0, seed = 0): Promise<ModelPayload> {
    return this.request("train", "POST", `/projects/${id}/model/train`,
                        { cv, seed });
  }

  getModel(id: string): Promise<ModelPayload> {
    return this.request("model", "GET", `/projects/${id}/model`);
  }

  getInsights(id: string): Promise<DesignReport> {
    return this.request("insights", "GET", `/projects/${id}/insights`);
  }

  generateReport(id: string): Promise<DesignReport> {
    return this.request("report", "POST", `/projects/${id}/report`);
  }

  whatIf(id: string, deltas: Record<string, number>,
         baseline?: Record<string, number>): Promise<WhatIfScenario> {
    return this.request("whatif", "POST", `/projects/${id}/whatif`,
                        { deltas, baseline: baseline ?? null });
  }
}
