import { ApiClient, ApiError } from "./api.js";
import { correlationSvg, histogramSvg, loessSvg } from "./charts.js";
import { compact, signedPoints, weight } from "./format.js";
import { STAGE_ORDER, StageId, stageStates } from "./stages.js";
import type {
  DesignReport,
  EdaReport,
  ManualVideoIn,
  ModelPayload,
  ProjectDetail,
  WhatIfScenario,
} from "./types.js";
import { WhatIfExplorer } from "./whatif.js";

const api = new ApiClient("");

const STAGE_LABELS: Record<StageId, string> = {
  ingest: "1 · Ingest",
  extract: "2 · Extract",
  dataset: "3 · Dataset",
  eda: "4 · Explore",
  train: "5 · Train",
  insights: "6 · Insights",
  report: "7 · Report",
};

type Attrs = Record<string, string | ((event: Event) => void)>;

function h(tag: string, attrs: Attrs = {},
           ...children: (Node | string)[]): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      el.addEventListener(key.replace(/^on/, ""), value);
    } else {
      el.setAttribute(key, value);
    }
  }
  el.append(...children);
  return el;
}

function errorBox(error: unknown): HTMLElement {
  if (error instanceof ApiError) {
    const row = error.row !== undefined ? ` (row ${error.row})` : "";
    return h("div", { class: "error" },
             `${error.type}: ${error.message}${row}`);
  }
  return h("div", { class: "error" }, String(error));
}

function route(): { projectId: string | null; stage: StageId } {
  const match = window.location.hash.match(/^#\/p\/([^/]+)(?:\/([a-z]+))?/);
  if (!match) return { projectId: null, stage: "ingest" };
  const stage = (STAGE_ORDER as string[]).includes(match[2] ?? "")
    ? (match[2] as StageId) : "ingest";
  return { projectId: match[1], stage };
}

async function render(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren();
  const { projectId, stage } = route();
  try {
    if (projectId === null) {
      root.append(await dashboardView());
    } else {
      root.append(await projectView(projectId, stage));
    }
  } catch (error) {
    root.append(errorBox(error));
  }
}

async function dashboardView(): Promise<HTMLElement> {
  const projects = await api.listProjects();
  const list = h("ul", { class: "project-list" });
  for (const record of projects) {
    list.append(h("li", {},
      h("a", { href: `#/p/${record.project_id}/ingest` }, record.name),
      h("span", { class: "muted" }, ` ${record.created_at}`)));
  }
  const nameInput = h("input", {
    placeholder: "new project name", id: "new-project-name",
  }) as HTMLInputElement;
  const create = h("button", {
    onclick: async () => {
      if (!nameInput.value.trim()) return;
      const record = await api.createProject(nameInput.value.trim());
      window.location.hash = `#/p/${record.project_id}/ingest`;
    },
  }, "Create project");
  return h("div", {},
           h("h1", {}, "EduVid Insights"),
           h("p", { class: "muted" },
             "Quantitative feedback on educational-video design."),
           list, h("div", { class: "row" }, nameInput, create));
}

async function projectView(projectId: string, stage: StageId
                           ): Promise<HTMLElement> {
  const detail = await api.getProject(projectId);
  const states = stageStates(detail.stages);
  const nav = h("nav", { class: "stages" });
  for (const id of STAGE_ORDER) {
    const state = states[id];
    const label = `${STAGE_LABELS[id]}${state === "done" ? " ✓" : ""}`;
    if (state === "locked") {
      nav.append(h("span", { class: "stage locked", title: "locked:"
        + " run the previous stage first" }, `${label} 🔒`));
    } else {
      nav.append(h("a", {
        class: `stage${id === stage ? " active" : ""}`,
        href: `#/p/${projectId}/${id}`,
      }, label));
    }
  }
  const body = h("section", { class: "stage-body" });
  if (states[stage] === "locked") {
    body.append(h("p", { class: "muted" },
      "This stage is locked until its predecessor finishes"
      + " (the API would answer 409)."));
  } else {
    body.append(await stageView(projectId, stage, detail));
  }
  return h("div", {},
           h("h1", {}, detail.name),
           h("a", { href: "#/", class: "muted" }, "← all projects"),
           nav, body);
}

async function stageView(projectId: string, stage: StageId,
                          detail: ProjectDetail): Promise<HTMLElement> {
  switch (stage) {
    case "ingest": return ingestView(projectId);
    case "extract": return extractView(projectId);
    case "dataset": return datasetView(projectId, detail);
    case "eda": return edaView(projectId);
    case "train": return trainView(projectId, detail);
    case "insights": return insightsView(projectId);
    case "report": return reportView(projectId, detail);
  }
}

const MANUAL_FIELDS: [keyof ManualVideoIn, string][] = [
  ["video_id", "Video ID"],
  ["institution_name", "Institution"],
  ["speaker_name", "Speaker"],
  ["course_code", "Course code"],
  ["course_name", "Course name"],
  ["unit_level", "Unit level (e.g. Year_1)"],
  ["year", "Year"],
  ["video_type", "Video type"],
  ["subject_area", "Subject area"],
];

const pendingVideos: ManualVideoIn[] = [];

function ingestView(projectId: string): HTMLElement {
  const status = h("div", {});
  const table = h("ul", { class: "pending" },
    ...pendingVideos.map(v => h("li", {}, `${v.video_id} — ${v.course_code}`)));
  const inputs = new Map<string, HTMLInputElement | HTMLSelectElement>();
  const form = h("div", { class: "grid" });
  for (const [field, label] of MANUAL_FIELDS) {
    let input: HTMLInputElement | HTMLSelectElement;
    if (field === "video_type") {
      input = h("select", {},
        ...["Lecture", "Workshop", "LabDemo", "Other"].map(
          t => h("option", { value: t }, t))) as HTMLSelectElement;
    } else {
      input = h("input", { placeholder: label }) as HTMLInputElement;
    }
    inputs.set(field, input);
    form.append(h("label", {}, label, input));
  }
  const addVideo = h("button", {
    onclick: () => {
      const video = {} as Record<string, string | number>;
      for (const [field] of MANUAL_FIELDS) {
        const raw = inputs.get(field)!.value.trim();
        video[field] = field === "year" ? Number(raw) : raw;
      }
      pendingVideos.push(video as unknown as ManualVideoIn);
      void render();
    },
  }, "Add video");
  const save = h("button", {
    onclick: async () => {
      try {
        const saved = await api.postMetadata(projectId, pendingVideos);
        status.replaceChildren(
          h("p", {}, `saved metadata for ${saved.videos} videos`));
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, "Save metadata");
  const engagementInput = h("input", { type: "file", accept: ".csv" }
                            ) as HTMLInputElement;
  const uploadEngagement = h("button", {
    onclick: async () => {
      const file = engagementInput.files?.[0];
      if (!file) return;
      try {
        const result = await api.uploadEngagement(projectId, file, file.name);
        status.replaceChildren(
          h("p", {}, `imported ${result.engagement_records} engagement rows`));
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, "Import engagement CSV");
  return h("div", {},
           h("h2", {}, "Metadata entry"), form,
           h("div", { class: "row" }, addVideo, save), table,
           h("h2", {}, "Engagement metrics"),
           h("div", { class: "row" }, engagementInput, uploadEngagement),
           status);
}

function extractView(projectId: string): HTMLElement {
  const status = h("div", {});
  const idInput = h("input", { placeholder: "video id" }) as HTMLInputElement;
  const framesInput = h("input", { type: "file", accept: ".evf" }
                        ) as HTMLInputElement;
  const transcriptInput = h("input", { type: "file", accept: ".txt" }
                            ) as HTMLInputElement;
  const upload = h("button", {
    onclick: async () => {
      const frames = framesInput.files?.[0];
      const transcript = transcriptInput.files?.[0];
      if (!idInput.value.trim() || !frames || !transcript) return;
      try {
        await api.uploadVideo(projectId, idInput.value.trim(), frames,
                              transcript);
        status.replaceChildren(h("p", {}, `uploaded ${idInput.value}`));
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, "Upload video");
  const progress = h("progress", { max: "1", value: "0" }
                     ) as HTMLProgressElement;
  const run = h("button", {
    onclick: async () => {
      try {
        let job = await api.startExtract(projectId);
        status.replaceChildren(h("p", {}, `job ${job.job_id}: ${job.state}`),
                               progress);
        while (job.state === "queued" || job.state === "running") {
          await new Promise(resolve => setTimeout(resolve, 250));
          job = await api.getJob(job.job_id);
          progress.value = job.progress;
        }
        status.replaceChildren(
          job.state === "done"
            ? h("p", {}, "extraction finished")
            : errorBox(job.error ?? "extraction failed"));
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, "Extract features");
  return h("div", {},
           h("h2", {}, "Upload frame streams and transcripts"),
           h("div", { class: "grid" },
             h("label", {}, "Video ID", idInput),
             h("label", {}, "EVF1 frames", framesInput),
             h("label", {}, "Transcript", transcriptInput)),
           h("div", { class: "row" }, upload, run), status);
}

async function datasetView(projectId: string, detail: ProjectDetail
                           ): Promise<HTMLElement> {
  const status = h("div", {});
  const container = h("div", {});
  const build = h("button", {
    onclick: async () => {
      try {
        const report = await api.buildDataset(projectId);
        status.replaceChildren(h("p", {},
          `built: ${report.total_rows} rows, ${report.complete_rows} complete,`
          + ` ${report.issues.length} issue(s)`));
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, "Build dataset");
  if (detail.stages.dataset) {
    const view = await api.getDataset(projectId);
    const columns = ["video_id", ...view.feature_names, view.target_name,
                     "complete"];
    const head = h("tr", {}, ...columns.map(c => h("th", {}, c)));
    const table = h("table", { class: "data" }, head);
    for (const row of view.rows) {
      table.append(h("tr", {}, ...columns.map(c => {
        const value = row[c];
        const text = value === null || value === undefined ? "—"
          : typeof value === "number" ? compact(value) : String(value);
        return h("td", {}, text);
      })));
    }
    container.append(table);
    if (view.validation.issues.length) {
      container.append(h("h3", {}, "Validation issues"),
        h("ul", {}, ...view.validation.issues.map(issue =>
          h("li", {}, `${issue.video_id || "(dataset)"} · ${issue.field}`
            + ` · ${issue.kind}: ${issue.message}`))));
    }
  }
  return h("div", {}, h("h2", {}, "Dataset"),
           h("div", { class: "row" }, build), status, container);
}

async function edaView(projectId: string): Promise<HTMLElement> {
  const report = await api.getEda(projectId);
  const gallery = h("div", { class: "gallery" });
  for (const hist of report.histograms) {
    gallery.append(svgNode(histogramSvg(hist)));
  }
  gallery.append(svgNode(correlationSvg(report.correlations)));
  for (const curve of report.loess_curves) {
    gallery.append(svgNode(loessSvg(curve)));
  }
  return h("div", {},
           h("h2", {}, `Exploration (${report.n_complete} complete rows,`
             + ` span ${report.span})`), gallery);
}

function svgNode(svg: string): HTMLElement {
  const wrap = h("div", { class: "chart-wrap" });
  wrap.innerHTML = svg;
  return wrap;
}

async function trainView(projectId: string, detail: ProjectDetail
                         ): Promise<HTMLElement> {
  const status = h("div", {});
  const card = h("div", {});
  const trainButton = h("button", {
    onclick: async () => {
      try {
        await api.train(projectId);
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, detail.stages.model ? "Retrain model" : "Train model");
  if (detail.stages.model) {
    const model = await api.getModel(projectId);
    const rows = model.feature_names.map((name, j) => h("tr", {},
      h("td", {}, name),
      h("td", {}, weight(model.weights[j])),
      h("td", {}, compact(model.means[j])),
      h("td", {}, compact(model.stds[j])),
      h("td", {}, model.vif?.[j] == null ? "∞"
        : compact(model.vif[j] as number))));
    card.append(
      h("h3", {}, "Model card"),
      h("p", {}, `RMSE ${model.metrics.rmse.toFixed(2)} · `
        + `R² ${model.metrics.r_squared.toFixed(4)} · `
        + `n ${model.metrics.n}`),
      h("table", { class: "data" },
        h("tr", {}, h("th", {}, "feature"), h("th", {}, "weight (per σ)"),
          h("th", {}, "mean"), h("th", {}, "std"), h("th", {}, "VIF")),
        ...rows));
  }
  return h("div", {}, h("h2", {}, "Model"),
           h("div", { class: "row" }, trainButton), status, card);
}

async function insightsView(projectId: string): Promise<HTMLElement> {
  const [model, insights, eda] = await Promise.all([
    api.getModel(projectId), api.getInsights(projectId),
    api.getEda(projectId),
  ]);
  const influences = h("table", { class: "data" },
    h("tr", {}, h("th", {}, "rank"), h("th", {}, "feature"),
      h("th", {}, "weight"), h("th", {}, "direction")),
    ...insights.influences.map(i => h("tr", {},
      h("td", {}, String(i.rank)), h("td", {}, i.feature_name),
      h("td", {}, weight(i.weight)), h("td", {}, i.direction))));
  return h("div", {},
           h("h2", {}, "Feature influence"), influences,
           h("h2", {}, "What-if explorer"),
           whatIfPanel(projectId, model, eda));
}

function whatIfPanel(projectId: string, model: ModelPayload,
                     eda: EdaReport): HTMLElement {
  const readout = h("p", { class: "readout" }, "predicted: — · delta: —");
  const chartSlot = h("div", { class: "chart-wrap" });
  let focused = model.feature_names[0];
  let lastScenario: WhatIfScenario | null = null;

  const redrawCurve = () => {
    const curve = eda.loess_curves.find(c => c.feature_name === focused);
    if (!curve) return;
    const j = model.feature_names.indexOf(focused);
    const marker = lastScenario === null ? undefined : {
      x: lastScenario.baseline[j] + lastScenario.deltas[j],
      y: lastScenario.predicted_new,
    };
    chartSlot.replaceChildren();
    chartSlot.innerHTML = loessSvg(curve, marker);
  };

  const explorer = new WhatIfExplorer(api, projectId, model, display => {
    readout.textContent = `predicted: ${display.predictedNew}%`
      + ` (baseline ${display.predictedBaseline}%)`
      + ` · delta: ${display.delta} points`;
    lastScenario = display.scenario;
    redrawCurve();
  }, error => readout.replaceChildren(errorBox(error)));

  const sliders = h("div", { class: "sliders" });
  for (const control of explorer.controls) {
    const valueLabel = h("span", { class: "muted" }, signedPoints(0));
    const slider = h("input", {
      type: "range",
      min: String(control.min),
      max: String(control.max),
      step: String(control.step),
      value: "0",
      oninput: (event: Event) => {
        const raw = Number((event.target as HTMLInputElement).value);
        valueLabel.textContent = `Δ ${compact(raw)}`;
        focused = control.name;
        explorer.setDelta(control.name, raw);
      },
    });
    sliders.append(h("label", { class: "slider" },
      `${control.name} (baseline ${compact(control.baseline)})`,
      slider, valueLabel));
  }
  const reset = h("button", {
    onclick: () => {
      explorer.resetDeltas();
      void render();
    },
  }, "Reset deltas");
  explorer.refresh();
  redrawCurve();
  return h("div", {}, sliders, h("div", { class: "row" }, reset),
           readout, chartSlot);
}

async function reportView(projectId: string, detail: ProjectDetail
                          ): Promise<HTMLElement> {
  const status = h("div", {});
  const container = h("div", {});
  const generate = h("button", {
    onclick: async () => {
      try {
        await api.generateReport(projectId);
        await render();
      } catch (error) {
        status.replaceChildren(errorBox(error));
      }
    },
  }, detail.stages.report ? "Regenerate report" : "Generate report");
  const report: DesignReport = detail.stages.report
    ? await api.getInsights(projectId)
    : { influences: [], scenarios: [], recommendations: [], caveats: [] };
  if (detail.stages.report) {
    container.append(renderReport(report));
  }
  return h("div", {}, h("h2", {}, "Design feedback"),
           h("div", { class: "row" }, generate), status, container);
}

function renderReport(report: DesignReport): HTMLElement {
  const recs = h("ul", {}, ...report.recommendations.map((rec, i) => {
    const scenario = report.scenarios[i];
    const caution = rec.caution ? " (interpret with caution)" : "";
    return h("li", {},
      h("strong", {}, `${rec.advice} ${rec.feature_name}`),
      `${caution}: one σ in the advised direction shifts predicted`
      + ` engagement by ${signedPoints(scenario.delta_engagement)} points`
      + ` (weight ${weight(rec.weight)})`);
  }));
  const caveats = h("ul", {},
    ...report.caveats.map(c => h("li", { class: "muted" }, c)));
  return h("div", {},
           h("h3", {}, "Recommendations"),
           report.recommendations.length ? recs
             : h("p", { class: "muted" }, "no feature clears materiality"),
           report.caveats.length ? h("h3", {}, "Caveats") : "", caveats);
}

window.addEventListener("hashchange", () => { void render(); });
void render();
