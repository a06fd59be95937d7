// Single-page dashboard: pick threads, launch an extraction, then read the
// expression cloud, the per-topic timeline and the reply network.
import * as api from "./api.js";
import { buildCloud } from "./cloud.js";
import {
  arcColor,
  arcsForFilter,
  forceLayout,
  nodePanel,
  topicIds,
} from "./network.js";
import {
  parseExtraction,
  parseNetwork,
  parseTimeline,
  type ExtractionDoc,
  type NetworkDoc,
} from "./parse.js";
import { buildSeries, linePoints } from "./timeline.js";

const SVG_NS = "http://www.w3.org/2000/svg";

interface ViewState {
  selectedThreadIds: Set<string>;
  activeExtractionId: string | null;
  topicFilter: Set<number> | null; // null = unfiltered
  keepIsolated: boolean;
  selectedNode: string | null;
  timelineIntervals: number;
  timelineGroupBy: string;
}

const state: ViewState = {
  selectedThreadIds: new Set(),
  activeExtractionId: null,
  topicFilter: null,
  keepIsolated: false,
  selectedNode: null,
  timelineIntervals: 8,
  timelineGroupBy: "forum",
};

let networkAbort: AbortController | null = null;
let timelineAbort: AbortController | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setStatus(text: string) {
  byId("status").textContent = text;
}

// -- corpus panel ------------------------------------------------------------

async function refreshThreads() {
  const list = byId("thread-list");
  list.textContent = "";
  const threads = await api.listThreads();
  if (threads.length === 0) {
    list.append(el("p", "empty", "No stored threads. Fetch some with the CLI."));
    return;
  }
  for (const t of threads) {
    const row = el("label", "thread-row");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = state.selectedThreadIds.has(t.thread_id);
    box.addEventListener("change", () => {
      if (box.checked) state.selectedThreadIds.add(t.thread_id);
      else state.selectedThreadIds.delete(t.thread_id);
    });
    row.append(box, ` ${t.title} `, el("span", "muted",
      `(${t.site_id}, ${t.post_count} posts)`));
    list.append(row);
  }
}

// -- extraction --------------------------------------------------------------

async function launchExtraction() {
  if (state.selectedThreadIds.size === 0) {
    setStatus("select at least one thread");
    return;
  }
  const algorithm = (byId("algorithm") as HTMLSelectElement).value;
  const k = Number((byId("param-k") as HTMLInputElement).value);
  const seed = Number((byId("param-seed") as HTMLInputElement).value);
  setStatus("starting extraction...");
  try {
    const ticket = await api.createExtraction(
      algorithm, [...state.selectedThreadIds], { k, seed });
    await pollJob(ticket.job_id);
    state.activeExtractionId = ticket.extraction_id ?? null;
    state.topicFilter = null;
    state.selectedNode = null;
    setStatus(`extraction ${state.activeExtractionId} done`);
    await renderAll();
  } catch (err) {
    setStatus(`extraction failed: ${(err as Error).message}`);
  }
}

async function pollJob(jobId: string): Promise<void> {
  for (;;) {
    const job = await api.getJob(jobId);
    if (job.status === "done") return;
    if (job.status === "failed") throw new Error(job.error ?? "job failed");
    setStatus(`extraction ${job.status}...`);
    await new Promise((r) => setTimeout(r, 300));
  }
}

// -- cloud -------------------------------------------------------------------

function renderCloud(doc: ExtractionDoc) {
  const panel = byId("cloud");
  panel.textContent = "";
  const items = buildCloud(doc.topics);
  if (items.length === 0) {
    panel.append(el("p", "empty", "No expressions in this extraction."));
    return;
  }
  for (const item of items) {
    const span = el("span", "cloud-item", item.text);
    span.style.fontSize = `${item.size}px`;
    span.style.color = arcColor(item.topicId);
    span.title = `${item.label}: score ${item.score}`;
    panel.append(span, " ");
  }
}

// -- timeline ----------------------------------------------------------------

async function renderTimeline() {
  if (!state.activeExtractionId) return;
  timelineAbort?.abort();
  timelineAbort = new AbortController();
  const panel = byId("timeline");
  let rows;
  try {
    rows = parseTimeline(await api.getTimelineDoc(
      state.activeExtractionId, state.timelineIntervals,
      state.timelineGroupBy, timelineAbort.signal));
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    panel.textContent = "";
    panel.append(el("p", "empty", `timeline unavailable: ${(err as Error).message}`));
    return;
  }
  panel.textContent = "";
  const series = buildSeries(rows);
  const width = 640;
  const height = 200;
  const yMax = Math.max(...series.flatMap((s) => s.counts), 1);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "chart");
  for (const line of series) {
    const pts = linePoints(line.counts, width, height, yMax);
    const poly = document.createElementNS(SVG_NS, "polyline");
    poly.setAttribute("points", pts.map((p) => `${p.x},${p.y}`).join(" "));
    poly.setAttribute("fill", "none");
    poly.setAttribute("stroke", arcColor(line.topic));
    poly.setAttribute("stroke-width", "2");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${line.group} / topic #${line.topic} (${line.total} posts)`;
    poly.append(title);
    svg.append(poly);
  }
  panel.append(svg);
  const legend = el("div", "legend");
  for (const line of series) {
    const chip = el("span", "chip", `${line.group} #${line.topic}`);
    chip.style.borderColor = arcColor(line.topic);
    legend.append(chip);
  }
  panel.append(legend);
}

// -- network -----------------------------------------------------------------

function renderFilterControls(allTopics: number[]) {
  const controls = byId("topic-filter");
  controls.textContent = "";
  const all = el("label");
  const allBox = el("input") as HTMLInputElement;
  allBox.type = "checkbox";
  allBox.checked = state.topicFilter === null;
  allBox.addEventListener("change", () => {
    state.topicFilter = allBox.checked ? null : new Set(allTopics);
    void renderNetwork();
  });
  all.append(allBox, " all topics");
  controls.append(all);
  for (const t of allTopics) {
    const label = el("label");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = state.topicFilter === null || state.topicFilter.has(t);
    box.addEventListener("change", () => {
      if (state.topicFilter === null) state.topicFilter = new Set(allTopics);
      if (box.checked) state.topicFilter.add(t);
      else state.topicFilter.delete(t);
      void renderNetwork();
    });
    label.append(box, ` #${t}`);
    label.style.color = arcColor(t);
    controls.append(label);
  }
  const iso = el("label");
  const isoBox = el("input") as HTMLInputElement;
  isoBox.type = "checkbox";
  isoBox.checked = state.keepIsolated;
  isoBox.addEventListener("change", () => {
    state.keepIsolated = isoBox.checked;
    void renderNetwork();
  });
  iso.append(isoBox, " keep isolated nodes");
  controls.append(iso);
}

function renderNodePanel(doc: NetworkDoc) {
  const panel = byId("node-panel");
  panel.textContent = "";
  const node = doc.nodes.find((n) => n.name === state.selectedNode);
  if (!node) {
    panel.append(el("p", "empty", "Click a node to inspect it."));
    return;
  }
  panel.append(el("h3", undefined, node.name));
  const dl = el("dl");
  for (const entry of nodePanel(node)) {
    dl.append(el("dt", undefined, entry.label), el("dd", undefined, entry.value));
  }
  panel.append(dl);
}

async function renderNetwork() {
  if (!state.activeExtractionId) return;
  networkAbort?.abort();
  networkAbort = new AbortController();
  let doc: NetworkDoc;
  try {
    doc = parseNetwork(await api.getNetworkDoc(
      state.activeExtractionId, state.topicFilter, state.keepIsolated,
      networkAbort.signal));
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    byId("graph").textContent = `network unavailable: ${(err as Error).message}`;
    return;
  }
  if (state.selectedNode && !doc.nodes.some((n) => n.name === state.selectedNode)) {
    state.selectedNode = null;
  }
  const graph = byId("graph");
  graph.textContent = "";
  if (doc.nodes.length === 0) {
    graph.append(el("p", "empty", "Empty network for this filter."));
    renderNodePanel(doc);
    return;
  }
  const width = 640;
  const height = 420;
  const pos = forceLayout(doc, width, height);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "graph");
  const defs = document.createElementNS(SVG_NS, "defs");
  const marker = document.createElementNS(SVG_NS, "marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("viewBox", "0 0 10 10");
  marker.setAttribute("refX", "18");
  marker.setAttribute("refY", "5");
  marker.setAttribute("markerWidth", "6");
  marker.setAttribute("markerHeight", "6");
  marker.setAttribute("orient", "auto-start-reverse");
  const tip = document.createElementNS(SVG_NS, "path");
  tip.setAttribute("d", "M 0 0 L 10 5 L 0 10 z");
  tip.setAttribute("fill", "#555");
  marker.append(tip);
  defs.append(marker);
  svg.append(defs);

  for (const arc of arcsForFilter(doc.arcs, null)) {
    const a = pos.get(arc.src);
    const b = pos.get(arc.dst);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("stroke", arcColor(arc.topicId));
    line.setAttribute("stroke-width", String(Math.min(1 + arc.weight, 5)));
    line.setAttribute("marker-end", "url(#arrow)");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent =
      `${arc.src} -> ${arc.dst} (topic #${arc.topicId}, weight ${arc.weight})`;
    line.append(title);
    svg.append(line);
  }

  for (const node of doc.nodes) {
    const p = pos.get(node.name);
    if (!p) continue;
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("class", "node");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("r", String(6 + Math.min(node.postCount, 8)));
    circle.setAttribute(
      "fill", node.name === state.selectedNode ? "#d62728" : "#4e79a7");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(p.x + 10));
    label.setAttribute("y", String(p.y + 4));
    label.textContent = node.name;
    g.append(circle, label);
    g.addEventListener("click", () => {
      state.selectedNode = node.name;
      renderNodePanel(doc);
      void renderNetwork();
    });
    // dragging re-pins the node locally; layout state is view-only
    g.addEventListener("pointerdown", (down) => {
      const move = (ev: PointerEvent) => {
        const rect = svg.getBoundingClientRect();
        const x = ((ev.clientX - rect.left) / rect.width) * width;
        const y = ((ev.clientY - rect.top) / rect.height) * height;
        circle.setAttribute("cx", String(x));
        circle.setAttribute("cy", String(y));
        label.setAttribute("x", String(x + 10));
        label.setAttribute("y", String(y + 4));
      };
      const up = () => {
        window.removeEventListener("pointermove", move);
        window.removeEventListener("pointerup", up);
      };
      window.addEventListener("pointermove", move);
      window.addEventListener("pointerup", up);
      down.preventDefault();
    });
    svg.append(g);
  }
  graph.append(svg);

  // filter controls are rebuilt from the unfiltered topic universe
  const unfiltered = state.topicFilter === null
    ? doc
    : parseNetwork(await api.getNetworkDoc(
        state.activeExtractionId, null, state.keepIsolated));
  renderFilterControls(topicIds(unfiltered));
  renderNodePanel(doc);
}

// -- top-level ---------------------------------------------------------------

async function renderAll() {
  if (!state.activeExtractionId) return;
  const meta = await api.getExtraction(state.activeExtractionId);
  if (meta.status !== "done") {
    setStatus(`extraction is ${meta.status}`);
    return;
  }
  const doc = parseExtraction(await api.getTopicsDoc(state.activeExtractionId));
  renderCloud(doc);
  await renderTimeline();
  await renderNetwork();
}

export function init() {
  byId("refresh-threads").addEventListener("click", () => void refreshThreads());
  byId("run-extraction").addEventListener("click", () => void launchExtraction());
  const intervals = byId("timeline-intervals") as HTMLSelectElement;
  intervals.addEventListener("change", () => {
    state.timelineIntervals = Number(intervals.value);
    void renderTimeline();
  });
  const groupBy = byId("timeline-group-by") as HTMLSelectElement;
  groupBy.addEventListener("change", () => {
    state.timelineGroupBy = groupBy.value;
    void renderTimeline();
  });
  void refreshThreads();
}

init();
