// Network view model: node feature panel, topic palette and a small
// deterministic force-directed layout. Every displayed value is read from
// the export document; only the layout is computed here.
import type { NetworkArc, NetworkDoc, NetworkNode } from "./parse.js";

export interface PanelEntry {
  label: string;
  value: string;
}

// the six per-node features/metrics of the export document, in display
// order: posts, topics, threads, weighted degree (in/out), betweenness,
// closeness
export function nodePanel(node: NetworkNode): PanelEntry[] {
  return [
    { label: "posts", value: String(node.postCount) },
    { label: "topics", value: String(node.topicCount) },
    { label: "threads", value: String(node.threadCount) },
    {
      label: "weighted degree (in/out)",
      value: `${node.weightedInDegree}/${node.weightedOutDegree}`,
    },
    { label: "betweenness", value: String(node.betweenness) },
    { label: "closeness", value: String(node.closeness) },
  ];
}

export function topicIds(doc: NetworkDoc): number[] {
  return [...new Set(doc.arcs.map((a) => a.topicId))].sort((a, b) => a - b);
}

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

export function arcColor(topicId: number): string {
  if (topicId < 0) return "#888888";
  return PALETTE[topicId % PALETTE.length];
}

export interface LayoutPoint {
  x: number;
  y: number;
}

// xorshift-ish deterministic generator so layouts are stable across renders
function makeRng(seed: number): () => number {
  let s = seed >>> 0 || 1;
  return () => {
    s ^= s << 13;
    s ^= s >>> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 4294967296;
  };
}

export function forceLayout(
  doc: NetworkDoc,
  width: number,
  height: number,
  iterations = 150,
  seed = 42,
): Map<string, LayoutPoint> {
  const names = doc.nodes.map((n) => n.name);
  const n = names.length;
  const pos = new Map<string, LayoutPoint>();
  if (n === 0) return pos;
  const rng = makeRng(seed);
  const xs = new Float64Array(n);
  const ys = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    xs[i] = (0.2 + 0.6 * rng()) * width;
    ys[i] = (0.2 + 0.6 * rng()) * height;
  }
  const index = new Map(names.map((nm, i) => [nm, i]));
  const edges: Array<[number, number]> = [];
  const seen = new Set<string>();
  for (const a of doc.arcs) {
    const u = index.get(a.src);
    const v = index.get(a.dst);
    if (u === undefined || v === undefined || u === v) continue;
    const key = u < v ? `${u}:${v}` : `${v}:${u}`;
    if (!seen.has(key)) {
      seen.add(key);
      edges.push([u, v]);
    }
  }
  const area = width * height;
  const k = Math.sqrt(area / n);
  let temp = Math.max(width, height) / 8;
  const dx = new Float64Array(n);
  const dy = new Float64Array(n);
  for (let it = 0; it < iterations; it++) {
    dx.fill(0);
    dy.fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let ox = xs[i] - xs[j];
        let oy = ys[i] - ys[j];
        let d2 = ox * ox + oy * oy;
        if (d2 < 1e-6) {
          ox = 0.01 * (i - j);
          oy = 0.01;
          d2 = ox * ox + oy * oy;
        }
        const rep = (k * k) / d2;
        dx[i] += ox * rep;
        dy[i] += oy * rep;
        dx[j] -= ox * rep;
        dy[j] -= oy * rep;
      }
    }
    for (const [u, v] of edges) {
      const ox = xs[u] - xs[v];
      const oy = ys[u] - ys[v];
      const d = Math.sqrt(ox * ox + oy * oy) || 1e-3;
      const att = (d * d) / k / d;
      dx[u] -= ox * att;
      dy[u] -= oy * att;
      dx[v] += ox * att;
      dy[v] += oy * att;
    }
    for (let i = 0; i < n; i++) {
      const d = Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]) || 1e-9;
      const step = Math.min(d, temp);
      xs[i] += (dx[i] / d) * step;
      ys[i] += (dy[i] / d) * step;
      xs[i] = Math.min(width - 20, Math.max(20, xs[i]));
      ys[i] = Math.min(height - 20, Math.max(20, ys[i]));
    }
    temp *= 0.95;
  }
  for (let i = 0; i < n; i++) pos.set(names[i], { x: xs[i], y: ys[i] });
  return pos;
}

export function arcsForFilter(
  arcs: NetworkArc[],
  filter: Set<number> | null,
): NetworkArc[] {
  if (filter === null) return arcs;
  return arcs.filter((a) => filter.has(a.topicId));
}
