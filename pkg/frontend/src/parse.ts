// Parsers for the three documents the API serves. All three formats are
// line-oriented, so they parse the same way in the browser and in node.

export interface Expression {
  text: string;
  score: number;
}

export interface Topic {
  topicId: number;
  label: string;
  expressions: Expression[];
}

export interface ExtractionDoc {
  algorithm: string;
  seed: number;
  params: Record<string, string>;
  topics: Topic[];
  assignments: Map<string, number[]>;
}

function unescapeXml(s: string): string {
  return s
    .replace(/&#10;/g, "\n")
    .replace(/&#13;/g, "\r")
    .replace(/&#9;/g, "\t")
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&amp;/g, "&");
}

function attrs(line: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const m of line.matchAll(/([\w-]+)="([^"]*)"/g)) {
    out[m[1]] = unescapeXml(m[2]);
  }
  return out;
}

export function parseExtraction(text: string): ExtractionDoc {
  const doc: ExtractionDoc = {
    algorithm: "",
    seed: 0,
    params: {},
    topics: [],
    assignments: new Map(),
  };
  let topic: Topic | null = null;
  for (const line of text.split("\n")) {
    const t = line.trim();
    if (t.startsWith("<extraction ")) {
      const a = attrs(t);
      doc.algorithm = a["algorithm"] ?? "";
      doc.seed = Number(a["seed"] ?? 0);
    } else if (t.startsWith("<param ")) {
      const a = attrs(t);
      doc.params[a["name"]] = a["value"];
    } else if (t.startsWith("<topic ")) {
      const a = attrs(t);
      topic = { topicId: Number(a["id"]), label: a["label"] ?? "", expressions: [] };
      doc.topics.push(topic);
    } else if (t.startsWith("<expression ") && topic) {
      const a = attrs(t);
      const m = t.match(/>(.*)<\/expression>/);
      topic.expressions.push({
        text: unescapeXml(m ? m[1] : ""),
        score: Number(a["score"]),
      });
    } else if (t === "</topic>") {
      topic = null;
    } else if (t.startsWith("<post ")) {
      const a = attrs(t);
      const topics = (a["topics"] ?? "")
        .split(",")
        .filter((x) => x !== "")
        .map(Number);
      doc.assignments.set(a["id"], topics);
    }
  }
  if (!doc.algorithm) throw new Error("not an extraction document");
  return doc;
}

export interface NetworkNode {
  name: string;
  postCount: number;
  topicCount: number;
  threadCount: number;
  weightedInDegree: number;
  weightedOutDegree: number;
  betweenness: number;
  closeness: number;
}

export interface NetworkArc {
  src: string;
  dst: string;
  topicId: number;
  weight: number;
}

export interface NetworkDoc {
  nodes: NetworkNode[];
  arcs: NetworkArc[];
}

const NETWORK_HEADER = "commentwatcher-network 1";

function unescapeField(s: string): string {
  let out = "";
  for (let i = 0; i < s.length; i++) {
    if (s[i] === "\\" && i + 1 < s.length) {
      const c = s[i + 1];
      out += c === "t" ? "\t" : c === "n" ? "\n" : c;
      i++;
    } else {
      out += s[i];
    }
  }
  return out;
}

export function parseNetwork(text: string): NetworkDoc {
  const lines = text.split("\n");
  if (lines[0] !== NETWORK_HEADER) throw new Error("not a network document");
  const doc: NetworkDoc = { nodes: [], arcs: [] };
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const f = line.split("\t");
    if (f[0] === "node") {
      doc.nodes.push({
        name: unescapeField(f[1]),
        postCount: Number(f[2]),
        topicCount: Number(f[3]),
        threadCount: Number(f[4]),
        weightedInDegree: Number(f[5]),
        weightedOutDegree: Number(f[6]),
        betweenness: Number(f[7]),
        closeness: Number(f[8]),
      });
    } else if (f[0] === "arc") {
      doc.arcs.push({
        src: unescapeField(f[1]),
        dst: unescapeField(f[2]),
        topicId: Number(f[3]),
        weight: Number(f[4]),
      });
    } else {
      throw new Error(`unknown record ${f[0]}`);
    }
  }
  return doc;
}

export interface TimelineRow {
  group: string;
  topic: number;
  interval: number;
  start: string;
  end: string;
  count: number;
}

const TIMELINE_HEADER = "group\ttopic\tinterval\tstart\tend\tcount";

export function parseTimeline(text: string): TimelineRow[] {
  const lines = text.split("\n");
  if (lines[0] !== TIMELINE_HEADER) throw new Error("not a timeline document");
  const rows: TimelineRow[] = [];
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const [group, topic, interval, start, end, count] = line.split("\t");
    rows.push({
      group,
      topic: Number(topic),
      interval: Number(interval),
      start,
      end,
      count: Number(count),
    });
  }
  return rows;
}
