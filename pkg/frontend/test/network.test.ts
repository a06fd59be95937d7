import { readFileSync } from "node:fs";
import { afterEach, describe, expect, it, vi } from "vitest";
import { getNetworkDoc } from "../src/api.js";
import {
  arcColor,
  arcsForFilter,
  forceLayout,
  nodePanel,
  topicIds,
} from "../src/network.js";
import { parseNetwork } from "../src/parse.js";

const TEXT = readFileSync(new URL("./fixtures/network.txt", import.meta.url), "utf-8");
const DOC = parseNetwork(TEXT);

describe("nodePanel", () => {
  it("exposes all six features and metrics from the export document", () => {
    const robert = DOC.nodes.find((n) => n.name === "Robert")!;
    const entries = nodePanel(robert);
    expect(entries.length).toBe(6);
    expect(entries.map((e) => e.label)).toEqual([
      "posts",
      "topics",
      "threads",
      "weighted degree (in/out)",
      "betweenness",
      "closeness",
    ]);
    // values come verbatim from the node record, no recomputation
    expect(entries[0].value).toBe(String(robert.postCount));
    expect(entries[1].value).toBe(String(robert.topicCount));
    expect(entries[2].value).toBe(String(robert.threadCount));
    expect(entries[3].value).toBe(
      `${robert.weightedInDegree}/${robert.weightedOutDegree}`,
    );
    expect(entries[4].value).toBe(String(robert.betweenness));
    expect(entries[5].value).toBe(String(robert.closeness));
  });

  it("produces a panel for every node in the document", () => {
    for (const node of DOC.nodes) {
      expect(nodePanel(node).length).toBe(6);
    }
  });
});

describe("topic filter", () => {
  // serves the fixture document, applying the topics= query the way the
  // API does, so the round trip below exercises the real query building
  function fakeFetch(input: RequestInfo | URL): Promise<Response> {
    const url = new URL(String(input), "http://test");
    const topics = url.searchParams.get("topics");
    let body = TEXT;
    if (topics !== null) {
      const keep = new Set(topics.split(",").filter((s) => s).map(Number));
      body = body
        .split("\n")
        .filter((line) => {
          if (!line.startsWith("arc\t")) return true;
          return keep.has(Number(line.split("\t")[3]));
        })
        .join("\n");
    }
    return Promise.resolve(new Response(body, { status: 200 }));
  }

  afterEach(() => vi.unstubAllGlobals());

  it("applying then clearing the filter restores the unfiltered arc count", async () => {
    vi.stubGlobal("fetch", vi.fn(fakeFetch));
    const before = parseNetwork(await getNetworkDoc("x1", null, false));
    const filtered = parseNetwork(await getNetworkDoc("x1", new Set([0]), false));
    expect(filtered.arcs.length).toBeLessThan(before.arcs.length);
    expect(filtered.arcs.every((a) => a.topicId === 0)).toBe(true);
    const after = parseNetwork(await getNetworkDoc("x1", null, false));
    expect(after.arcs.length).toBe(before.arcs.length);
    expect(after.arcs).toEqual(before.arcs);
  });

  it("an empty filter set removes every arc", async () => {
    vi.stubGlobal("fetch", vi.fn(fakeFetch));
    const doc = parseNetwork(await getNetworkDoc("x1", new Set(), false));
    expect(doc.arcs.length).toBe(0);
  });

  it("arcsForFilter mirrors the server-side rule for local redraws", () => {
    expect(arcsForFilter(DOC.arcs, null)).toEqual(DOC.arcs);
    const only0 = arcsForFilter(DOC.arcs, new Set([0]));
    expect(only0.every((a) => a.topicId === 0)).toBe(true);
    expect(only0.length).toBe(DOC.arcs.filter((a) => a.topicId === 0).length);
  });
});

describe("layout and palette", () => {
  it("assigns a deterministic in-bounds position to every node", () => {
    const a = forceLayout(DOC, 640, 420);
    const b = forceLayout(DOC, 640, 420);
    expect(a.size).toBe(DOC.nodes.length);
    for (const node of DOC.nodes) {
      const p = a.get(node.name)!;
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(640);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(420);
      expect(b.get(node.name)).toEqual(p);
    }
  });

  it("lists topic ids present in the document", () => {
    expect(topicIds(DOC)).toEqual([0, 1, 2]);
  });

  it("gives unassigned arcs a reserved gray", () => {
    expect(arcColor(-1)).toBe("#888888");
    expect(arcColor(0)).not.toBe(arcColor(1));
  });
});
