import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { parseTimeline } from "../src/parse.js";
import { buildSeries, linePoints } from "../src/timeline.js";

const ROWS = parseTimeline(
  readFileSync(new URL("./fixtures/timeline.tsv", import.meta.url), "utf-8"),
);

describe("buildSeries", () => {
  const series = buildSeries(ROWS);

  it("builds one line per (group, topic) with the full interval axis", () => {
    const keys = new Set(ROWS.map((r) => `${r.group} ${r.topic}`));
    expect(series.length).toBe(keys.size);
    const n = Math.max(...ROWS.map((r) => r.interval)) + 1;
    for (const line of series) {
      expect(line.counts.length).toBe(n);
    }
  });

  it("preserves every count from the document", () => {
    for (const r of ROWS) {
      const line = series.find((l) => l.group === r.group && l.topic === r.topic)!;
      expect(line.counts[r.interval]).toBe(r.count);
    }
  });

  it("totals match the sum of the document counts", () => {
    const docTotal = ROWS.reduce((acc, r) => acc + r.count, 0);
    const lineTotal = series.reduce((acc, l) => acc + l.total, 0);
    expect(lineTotal).toBe(docTotal);
  });

  it("is sorted by group then topic", () => {
    for (let i = 1; i < series.length; i++) {
      const a = series[i - 1];
      const b = series[i];
      expect(
        a.group < b.group || (a.group === b.group && a.topic < b.topic),
      ).toBe(true);
    }
  });
});

describe("linePoints", () => {
  it("spans the chart width and maps counts to height", () => {
    const pts = linePoints([0, 2, 4], 100, 50, 4);
    expect(pts[0]).toEqual({ x: 0, y: 50 });
    expect(pts[1]).toEqual({ x: 50, y: 25 });
    expect(pts[2]).toEqual({ x: 100, y: 0 });
  });

  it("centers a single point", () => {
    expect(linePoints([3], 100, 50, 3)[0]).toEqual({ x: 50, y: 0 });
  });
});
