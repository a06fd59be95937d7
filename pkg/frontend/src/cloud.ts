// Expression cloud sizing: font size grows linearly with score across the
// rendered set, colored/grouped by topic. All numbers come straight from
// the extraction document; nothing is recomputed client-side.
import type { Topic } from "./parse.js";

export const DEFAULT_FONT_MIN = 10;
export const DEFAULT_FONT_MAX = 30;

export function fontSize(
  score: number,
  sMin: number,
  sMax: number,
  fMin: number = DEFAULT_FONT_MIN,
  fMax: number = DEFAULT_FONT_MAX,
): number {
  if (sMax === sMin) return fMax;
  return fMin + ((fMax - fMin) * (score - sMin)) / (sMax - sMin);
}

export interface CloudItem {
  text: string;
  score: number;
  size: number;
  topicId: number;
  label: string;
}

export function buildCloud(
  topics: Topic[],
  fMin: number = DEFAULT_FONT_MIN,
  fMax: number = DEFAULT_FONT_MAX,
): CloudItem[] {
  const scores = topics.flatMap((t) => t.expressions.map((e) => e.score));
  if (scores.length === 0) return [];
  const sMin = Math.min(...scores);
  const sMax = Math.max(...scores);
  const items: CloudItem[] = [];
  for (const t of topics) {
    for (const e of t.expressions) {
      items.push({
        text: e.text,
        score: e.score,
        size: fontSize(e.score, sMin, sMax, fMin, fMax),
        topicId: t.topicId,
        label: t.label,
      });
    }
  }
  items.sort((a, b) => b.score - a.score || a.text.localeCompare(b.text));
  return items;
}
