// Thin typed client over the HTTP API. Callers pass an AbortSignal so a
// parameter change mid-flight cancels the superseded request.

export interface ThreadSummary {
  thread_id: string;
  title: string;
  site_id: string;
  source_url: string;
  post_count: number;
  fetched_at: string;
  revision: number;
}

export interface ExtractionMeta {
  extraction_id: string;
  thread_ids: string[];
  algorithm: string;
  status: string;
  error: string | null;
}

export interface JobTicket {
  job_id: string;
  kind: string;
  status: string;
  extraction_id?: string;
  error?: string;
  report?: unknown;
}

const BASE = "/api";

async function getJson<T>(path: string, signal?: AbortSignal): Promise<T> {
  const resp = await fetch(`${BASE}${path}`, { signal });
  if (!resp.ok) throw new Error(`${path}: HTTP ${resp.status}`);
  return (await resp.json()) as T;
}

async function getText(path: string, signal?: AbortSignal): Promise<string> {
  const resp = await fetch(`${BASE}${path}`, { signal });
  if (!resp.ok) throw new Error(`${path}: HTTP ${resp.status}`);
  return await resp.text();
}

export async function listThreads(signal?: AbortSignal): Promise<ThreadSummary[]> {
  const body = await getJson<{ threads: ThreadSummary[] }>("/threads", signal);
  return body.threads;
}

export async function createExtraction(
  algorithm: string,
  threadIds: string[],
  params: Record<string, unknown>,
): Promise<JobTicket> {
  const resp = await fetch(`${BASE}/extractions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ algorithm, thread_ids: threadIds, params }),
  });
  const body = await resp.json();
  if (!resp.ok) throw new Error(body.message || body.error || `HTTP ${resp.status}`);
  return body as JobTicket;
}

export function getJob(jobId: string): Promise<JobTicket> {
  return getJson(`/jobs/${jobId}`);
}

export function getExtraction(id: string): Promise<ExtractionMeta> {
  return getJson(`/extractions/${id}`);
}

export function getTopicsDoc(id: string, signal?: AbortSignal): Promise<string> {
  return getText(`/extractions/${id}/topics`, signal);
}

export function getNetworkDoc(
  id: string,
  topicFilter: Set<number> | null,
  keepIsolated: boolean,
  signal?: AbortSignal,
): Promise<string> {
  const params = new URLSearchParams();
  if (topicFilter !== null) params.set("topics", [...topicFilter].join(","));
  if (keepIsolated) params.set("keep_isolated", "true");
  const qs = params.toString();
  return getText(`/extractions/${id}/network${qs ? "?" + qs : ""}`, signal);
}

export function getTimelineDoc(
  id: string,
  intervals: number,
  groupBy: string,
  signal?: AbortSignal,
): Promise<string> {
  return getText(
    `/extractions/${id}/timeline?intervals=${intervals}&group_by=${groupBy}`,
    signal,
  );
}
