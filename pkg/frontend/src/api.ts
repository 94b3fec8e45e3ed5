// Typed client for the gateway's v1 JSON API. The item payload is checked
// strictly before it reaches any rendering code: only the documented fields
// may be present, so a payload leaking true system identities (or anything
// else) is rejected, not displayed.

export interface OutputView {
  label: string;
  text: string;
}

export interface ItemPayload {
  segment_id: string;
  source: string;
  reference: string;
  outputs: OutputView[];
}

export interface Progress {
  done: number;
  total: number;
}

export interface NextResponse {
  done: boolean;
  progress: Progress;
  item?: ItemPayload;
  report_url?: string;
}

export interface AnnotationRecord {
  session: string;
  segment_id: string;
  blind_label: string;
  annotator: string;
  kind: "mqm" | "sqm";
  category?: string;
  sub_category?: string;
  severity?: string;
  level?: number;
  span?: [number, number];
  note?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: string = "",
  ) {
    super(message);
  }
}

export class NetworkError extends Error {}

const ITEM_KEYS = ["segment_id", "source", "reference", "outputs"];
const OUTPUT_KEYS = ["label", "text"];

export function checkItemPayload(raw: unknown): ItemPayload {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("item payload is not an object");
  }
  const obj = raw as Record<string, unknown>;
  const extra = Object.keys(obj).filter((k) => !ITEM_KEYS.includes(k));
  if (extra.length) {
    throw new Error(`item payload carries undocumented fields: ${extra.join(", ")}`);
  }
  for (const key of ["segment_id", "source", "reference"]) {
    if (typeof obj[key] !== "string") throw new Error(`item payload ${key} missing`);
  }
  if (!Array.isArray(obj.outputs) || obj.outputs.length === 0) {
    throw new Error("item payload has no outputs");
  }
  const outputs = obj.outputs.map((entry) => {
    const out = entry as Record<string, unknown>;
    const bad = Object.keys(out).filter((k) => !OUTPUT_KEYS.includes(k));
    if (bad.length) {
      throw new Error(`output carries undocumented fields: ${bad.join(", ")}`);
    }
    if (typeof out.label !== "string" || !/^[A-Z]$/.test(out.label)) {
      throw new Error(`output label ${String(out.label)} is not a blind label`);
    }
    if (typeof out.text !== "string") throw new Error("output text missing");
    return { label: out.label, text: out.text };
  });
  return {
    segment_id: obj.segment_id as string,
    source: obj.source as string,
    reference: obj.reference as string,
    outputs,
  };
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // non-JSON bodies are treated as empty
    }
    if (!resp.ok) {
      const errObj = (body as { error?: { code?: string; message?: string; detail?: string } })
        ?.error;
      throw new ApiError(
        resp.status,
        errObj?.code ?? "unknown",
        errObj?.message ?? `request failed with ${resp.status}`,
        errObj?.detail ?? "",
      );
    }
    return body;
  }

  async health(): Promise<void> {
    await this.request("/v1/health");
  }

  async createSession(payload: {
    corpus: Array<[string, string]>;
    systems: Record<string, string[]>;
    n: number;
    seed: number;
    session_id: string;
  }): Promise<{ session_id: string; n_items: number }> {
    const body = (await this.request("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    })) as { session_id: string; n_items: number };
    return body;
  }

  async next(session: string, annotator: string): Promise<NextResponse> {
    const raw = (await this.request(
      `/v1/sessions/${encodeURIComponent(session)}/next?annotator=${encodeURIComponent(annotator)}`,
    )) as Record<string, unknown>;
    const progress = raw.progress as Progress;
    if (raw.done) {
      return { done: true, progress, report_url: raw.report_url as string };
    }
    return { done: false, progress, item: checkItemPayload(raw.item) };
  }

  async postAnnotation(record: AnnotationRecord): Promise<void> {
    await this.request("/v1/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  async report(session: string): Promise<Record<string, unknown>> {
    const body = (await this.request(
      `/v1/sessions/${encodeURIComponent(session)}/report`,
    )) as { report: Record<string, unknown> };
    return body.report;
  }
}
