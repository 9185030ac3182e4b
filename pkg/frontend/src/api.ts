/** Typed client for the liquidskin HTTP session service.
 *
 * The UI never computes impedance itself; every number it renders came out
 * of one of these endpoints.
 */

export interface SessionInfo {
  id: string;
  pair: string;
  samplePeriodS: number;
  seed: number;
}

export interface Sample {
  index: number;
  t_s: number;
  R_ohm: number;
  X_ohm: number;
}

export interface SeriesPage {
  samples: Sample[];
  head: number;
  samplePeriodS: number;
}

export interface FamilyMap {
  pair: string;
  families: Record<string, string>;
}

export interface GateLevels {
  O00: number;
  O01: number;
  O10: number;
  O11: number;
}

export interface LogicReport {
  cellA: string;
  cellB: string;
  outputs_ohm: GateLevels;
  uncertainties_ohm: GateLevels;
  realizableGates: string[];
  exampleThresholds: { T_ohm: number; truthTable: number[]; gate: string }[];
}

export interface NetworkDoc {
  nodes: { id: number; x_mm: number; y_mm: number; label?: string }[];
  edges: { a: number; b: number }[];
  electrodes: Record<string, number>;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type Fetch = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: Fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const doc = (await response.json()) as { detail?: string };
        if (doc.detail) detail = doc.detail;
      } catch {
        /* non-JSON error body: keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  createSession(options: {
    seed?: number;
    pair?: string;
    samplePeriodS?: number;
    noiseSigmaOhm?: number;
  } = {}): Promise<SessionInfo> {
    return this.request("POST", "/api/sessions", options);
  }

  network(sessionId: string): Promise<NetworkDoc> {
    return this.request("GET", `/api/sessions/${sessionId}/network`);
  }

  press(sessionId: string, cell: string, action: "down" | "up", massG = 100): Promise<unknown> {
    return this.request("POST", `/api/sessions/${sessionId}/press`, {
      cell,
      action,
      mass_g: massG,
    });
  }

  series(sessionId: string, sinceSample = 0): Promise<SeriesPage> {
    return this.request("GET", `/api/sessions/${sessionId}/series?sinceSample=${sinceSample}`);
  }

  families(sessionId: string, pair?: string): Promise<FamilyMap> {
    const query = pair ? `?pair=${encodeURIComponent(pair)}` : "";
    return this.request("GET", `/api/sessions/${sessionId}/families${query}`);
  }

  logic(sessionId: string, cells?: { cellA: string; cellB: string }): Promise<LogicReport> {
    return this.request("POST", `/api/sessions/${sessionId}/logic`, cells ?? {});
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request("DELETE", `/api/sessions/${sessionId}`);
  }
}
