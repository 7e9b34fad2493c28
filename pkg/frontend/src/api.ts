// Typed fetch client. Explain-path requests share one AbortController so a
// newer submission cancels whatever is still in flight.

import type {
  ApiErrorBody,
  CounterfactualRequest,
  CounterfactualSetResponse,
  ImportanceReport,
  LocalImportanceRequest,
  PredictResponse,
  Schema,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly kind: string,
    public readonly detail: string,
    public readonly field?: string,
  ) {
    super(`${kind}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const text = await resp.text();
  let body: unknown;
  try {
    body = text ? JSON.parse(text) : {};
  } catch {
    throw new ApiError(resp.status, 'BadResponse', `non-JSON response: ${text.slice(0, 80)}`);
  }
  if (!resp.ok) {
    const err = body as ApiErrorBody;
    throw new ApiError(resp.status, err.error ?? 'HttpError', err.detail ?? resp.statusText, err.field);
  }
  return body as T;
}

function post(payload: unknown, signal?: AbortSignal): RequestInit {
  return {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(payload),
    signal,
  };
}

export class ApiClient {
  private explainController: AbortController | null = null;

  constructor(private readonly baseUrl: string) {}

  async fetchSchema(): Promise<Schema> {
    return request<Schema>(`${this.baseUrl}/schema`);
  }

  async predict(values: number[]): Promise<PredictResponse> {
    return request<PredictResponse>(`${this.baseUrl}/predict`, post({ values }));
  }

  /**
   * Counterfactuals followed by local importance, as one cancellable unit.
   * Starting a new explain aborts the previous one mid-flight.
   */
  async explain(
    cfReq: CounterfactualRequest,
  ): Promise<{ cfs: CounterfactualSetResponse; importance: ImportanceReport }> {
    this.explainController?.abort();
    const controller = new AbortController();
    this.explainController = controller;
    const cfs = await request<CounterfactualSetResponse>(
      `${this.baseUrl}/counterfactuals`,
      post(cfReq, controller.signal),
    );
    const impReq: LocalImportanceRequest = {
      values: cfReq.values,
      k: cfReq.k,
      immutable: cfReq.immutable,
      seed: cfReq.seed,
    };
    const importance = await request<ImportanceReport>(
      `${this.baseUrl}/importance/local`,
      post(impReq, controller.signal),
    );
    if (this.explainController === controller) {
      this.explainController = null;
    }
    return { cfs, importance };
  }

  async fetchGlobalImportance(): Promise<ImportanceReport> {
    return request<ImportanceReport>(`${this.baseUrl}/importance/global`);
  }
}

export function isAbort(e: unknown): boolean {
  return e instanceof DOMException
    ? e.name === 'AbortError'
    : e instanceof Error && e.name === 'AbortError';
}
