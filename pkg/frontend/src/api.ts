// Typed client over the documented REST surface. No private endpoints and
// no optimistic mutation: every action returns the server-confirmed state.

import type {
  ActionResult,
  ChainVerification,
  InstanceDetail,
  InstanceSummary,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private headers(): Record<string, string> {
    return {
      Authorization: `Bearer ${this.token}`,
      'Content-Type': 'application/json',
    };
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: this.headers(),
    });
    if (response.status === 401) throw new SessionExpired();
    if (!response.ok) throw new ApiError(response.status, await errText(response));
    return (await response.json()) as T;
  }

  async listInstances(): Promise<InstanceSummary[]> {
    const body = await this.get<{ instances: InstanceSummary[] }>('/api/instances');
    return body.instances;
  }

  async instance(id: string): Promise<InstanceDetail> {
    return this.get<InstanceDetail>(`/api/instances/${id}`);
  }

  async verify(id: string): Promise<ChainVerification> {
    return this.get<ChainVerification>(`/api/instances/${id}/verify`);
  }

  async redactionMap(id: string): Promise<Record<string, string>> {
    const body = await this.get<{ tokens: Record<string, string> }>(
      `/api/instances/${id}/redaction-map`,
    );
    return body.tokens;
  }

  async start(caseId: string): Promise<{ instance_id: string; stream_url: string }> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/start`, {
      method: 'POST',
      headers: this.headers(),
      body: JSON.stringify({ case_id: caseId }),
    });
    if (!response.ok) throw new ApiError(response.status, await errText(response));
    return response.json();
  }

  /** accept | approve | reject; 409s surface as inline legality messages. */
  async act(
    id: string,
    action: 'accept' | 'approve' | 'reject' | 'requeue',
    body: Record<string, unknown> = {},
  ): Promise<ActionResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/instances/${id}/review/${action}`,
      { method: 'POST', headers: this.headers(), body: JSON.stringify(body) },
    );
    if (response.status === 401) throw new SessionExpired();
    if (!response.ok) {
      return { ok: false, status: response.status, message: await errText(response) };
    }
    return { ok: true, summary: (await response.json()) as InstanceSummary };
  }

  traceUrl(id: string): string {
    return `${this.baseUrl}/instances/${id}/trace`;
  }

  authHeader(): Record<string, string> {
    return { Authorization: `Bearer ${this.token}` };
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class SessionExpired extends Error {
  constructor() {
    super('session expired');
  }
}

async function errText(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === 'string' ? body.detail : JSON.stringify(body);
  } catch {
    return response.statusText;
  }
}
