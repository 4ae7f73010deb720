/** Typed client for the verification service API. */

export type VerdictLabel = 'True' | 'False' | 'Other';
export type ExplanationLanguage = 'ar' | 'en';

export interface EvidenceItem {
  title: string;
  url: string;
  snippet: string;
  rank: number;
}

export interface VerifyRequest {
  claim: string;
  snippet_count: number;
  explanation_language: ExplanationLanguage;
}

export interface VerifyResponse {
  label: VerdictLabel;
  explanation: string;
  evidence: EvidenceItem[];
  snippet_count_used: number;
  stage_timings: Record<string, number>;
}

export interface AblateResponse {
  labels_by_count: Record<string, VerdictLabel>;
  explanation: string;
  evidence: EvidenceItem[];
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status?: number,
  ) {
    super(message);
  }
}

export interface ApiClient {
  verify(request: VerifyRequest): Promise<VerifyResponse>;
  ablate(claim: string, schedule?: number[]): Promise<AblateResponse>;
}

async function post<T>(fetchImpl: typeof fetch, url: string, body: unknown): Promise<T> {
  let response: Response;
  try {
    response = await fetchImpl(url, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  } catch (err) {
    throw new ApiError(`service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const payload = (await response.json()) as { detail?: unknown };
      if (payload && payload.detail) {
        detail = `${detail}: ${JSON.stringify(payload.detail)}`;
      }
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

/**
 * Build the API client. The base path is injectable at deploy time through
 * `window.__CLAIMCHECK_API_BASE__` (empty string means same-origin).
 */
export function makeApiClient(fetchImpl: typeof fetch, basePath = ''): ApiClient {
  return {
    verify: (request) => post<VerifyResponse>(fetchImpl, `${basePath}/api/verify`, request),
    ablate: (claim, schedule) =>
      post<AblateResponse>(
        fetchImpl,
        `${basePath}/api/ablate`,
        schedule ? { claim, schedule } : { claim },
      ),
  };
}
