// Thin typed client for the planning backend; every method is one request.

import type {
  ChooseResponse,
  CompileResponse,
  PolicyGraph,
  ProblemBundle,
  Snapshot,
  SolveStatus,
  UploadResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface ApiClient {
  uploadProblem(bundle: ProblemBundle): Promise<UploadResponse>;
  compile(problem: string): Promise<CompileResponse>;
  solve(problem: string): Promise<SolveStatus>;
  pollSolve(problem: string): Promise<SolveStatus>;
  policyGraph(problem: string): Promise<PolicyGraph>;
  createSession(problem: string, groundTruth: string): Promise<Snapshot>;
  getSession(session: string): Promise<Snapshot>;
  choose(session: string, action: string, successor: number): Promise<ChooseResponse>;
  deleteSession(session: string): Promise<void>;
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText;
  }
}

export class HttpApiClient implements ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  uploadProblem(bundle: ProblemBundle): Promise<UploadResponse> {
    return this.request('POST', '/problems', bundle);
  }

  compile(problem: string): Promise<CompileResponse> {
    return this.request('POST', `/problems/${problem}/compile`);
  }

  solve(problem: string): Promise<SolveStatus> {
    return this.request('POST', `/problems/${problem}/solve`);
  }

  pollSolve(problem: string): Promise<SolveStatus> {
    return this.request('GET', `/problems/${problem}/solve`);
  }

  policyGraph(problem: string): Promise<PolicyGraph> {
    return this.request('GET', `/problems/${problem}/policy-graph`);
  }

  createSession(problem: string, groundTruth: string): Promise<Snapshot> {
    return this.request('POST', '/sessions', {
      problem,
      ground_truth: groundTruth,
      chooser: 'interactive',
    });
  }

  getSession(session: string): Promise<Snapshot> {
    return this.request('GET', `/sessions/${session}`);
  }

  choose(session: string, action: string, successor: number): Promise<ChooseResponse> {
    return this.request('POST', `/sessions/${session}/choose`, { action, successor });
  }

  deleteSession(session: string): Promise<void> {
    return this.request('DELETE', `/sessions/${session}`);
  }
}
