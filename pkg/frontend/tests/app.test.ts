// Flow tests with a scripted client: each user command issues exactly one
// backend call (polling excepted), and stale choices refresh the snapshot.

import { describe, expect, it } from 'vitest';

import { ApiError, type ApiClient } from '../src/api.js';
import { App } from '../src/app.js';
import type {
  ChooseResponse,
  PolicyGraph,
  ProblemBundle,
  Snapshot,
} from '../src/types.js';

import graphFixture from '../src/fixtures/policy-graph.json';
import bundleFixture from '../src/fixtures/example-bundle.json';
import walkthrough from '../src/fixtures/walkthrough.json';

const steps = walkthrough.steps as unknown as {
  snapshot?: Snapshot;
  response?: ChooseResponse;
}[];
const initialSnapshot = steps[0]!.snapshot!;
const cleanResponse = steps[1]!.response!;
const scratchResponse = steps[2]!.response!;
const bundle = bundleFixture as unknown as ProblemBundle;

class ScriptedClient implements ApiClient {
  calls: string[] = [];
  staleOnce = false;
  slowSolves = 0;

  private note(call: string) {
    this.calls.push(call);
  }

  async uploadProblem(): Promise<any> {
    this.note('upload');
    return {
      schema_version: 1,
      problem: 'p-1',
      tiers: ['d1', 'd2', 'd3'],
      valid: true,
      report: { ok: true, findings: [] },
    };
  }

  async compile(problem: string): Promise<any> {
    this.note(`compile ${problem}`);
    return { schema_version: 1, problem, operators: 29, atoms: 15, bookkeeping_atoms: 10, unfair: [] };
  }

  async solve(problem: string): Promise<any> {
    this.note(`solve ${problem}`);
    if (this.slowSolves > 0) {
      return { schema_version: 1, problem, status: 'solving', poll: `/problems/${problem}/solve` };
    }
    return { schema_version: 1, problem, status: 'solved', policy_states: 21 };
  }

  async pollSolve(problem: string): Promise<any> {
    this.note(`poll ${problem}`);
    this.slowSolves -= 1;
    if (this.slowSolves > 0) {
      return { schema_version: 1, problem, status: 'solving' };
    }
    return { schema_version: 1, problem, status: 'solved', policy_states: 21 };
  }

  async policyGraph(): Promise<PolicyGraph> {
    this.note('graph');
    return graphFixture as unknown as PolicyGraph;
  }

  async createSession(): Promise<Snapshot> {
    this.note('create-session');
    return initialSnapshot;
  }

  async getSession(session: string): Promise<Snapshot> {
    this.note(`get-session ${session}`);
    return cleanResponse.snapshot;
  }

  async choose(session: string, action: string, successor: number): Promise<ChooseResponse> {
    this.note(`choose ${action} ${successor}`);
    if (this.staleOnce) {
      this.staleOnce = false;
      throw new ApiError(409, 'stale action');
    }
    return action === 'walk_c2_c1' ? cleanResponse : scratchResponse;
  }

  async deleteSession(session: string): Promise<void> {
    this.note(`delete ${session}`);
  }
}

function makeApp() {
  const client = new ScriptedClient();
  const frames: string[] = [];
  const app = new App(client, (html) => frames.push(html), async () => {});
  return { client, frames, app };
}

describe('playground flow', () => {
  it('walks load -> compile -> solve -> session -> choices -> goal banner', async () => {
    const { client, frames, app } = makeApp();
    await app.loadProblem(bundle);
    expect(client.calls).toEqual(['upload', 'compile p-1']);
    await app.solve();
    expect(client.calls.filter((c) => c.startsWith('solve'))).toHaveLength(1);
    await app.startSession('d1');
    expect(app.state.phase).toBe('session');
    await app.choose('walk_c2_c1', 0);
    expect(app.state.snapshot?.tier).toBe('d3');
    await app.choose('walk_c1_c0', 1);
    expect(app.state.snapshot?.tier).toBe('d2');
    expect(app.state.snapshot?.terminal).toBe('goal');
    const last = frames[frames.length - 1]!;
    expect(last).toContain('tier d2 goal achieved');
    expect(last).toContain('ladder degrading');
  });

  it('each choice maps to exactly one choose call', async () => {
    const { client, app } = makeApp();
    await app.loadProblem(bundle);
    await app.solve();
    await app.startSession('d1');
    const before = client.calls.length;
    await app.choose('walk_c2_c1', 0);
    expect(client.calls.slice(before)).toEqual(['choose walk_c2_c1 0']);
  });

  it('polls while the backend reports solving', async () => {
    const { client, app } = makeApp();
    client.slowSolves = 3;
    await app.loadProblem(bundle);
    await app.solve();
    expect(app.state.phase).toBe('solved');
    expect(client.calls.filter((c) => c.startsWith('poll'))).toHaveLength(3);
  });

  it('stale choices refresh the snapshot instead of failing', async () => {
    const { client, app } = makeApp();
    await app.loadProblem(bundle);
    await app.solve();
    await app.startSession('d1');
    client.staleOnce = true;
    await app.choose('walk_c2_c1', 0);
    expect(client.calls[client.calls.length - 1]).toMatch(/^get-session/);
    expect(app.state.error).toContain('stale');
    expect(app.state.snapshot).toEqual(cleanResponse.snapshot);
  });

  it('surfaces API errors inline without crashing', async () => {
    const { app } = makeApp();
    await app.choose('walk_c2_c1', 0);
    expect(app.state.error).toContain('no active session');
    expect(app.html()).toContain('error-bar');
  });

  it('toggle shows the policy graph with the current state highlighted', async () => {
    const { app } = makeApp();
    await app.loadProblem(bundle);
    await app.solve();
    await app.startSession('d1');
    await app.toggleGraph();
    const html = app.html();
    expect(html).toContain('policy-graph');
    expect(html).toContain('node initial current');
    await app.toggleGraph();
    expect(app.html()).not.toContain('policy-graph');
  });

  it('ending a session returns to the solved phase', async () => {
    const { client, app } = makeApp();
    await app.loadProblem(bundle);
    await app.solve();
    await app.startSession('d1');
    await app.endSession();
    expect(app.state.phase).toBe('solved');
    expect(client.calls[client.calls.length - 1]).toMatch(/^delete/);
  });
});
