// Playground orchestrator: holds the UI state, maps each user command to
// exactly one backend call, and re-renders from the returned snapshots.
// DOM-free so the flow is testable with a scripted client.

import { ApiError, type ApiClient } from './api.js';
import type { PolicyGraph, ProblemBundle, Snapshot } from './types.js';
import {
  escapeHtml,
  renderError,
  renderGraph,
  renderSession,
} from './view.js';

export type Phase = 'setup' | 'compiled' | 'solving' | 'solved' | 'session';

export interface AppState {
  phase: Phase;
  problem?: string;
  tiers: string[];
  operators?: number;
  policyStates?: number;
  snapshot?: Snapshot;
  previousTier?: string;
  graph?: PolicyGraph;
  graphVisible: boolean;
  error: string;
}

const POLL_INTERVAL_MS = 250;

export class App {
  state: AppState = { phase: 'setup', tiers: [], graphVisible: false, error: '' };

  constructor(
    private readonly api: ApiClient,
    private readonly render: (html: string) => void,
    private readonly sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ) {}

  paint(): void {
    this.render(this.html());
  }

  private async guard(step: () => Promise<void>): Promise<void> {
    try {
      this.state.error = '';
      await step();
    } catch (err) {
      if (err instanceof ApiError) {
        this.state.error = err.message;
      } else {
        this.state.error = String(err);
      }
    }
    this.paint();
  }

  loadProblem(bundle: ProblemBundle): Promise<void> {
    return this.guard(async () => {
      const up = await this.api.uploadProblem(bundle);
      if (!up.valid) {
        const findings = up.report.findings.map((f) => f.message).join('; ');
        throw new ApiError(422, `manifest rejected: ${findings}`);
      }
      this.state = {
        phase: 'setup',
        problem: up.problem,
        tiers: up.tiers,
        graphVisible: false,
        error: '',
      };
      const compiled = await this.api.compile(up.problem);
      this.state.operators = compiled.operators;
      this.state.phase = 'compiled';
    });
  }

  solve(): Promise<void> {
    return this.guard(async () => {
      if (!this.state.problem) throw new ApiError(409, 'load a problem first');
      this.state.phase = 'solving';
      this.paint();
      let status = await this.api.solve(this.state.problem);
      while (status.status === 'solving') {
        await this.sleep(POLL_INTERVAL_MS);
        status = await this.api.pollSolve(this.state.problem);
      }
      if (status.status !== 'solved') {
        this.state.phase = 'compiled';
        throw new ApiError(409, `solver verdict: ${status.status}`);
      }
      this.state.phase = 'solved';
      this.state.policyStates = status.policy_states;
    });
  }

  startSession(groundTruth: string): Promise<void> {
    return this.guard(async () => {
      if (!this.state.problem) throw new ApiError(409, 'load a problem first');
      const snapshot = await this.api.createSession(this.state.problem, groundTruth);
      this.state.phase = 'session';
      this.state.snapshot = snapshot;
      this.state.previousTier = undefined;
    });
  }

  /** Apply one outcome choice.  A stale choice (409) refreshes the snapshot
   * instead of failing the session. */
  choose(action: string, successor: number): Promise<void> {
    return this.guard(async () => {
      const snapshot = this.state.snapshot;
      if (!snapshot) throw new ApiError(409, 'no active session');
      try {
        const resp = await this.api.choose(snapshot.session, action, successor);
        this.state.previousTier = snapshot.tier;
        this.state.snapshot = resp.snapshot;
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.state.snapshot = await this.api.getSession(snapshot.session);
          this.state.previousTier = undefined;
          this.state.error = `choice was stale; snapshot refreshed (${err.detail})`;
          return;
        }
        throw err;
      }
    });
  }

  toggleGraph(): Promise<void> {
    return this.guard(async () => {
      if (this.state.graphVisible) {
        this.state.graphVisible = false;
        return;
      }
      if (!this.state.problem) throw new ApiError(409, 'load a problem first');
      this.state.graph = await this.api.policyGraph(this.state.problem);
      this.state.graphVisible = true;
    });
  }

  endSession(): Promise<void> {
    return this.guard(async () => {
      if (this.state.snapshot) {
        await this.api.deleteSession(this.state.snapshot.session);
      }
      this.state.snapshot = undefined;
      this.state.previousTier = undefined;
      this.state.phase = 'solved';
    });
  }

  /** Pure projection of the current state (plus recorded snapshots). */
  html(): string {
    const s = this.state;
    const parts: string[] = [renderError(s.error)];
    if (s.phase === 'setup') {
      parts.push(
        '<section class="setup"><h2>1 · load a multi-tier problem</h2>' +
          '<button data-cmd="load-example">load the corridor example</button>' +
          '<p class="hint">or paste a manifest bundle JSON and</p>' +
          '<textarea id="bundle-input" rows="6" placeholder="{"manifest": ..., "files": ...}"></textarea>' +
          '<button data-cmd="load-custom">upload bundle</button></section>',
      );
    }
    if (s.phase === 'compiled' || s.phase === 'solving') {
      parts.push(
        `<section class="setup"><h2>2 · solve</h2>` +
          `<p>problem <code>${escapeHtml(s.problem ?? '')}</code> compiled: ${s.operators} operators</p>` +
          (s.phase === 'solving'
            ? '<p class="hint">solving…</p>'
            : '<button data-cmd="solve">synthesize the controller</button>') +
          `</section>`,
      );
    }
    if (s.phase === 'solved') {
      const options = s.tiers
        .map((t) => `<option value="${escapeHtml(t)}">${escapeHtml(t)}</option>`)
        .join('');
      parts.push(
        `<section class="setup"><h2>3 · steer an execution</h2>` +
          `<p>controller ready (${s.policyStates} policy states)</p>` +
          `<label>environment behaves like tier <select id="ground-truth">${options}</select></label>` +
          `<button data-cmd="start-session">start session</button>` +
          `<button data-cmd="toggle-graph">${s.graphVisible ? 'hide' : 'show'} policy graph</button>` +
          `</section>`,
      );
    }
    if (s.phase === 'session' && s.snapshot) {
      parts.push(
        `<section class="session-tools">` +
          `<button data-cmd="toggle-graph">${s.graphVisible ? 'hide' : 'show'} policy graph</button>` +
          `<button data-cmd="end-session">end session</button></section>`,
      );
      parts.push(renderSession(s.snapshot, s.previousTier));
    }
    if (s.graphVisible && s.graph) {
      const highlight =
        s.snapshot && !s.snapshot.finished
          ? [...s.snapshot.state, `(lvl-${s.snapshot.tier})`, '(act)']
          : [];
      parts.push(
        `<section class="graph-panel"><h3>policy graph</h3>${renderGraph(s.graph, highlight)}</section>`,
      );
    }
    return parts.join('\n');
  }
}
