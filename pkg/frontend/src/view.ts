// Pure projections of backend snapshots into HTML strings.  Nothing here
// touches the DOM or the network, so replaying a recorded choice sequence
// renders an identical sequence of strings (snapshot-tested).

import type { ActionView, EventDoc, PolicyGraph, Snapshot } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function atomChips(atoms: string[], extra = ''): string {
  if (atoms.length === 0) return '<span class="chip empty">∅</span>';
  return atoms
    .map((a) => `<span class="chip${extra ? ' ' + extra : ''}">${escapeHtml(a)}</span>`)
    .join('');
}

/** Tier ladder, most ambitious tier on top; a tier change since the
 * previous snapshot animates the downward move. */
export function renderLadder(snapshot: Snapshot, previousTier?: string): string {
  const degraded = previousTier !== undefined && previousTier !== snapshot.tier;
  const rungs = [...snapshot.tiers]
    .reverse()
    .map((tier) => {
      const classes = ['rung'];
      if (tier.id === snapshot.tier) classes.push('current');
      if (degraded && tier.id === snapshot.tier) classes.push('arrived');
      if (degraded && tier.id === previousTier) classes.push('left');
      return (
        `<li class="${classes.join(' ')}" data-rung="${escapeHtml(tier.id)}">` +
        `<span class="tier-name">${escapeHtml(tier.id)}</span>` +
        `<span class="tier-goal">${escapeHtml(tier.goal)}</span>` +
        `</li>`
      );
    })
    .join('');
  const ladderClass = degraded ? 'ladder degrading' : 'ladder';
  const move = degraded
    ? `<p class="degrade-note">degraded ${escapeHtml(previousTier)} → ${escapeHtml(snapshot.tier)}</p>`
    : '';
  return `<ul class="${ladderClass}">${rungs}</ul>${move}`;
}

function outcomeCard(action: ActionView, index: number): string {
  const outcome = action.outcomes[index]!;
  const badges = outcome.explained_by
    .map((t) => `<span class="badge tier-badge">${escapeHtml(t)}</span>`)
    .join('');
  const consequence =
    outcome.degrade_to === null
      ? '<span class="badge stay">stays</span>'
      : `<span class="badge degrade">→ ${escapeHtml(outcome.degrade_to)}</span>`;
  return (
    `<button class="outcome-card" data-cmd="choose" data-action="${escapeHtml(action.name)}" ` +
    `data-successor="${index}">` +
    `<span class="outcome-atoms">${atomChips(outcome.successor)}</span>` +
    `<span class="outcome-meta">explained by ${badges || '<span class="badge none">none</span>'} ${consequence}</span>` +
    `</button>`
  );
}

export function renderActions(snapshot: Snapshot): string {
  if (snapshot.finished) return '';
  return snapshot.actions
    .map(
      (action) =>
        `<section class="action-block">` +
        `<h3>prescribed action: <code>${escapeHtml(action.name)}</code></h3>` +
        `<p class="hint">pick the environment's outcome</p>` +
        `<div class="outcomes">${action.outcomes.map((_, i) => outcomeCard(action, i)).join('')}</div>` +
        `</section>`,
    )
    .join('');
}

export function renderEvent(event: EventDoc): string {
  switch (event.event) {
    case 'step':
      return `<li class="event step">step at ${escapeHtml(event.tier)}: <code>${escapeHtml(
        event.action ?? '',
      )}</code> → ${atomChips(event.successor ?? [])}</li>`;
    case 'degrade':
      return `<li class="event degrade">degraded ${escapeHtml(event.tier)} → ${escapeHtml(
        event.degrade_to ?? '',
      )} after <code>${escapeHtml(event.action ?? '')}</code>${
        event.note ? ` <em>(${escapeHtml(event.note)})</em>` : ''
      }</li>`;
    case 'goal':
      return `<li class="event goal">tier ${escapeHtml(event.tier)} goal achieved</li>`;
    case 'stuck':
      return `<li class="event stuck">stuck at ${escapeHtml(event.tier)}${
        event.note ? `: ${escapeHtml(event.note)}` : ''
      }</li>`;
    case 'cap':
      return `<li class="event cap">step cap reached at ${escapeHtml(event.tier)}</li>`;
  }
}

export function renderEventLog(events: EventDoc[]): string {
  if (events.length === 0) return '<p class="hint">no events yet</p>';
  return `<ol class="event-log">${events.map(renderEvent).join('')}</ol>`;
}

export function renderBanner(snapshot: Snapshot): string {
  if (!snapshot.finished) return '';
  if (snapshot.terminal === 'goal') {
    return (
      `<div class="banner goal-banner">tier ${escapeHtml(snapshot.tier)} goal achieved — ` +
      `${escapeHtml(snapshot.goal)}</div>`
    );
  }
  if (snapshot.terminal === 'stuck') {
    return `<div class="banner stuck-banner">execution stuck at tier ${escapeHtml(snapshot.tier)}</div>`;
  }
  return `<div class="banner cap-banner">step cap reached at tier ${escapeHtml(snapshot.tier)}</div>`;
}

/** Full session panel; a pure function of (snapshot, previous tier). */
export function renderSession(snapshot: Snapshot, previousTier?: string): string {
  return (
    `<div class="session" data-session="${escapeHtml(snapshot.session)}" data-step="${snapshot.step}">` +
    renderBanner(snapshot) +
    `<section class="status">` +
    `<h3>state</h3><div class="state-chips">${atomChips(snapshot.state)}</div>` +
    `<p class="meta">tier <strong>${escapeHtml(snapshot.tier)}</strong> · goal ` +
    `<code>${escapeHtml(snapshot.goal)}</code> · ground truth ` +
    `<code>${escapeHtml(snapshot.ground_truth)}</code> · step ${snapshot.step}</p>` +
    `</section>` +
    `<section class="ladder-panel"><h3>tier ladder</h3>${renderLadder(snapshot, previousTier)}</section>` +
    renderActions(snapshot) +
    `<section class="log-panel"><h3>event log</h3>${renderEventLog(snapshot.events)}</section>` +
    `</div>`
  );
}

/** Policy graph as layered SVG; nodes matching the highlighted atom set are
 * marked current. */
export function renderGraph(graph: PolicyGraph, highlightAtoms: string[] = []): string {
  const highlight = new Set(highlightAtoms);
  const layer = new Map<string, number>();
  const outgoing = new Map<string, string[]>();
  for (const edge of graph.edges) {
    const targets = outgoing.get(edge.from) ?? [];
    targets.push(edge.to);
    outgoing.set(edge.from, targets);
  }
  const initial = graph.nodes.filter((n) => n.initial).map((n) => n.id);
  let frontier = initial;
  let depth = 0;
  while (frontier.length > 0) {
    const next: string[] = [];
    for (const id of frontier) {
      if (layer.has(id)) continue;
      layer.set(id, depth);
      next.push(...(outgoing.get(id) ?? []));
    }
    frontier = next;
    depth += 1;
  }
  for (const node of graph.nodes) {
    if (!layer.has(node.id)) layer.set(node.id, depth);
  }

  const columns = new Map<number, string[]>();
  for (const node of graph.nodes) {
    const col = layer.get(node.id)!;
    const rows = columns.get(col) ?? [];
    rows.push(node.id);
    columns.set(col, rows);
  }
  const xStep = 180;
  const yStep = 64;
  const pos = new Map<string, { x: number; y: number }>();
  for (const [col, ids] of columns) {
    ids.forEach((id, row) => pos.set(id, { x: 40 + col * xStep, y: 40 + row * yStep }));
  }
  const width = 80 + (Math.max(...[...columns.keys()], 0) + 1) * xStep;
  const height = 80 + Math.max(...[...columns.values()].map((c) => c.length), 1) * yStep;

  const edgeSvg = graph.edges
    .map((edge) => {
      const a = pos.get(edge.from)!;
      const b = pos.get(edge.to)!;
      const cls = edge.fairness === 'unfair' ? 'edge unfair' : 'edge';
      return (
        `<line class="${cls}" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}">` +
        `<title>${escapeHtml(edge.op)}</title></line>`
      );
    })
    .join('');
  const nodeSvg = graph.nodes
    .map((node) => {
      const p = pos.get(node.id)!;
      const isCurrent =
        highlight.size > 0 &&
        node.atoms.length === highlight.size &&
        node.atoms.every((a) => highlight.has(a));
      const classes = ['node'];
      if (node.goal) classes.push('goal');
      if (node.initial) classes.push('initial');
      if (isCurrent) classes.push('current');
      return (
        `<circle class="${classes.join(' ')}" cx="${p.x}" cy="${p.y}" r="14">` +
        `<title>${escapeHtml(node.atoms.join(' '))}</title></circle>`
      );
    })
    .join('');
  return (
    `<svg class="policy-graph" viewBox="0 0 ${width} ${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${edgeSvg}${nodeSvg}</svg>`
  );
}

export function renderError(message: string): string {
  return message ? `<div class="error-bar">${escapeHtml(message)}</div>` : '';
}
