// Trace timeline: ordered decision/step events mirroring the SSE order.
// Decision rows render indented, above the step they selected.

import type { ChainVerification, TraceEvent } from './types.js';
import { escapeHtml } from './render.js';

export class TraceState {
  events: TraceEvent[] = [];
  lastId = -1;

  add(event: TraceEvent): void {
    if (event.id <= this.lastId) return; // replay overlap after reconnect
    this.lastId = event.id;
    this.events.push(event);
  }

  /** Every step_completed must be preceded by its own decision event. */
  decisionsPrecedeSteps(): boolean {
    const decided = new Map<string, number>();
    for (const event of this.events) {
      const payload = event.data.payload as Record<string, unknown>;
      if (event.event === 'orchestrator_decision') {
        const name = payload['step_name'];
        if (typeof name === 'string' && name) decided.set(name, event.id);
      } else if (event.event === 'step_completed') {
        const name = payload['step_name'] as string;
        const at = decided.get(name);
        if (at === undefined || at >= event.id) return false;
      }
    }
    return true;
  }

  stepCount(): number {
    return this.events.filter((e) => e.event === 'step_completed').length;
  }

  terminal(): TraceEvent | undefined {
    return this.events.find((e) => e.event === 'completed');
  }
}

export function renderTraceRow(event: TraceEvent): string {
  const payload = event.data.payload as Record<string, unknown>;
  switch (event.event) {
    case 'orchestrator_decision':
      return `<div class="trace-row decision" data-id="${event.id}">
  <span class="indent">↳</span> <code>${escapeHtml(payload['decided_by'])}</code>
  chose <strong>${escapeHtml(payload['chosen'])}</strong>
  <span class="reason">${escapeHtml(payload['reasoning'])}</span>
</div>`;
    case 'step_completed':
      return `<div class="trace-row step" data-id="${event.id}" data-step="${escapeHtml(payload['step_name'])}">
  <strong>${escapeHtml(payload['step_name'])}</strong>
  <span class="kind">${escapeHtml(payload['primitive'])}</span>
  <span class="conf">confidence ${escapeHtml(payload['confidence'])}</span>
</div>`;
    case 'suspended':
      return `<div class="trace-row suspended" data-id="${event.id}">suspended at ${escapeHtml(
        payload['tier'],
      )}, pending ${escapeHtml(payload['disposition_pending'])}</div>`;
    case 'resumed':
      return `<div class="trace-row resumed" data-id="${event.id}">resumed</div>`;
    case 'governance_action':
      return `<div class="trace-row governance" data-id="${event.id}">
  determination: <strong>${escapeHtml(payload['disposition'])}</strong>
  at tier <strong>${escapeHtml(payload['tier_applied'])}</strong>
</div>`;
    case 'completed':
      return `<div class="trace-row completed" data-id="${event.id}">run ${escapeHtml(
        payload['status'] ?? 'completed',
      )}</div>`;
    default:
      return `<div class="trace-row other" data-id="${event.id}">${escapeHtml(event.event)}</div>`;
  }
}

export function renderVerifyBadge(verification: ChainVerification): string {
  if (verification.chain_valid) {
    return `<span class="badge badge-valid">ledger verified · ${verification.entries_checked} entries</span>`;
  }
  return `<span class="badge badge-broken">chain broken at ${verification.first_broken_index}</span>`;
}
