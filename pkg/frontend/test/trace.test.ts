import { describe, expect, it } from 'vitest';
import { renderTraceRow, renderVerifyBadge, TraceState } from '../src/trace.js';
import type { TraceEvent } from '../src/types.js';

function event(id: number, kind: string, payload: Record<string, unknown>): TraceEvent {
  return { id, event: kind, data: { sequence: id, payload } };
}

describe('TraceState', () => {
  it('confirms decision rows precede their step rows', () => {
    const state = new TraceState();
    state.add(event(1, 'orchestrator_decision', { step_name: 'retrieve_1', chosen: 'retrieve' }));
    state.add(event(2, 'step_completed', { step_name: 'retrieve_1', primitive: 'retrieve' }));
    state.add(event(3, 'orchestrator_decision', { step_name: 'govern_1', chosen: 'govern' }));
    state.add(event(4, 'step_completed', { step_name: 'govern_1', primitive: 'govern' }));
    expect(state.decisionsPrecedeSteps()).toBe(true);
    expect(state.stepCount()).toBe(2);
  });

  it('flags a step without a prior decision', () => {
    const state = new TraceState();
    state.add(event(1, 'step_completed', { step_name: 'retrieve_1' }));
    expect(state.decisionsPrecedeSteps()).toBe(false);
  });

  it('drops replayed duplicates after reconnect', () => {
    const state = new TraceState();
    state.add(event(1, 'orchestrator_decision', { step_name: 'a_1' }));
    state.add(event(1, 'orchestrator_decision', { step_name: 'a_1' }));
    expect(state.events).toHaveLength(1);
  });
});

describe('renderTraceRow', () => {
  it('indents decision rows', () => {
    const html = renderTraceRow(
      event(1, 'orchestrator_decision', {
        step_name: 'challenge_1',
        chosen: 'challenge',
        decided_by: 'override_post_generate',
        reasoning: 'challenge is forced after generate',
      }),
    );
    expect(html).toContain('class="trace-row decision"');
    expect(html).toContain('override_post_generate');
  });

  it('renders step, suspension and governance rows', () => {
    expect(
      renderTraceRow(event(2, 'step_completed', {
        step_name: 'verify_1', primitive: 'verify', confidence: '0.900000',
      })),
    ).toContain('verify_1');
    expect(
      renderTraceRow(event(3, 'suspended', { tier: 'GATE', disposition_pending: 'REMAND' })),
    ).toContain('GATE');
    expect(
      renderTraceRow(event(4, 'governance_action', {
        disposition: 'REMAND', tier_applied: 'GATE',
      })),
    ).toContain('REMAND');
  });
});

describe('renderVerifyBadge', () => {
  it('shows valid and broken states', () => {
    expect(
      renderVerifyBadge({ chain_valid: true, first_broken_index: null, entries_checked: 30 }),
    ).toContain('ledger verified');
    expect(
      renderVerifyBadge({ chain_valid: false, first_broken_index: 7, entries_checked: 30 }),
    ).toContain('chain broken at 7');
  });
});
