// Criterion 12 (console end-to-end): drive a suspended GATE instance through
// accept -> approve using the console's own client modules against a live
// backend, observe the four HITL ledger entries via the verify/detail
// endpoints, and check the SSE trace renders decision events before step
// events for 100% of steps.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { spawn, ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { ApiClient } from '../src/api.js';
import { streamTrace } from '../src/sse.js';
import { TraceState } from '../src/trace.js';
import { queueRows } from '../src/queue.js';
import type { TraceEvent } from '../src/types.js';

const PORT = 8731;
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

const reviewer = new ApiClient(BASE, 'reviewer-token');
const operator = new ApiClient(BASE, 'operator-token');

async function serverReady(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      await operator.listInstances();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }
  throw new Error('backend did not come up');
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), 'govcore-e2e-'));
  server = spawn(
    'python3',
    ['-m', 'govcore.cli', 'serve', '--port', String(PORT), '--data-dir', dataDir],
    { stdio: 'pipe', env: { ...process.env } },
  );
  server.stderr?.on('data', (d) => process.stderr.write(d));
  await serverReady();
});

afterAll(() => {
  server?.kill();
});

describe('console end-to-end against the live backend', () => {
  it('approves a suspended GATE instance through the full HITL chain', async () => {
    const { instance_id } = await operator.start('D001');

    // the instance must appear in the reviewer queue
    const rows = queueRows(await reviewer.listInstances());
    const row = rows.find((r) => r.instance_id === instance_id);
    expect(row).toBeDefined();
    expect(row!.tier).toBe('GATE');
    expect(row!.hitl_state).toBe('pending_review');
    expect(row!.disposition).toBe('REMAND'); // pending determination

    // approve before accept is an inline legality error, not a crash
    const premature = await reviewer.act(instance_id, 'approve');
    expect(premature.ok).toBe(false);
    if (!premature.ok) expect(premature.status).toBe(409);

    const accepted = await reviewer.act(instance_id, 'accept', { actor: 'rev-9' });
    expect(accepted.ok).toBe(true);
    if (accepted.ok) expect(accepted.summary.hitl_state).toBe('under_review');

    const approved = await reviewer.act(instance_id, 'approve', { actor: 'rev-9' });
    expect(approved.ok).toBe(true);
    if (approved.ok) {
      expect(approved.summary.status).toBe('completed');
      expect(approved.summary.disposition).toBe('REMAND');
    }

    // four hitl_transition entries beyond the dispatch-time one:
    // pending_review -> assigned -> under_review -> approved -> resumed
    const detail = await reviewer.instance(instance_id);
    const transitions = detail.ledger
      .filter((entry) => entry.entry_type === 'hitl_transition')
      .map((entry) => entry.content['to']);
    expect(transitions).toEqual([
      'pending_review',
      'assigned',
      'under_review',
      'approved',
      'resumed',
    ]);
    const reviewerDriven = transitions.slice(1);
    expect(reviewerDriven).toHaveLength(4);

    const verification = await reviewer.verify(instance_id);
    expect(verification.chain_valid).toBe(true);
    expect(verification.entries_checked).toBe(detail.ledger.length);
  });

  it('SSE trace renders decision events before step events for every step', async () => {
    const { instance_id } = await operator.start('A001');
    const state = new TraceState();
    const events: TraceEvent[] = [];
    const handle = streamTrace(
      reviewer.traceUrl(instance_id),
      reviewer.authHeader(),
      (event) => {
        state.add(event);
        events.push(event);
      },
    );
    await handle.done;
    expect(state.terminal()).toBeDefined();
    expect(state.stepCount()).toBe(13);
    expect(state.decisionsPrecedeSteps()).toBe(true);
    // monotone sequence ids, mirroring ledger order
    const ids = events.map((e) => e.id);
    expect([...ids].sort((a, b) => a - b)).toEqual(ids);
  });

  it('reconnects from Last-Event-ID without duplicates', async () => {
    const { instance_id } = await operator.start('A001');
    const first = new TraceState();
    const firstHandle = streamTrace(
      reviewer.traceUrl(instance_id),
      reviewer.authHeader(),
      (event) => first.add(event),
    );
    await firstHandle.done;
    const cutoff = first.events[5].id;
    const resumed: TraceEvent[] = [];
    const resumeHandle = streamTrace(
      reviewer.traceUrl(instance_id),
      reviewer.authHeader(),
      (event) => resumed.push(event),
      cutoff,
    );
    await resumeHandle.done;
    expect(resumed[0].id).toBeGreaterThan(cutoff);
    expect(resumed.map((e) => e.id)).toEqual(
      first.events.filter((e) => e.id > cutoff).map((e) => e.id),
    );
  });

  it('de-redaction is reviewer-gated and restores originals', async () => {
    const { instance_id } = await operator.start('G004');
    await expect(operator.redactionMap(instance_id)).rejects.toThrow();
    const tokens = await reviewer.redactionMap(instance_id);
    expect(Object.keys(tokens).some((t) => t.includes('PII:name'))).toBe(true);
  });
});
