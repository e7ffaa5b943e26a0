// Browser bootstrap: wires the pure rendering/state modules to the DOM.
// All mutations are server-confirmed; the UI refetches after every action.

import { ApiClient, SessionExpired } from './api.js';
import { renderEpistemicPanel, stepRecords } from './epistemic.js';
import { queueRows, renderQueue } from './queue.js';
import { streamTrace } from './sse.js';
import { renderTraceRow, renderVerifyBadge, TraceState } from './trace.js';
import type { InstanceDetail, StreamHandleLike } from './apptypes.js';

const baseUrl = (window as any).GOVCORE_BASE_URL ?? '';
const token =
  new URLSearchParams(window.location.search).get('token') ?? 'reviewer-token';
const api = new ApiClient(baseUrl, token);

const queueEl = document.getElementById('queue')!;
const traceEl = document.getElementById('trace')!;
const panelEl = document.getElementById('epistemic')!;
const badgeEl = document.getElementById('verify-badge')!;
const errorEl = document.getElementById('error')!;
const actionsEl = document.getElementById('actions')!;

let activeStream: StreamHandleLike | null = null;
let activeInstance: string | null = null;
let deredact: Record<string, string> | null = null;

async function refreshQueue(): Promise<void> {
  try {
    const rows = queueRows(await api.listInstances());
    queueEl.innerHTML = renderQueue(rows);
    for (const row of queueEl.querySelectorAll('.queue-row')) {
      row.addEventListener('click', () =>
        openTrace((row as HTMLElement).dataset.instance!),
      );
    }
  } catch (err) {
    showError(err);
  }
}

async function openTrace(instanceId: string): Promise<void> {
  activeInstance = instanceId;
  deredact = null;
  activeStream?.close();
  traceEl.innerHTML = '';
  const state = new TraceState();
  activeStream = streamTrace(
    api.traceUrl(instanceId),
    api.authHeader(),
    (event) => {
      state.add(event);
      traceEl.insertAdjacentHTML('beforeend', renderTraceRow(event));
    },
  );
  const detail = await api.instance(instanceId);
  renderDetail(detail);
  badgeEl.innerHTML = renderVerifyBadge(await api.verify(instanceId));
  renderActions(detail);
}

function renderDetail(detail: InstanceDetail): void {
  panelEl.innerHTML = stepRecords(detail.ledger)
    .map((step) => renderEpistemicPanel(step, deredact))
    .join('');
}

function renderActions(detail: InstanceDetail): void {
  const buttons: string[] = [];
  if (detail.hitl_state === 'pending_review') buttons.push('accept');
  if (detail.hitl_state === 'under_review') buttons.push('approve', 'reject');
  buttons.push('deredact');
  actionsEl.innerHTML = buttons
    .map((b) => `<button data-action="${b}">${b}</button>`)
    .join('');
  for (const button of actionsEl.querySelectorAll('button')) {
    button.addEventListener('click', () =>
      runAction((button as HTMLElement).dataset.action!),
    );
  }
}

async function runAction(action: string): Promise<void> {
  if (!activeInstance) return;
  errorEl.textContent = '';
  try {
    if (action === 'deredact') {
      deredact = await api.redactionMap(activeInstance);
      renderDetail(await api.instance(activeInstance));
      return;
    }
    const body =
      action === 'reject' ? { note: 'rejected from console' } : {};
    const result = await api.act(activeInstance, action as any, body);
    if (!result.ok) {
      errorEl.textContent = `illegal transition: ${result.message}`;
      return;
    }
    const detail = await api.instance(activeInstance);
    renderDetail(detail);
    renderActions(detail);
    badgeEl.innerHTML = renderVerifyBadge(await api.verify(activeInstance));
    await refreshQueue();
  } catch (err) {
    showError(err);
  }
}

function showError(err: unknown): void {
  if (err instanceof SessionExpired) {
    errorEl.textContent = 'Session expired. Supply a valid reviewer token.';
  } else {
    errorEl.textContent = String(err);
  }
}

refreshQueue();
setInterval(refreshQueue, 5000);
