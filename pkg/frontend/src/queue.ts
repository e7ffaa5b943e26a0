// Review queue: only instances with an unresolved wait_for_result order
// appear, sorted by SLA urgency (tightest deadline first).

import type { InstanceSummary } from './types.js';
import { escapeHtml } from './render.js';

const RESOLVED = new Set(['resumed', 'terminated']);

export function queueRows(
  instances: InstanceSummary[],
  now: Date = new Date(),
): InstanceSummary[] {
  return instances
    .filter(
      (i) =>
        i.status === 'suspended' &&
        i.work_order !== null &&
        i.work_order.mode === 'wait_for_result' &&
        !RESOLVED.has(i.work_order.state),
    )
    .sort(
      (a, b) =>
        slaRemainingMs(a, now) - slaRemainingMs(b, now) ||
        a.instance_id.localeCompare(b.instance_id),
    );
}

export function slaRemainingMs(row: InstanceSummary, now: Date): number {
  if (!row.work_order) return Number.POSITIVE_INFINITY;
  return new Date(row.work_order.sla_deadline).getTime() - now.getTime();
}

export function formatRemaining(ms: number): string {
  if (ms <= 0) return 'overdue';
  const hours = Math.floor(ms / 3_600_000);
  const minutes = Math.floor((ms % 3_600_000) / 60_000);
  return hours > 0 ? `${hours}h ${minutes}m` : `${minutes}m`;
}

export function flagSummary(row: InstanceSummary): string {
  if (!row.flags.length) return 'no flags';
  const counts = new Map<string, number>();
  for (const flag of row.flags) {
    counts.set(flag.kind, (counts.get(flag.kind) ?? 0) + 1);
  }
  return [...counts.entries()].map(([kind, n]) => `${kind}×${n}`).join(', ');
}

export function renderQueue(rows: InstanceSummary[], now: Date = new Date()): string {
  if (rows.length === 0) {
    return '<div class="empty-state">Review queue is empty. Nothing is waiting on a reviewer.</div>';
  }
  const body = rows
    .map((row) => {
      const remaining = formatRemaining(slaRemainingMs(row, now));
      return `<tr class="queue-row" data-instance="${escapeHtml(row.instance_id)}">
  <td>${escapeHtml(row.instance_id)}</td>
  <td>${escapeHtml(row.domain)}</td>
  <td><span class="tier tier-${escapeHtml(row.tier ?? '')}">${escapeHtml(row.tier ?? '-')}</span></td>
  <td>${escapeHtml(row.hitl_state ?? '-')}</td>
  <td class="${remaining === 'overdue' ? 'overdue' : ''}">${escapeHtml(remaining)}</td>
  <td>${escapeHtml(row.disposition ?? '-')}</td>
  <td>${escapeHtml(flagSummary(row))}</td>
</tr>`;
    })
    .join('\n');
  return `<table class="queue">
<thead><tr><th>instance</th><th>domain</th><th>tier</th><th>state</th><th>sla</th><th>pending</th><th>flags</th></tr></thead>
<tbody>${body}</tbody>
</table>`;
}
