// Per-step epistemic panel. The console renders service-provided values
// verbatim; it never recomputes scores, so there is no client-side
// divergence to audit.

import type { LedgerRecord, StepPayload } from './types.js';
import { escapeHtml } from './render.js';

export function stepRecords(ledger: LedgerRecord[]): StepPayload[] {
  return ledger
    .filter((entry) => entry.entry_type === 'step_completed')
    .map((entry) => entry.content as unknown as StepPayload);
}

export function applyRedactionMap(
  text: string,
  tokens: Record<string, string>,
): string {
  let out = text;
  for (const [token, original] of Object.entries(tokens)) {
    out = out.replaceAll(token, original);
  }
  return out;
}

export function renderEpistemicPanel(
  step: StepPayload,
  deredactTokens: Record<string, string> | null = null,
): string {
  const e = step.epistemic;
  const mechanical = Object.entries(e.mechanical)
    .map(
      ([name, value]) =>
        `<div class="signal"><span>${escapeHtml(name)}</span><b>${escapeHtml(value)}</b></div>`,
    )
    .join('');
  const judgment = Object.keys(e.judgment).length
    ? `<div class="judgment">${Object.entries(e.judgment)
        .map(
          ([name, value]) =>
            `<div class="signal"><span>${escapeHtml(name)}</span><b>${escapeHtml(value)}</b></div>`,
        )
        .join('')}</div>`
    : ''; // retrieve/govern/reflect carry no judgment panel
  const flags = e.flags
    .map(
      (flag) =>
        `<span class="flag-chip severity-${escapeHtml(flag.severity)}">${escapeHtml(
          flag.kind,
        )} ${escapeHtml(flag.penalty)} ${escapeHtml(flag.severity)}</span>`,
    )
    .join(' ');
  const vulnerabilities = renderVulnerabilities(step, deredactTokens);
  const warranted = e.warranted
    ? '<span class="warranted yes">warranted</span>'
    : '<span class="warranted no">not warranted</span>';
  return `<section class="epistemic" data-step="${escapeHtml(step.step_name)}">
<header>${escapeHtml(step.step_name)} · overall ${escapeHtml(e.overall)} · ${warranted}</header>
<div class="mechanical">${mechanical}</div>
${judgment}
<div class="flags">${flags || '<span class="no-flags">no flags</span>'}</div>
${vulnerabilities}
</section>`;
}

function renderVulnerabilities(
  step: StepPayload,
  tokens: Record<string, string> | null,
): string {
  if (step.primitive !== 'challenge') return '';
  const vulns = (step.payload['vulnerabilities'] ?? []) as Array<
    Record<string, string>
  >;
  if (!vulns.length) return '<div class="vulnerabilities">no vulnerabilities</div>';
  const items = vulns
    .map((vuln) => {
      let description = vuln['description'] ?? '';
      if (tokens) description = applyRedactionMap(description, tokens);
      return `<li class="vuln severity-${escapeHtml(vuln['severity'])}">
  <b>${escapeHtml(vuln['kind'])}</b> (${escapeHtml(vuln['severity'])}):
  ${escapeHtml(description)}
</li>`;
    })
    .join('');
  return `<ul class="vulnerabilities">${items}</ul>`;
}
