/**
 * Display formatting. Numbers always pass through these helpers so the
 * test suite can reproduce cell text exactly from intercepted payloads.
 */

/** Two-decimal display form; negative zero collapses to "0.00". */
export function fixed2(value: number): string {
  const text = value.toFixed(2);
  return text === '-0.00' ? '0.00' : text;
}

/** Reduction percentage with an explicit sign, e.g. "+3.05%". */
export function signedPct(value: number): string {
  const text = fixed2(value);
  return (value > 0 && text !== '0.00' ? '+' + text : text) + '%';
}

/** Lead time from forecast start as "T+HH:MM". */
export function formatLead(seconds: number): string {
  const total = Math.round(seconds / 60);
  const h = Math.floor(total / 60);
  const m = total % 60;
  const pad = (n: number) => String(n).padStart(2, '0');
  return `T+${pad(h)}:${pad(m)}`;
}

/** Raw numeric text exactly as the service sent it through JSON. */
export function rawNumber(value: number): string {
  return String(value);
}
