/**
 * Pure scene builders for the comparison views. Each returns plain data
 * the renderers turn into DOM or canvas; every number in a scene is a
 * value the service sent (formatting aside), never something derived
 * client-side.
 */

import { fixed2, signedPct } from './format.js';
import type { AnalyticsLegDoc, SummaryDoc } from './types.js';

export const TABLE_COLUMNS = ['Voyage Hours', 'Fuel (mT)', 'CO2', 'SOx',
                              'NOx', 'PM', 'Miles', 'Safety (%)'] as const;

export const COLUMN_KEYS = ['voyage_hours', 'fuel_mt', 'co2_mt', 'sox_mt',
                            'nox_mt', 'pm_mt', 'miles_nm',
                            'safety_pct'] as const;

/** Quantities the service reports percentage reductions for. */
export const DELTA_KEYS = ['fuel_mt', 'co2_mt', 'sox_mt', 'nox_mt',
                           'pm_mt'] as const;

export interface TableEntry {
  label: string;
  summary: SummaryDoc | null;
  /** Percent reductions vs the row's baseline, as sent by the service. */
  deltas: Record<string, number> | null;
}

export interface TableRowScene {
  label: string;
  pending: boolean;
  cells: string[];
  deltaCells: (string | null)[];
}

export function comparisonRows(entries: TableEntry[]): TableRowScene[] {
  return entries.map((e) => {
    if (!e.summary) {
      return {
        label: e.label,
        pending: true,
        cells: COLUMN_KEYS.map(() => '…'),
        deltaCells: DELTA_KEYS.map(() => null),
      };
    }
    const summary = e.summary;
    return {
      label: e.label,
      pending: false,
      cells: COLUMN_KEYS.map((k) => fixed2(summary[k])),
      deltaCells: DELTA_KEYS.map((k) => {
        const v = e.deltas?.[k];
        return v === undefined ? null : signedPct(v);
      }),
    };
  });
}

export interface BarScene {
  label: string;
  value: number;
  text: string;
  /** Bar length as a fraction of the largest entry (layout only). */
  frac: number;
}

export interface BarsScene {
  quantity: string;
  title: string;
  bars: BarScene[];
}

export const BAR_QUANTITIES: { key: typeof DELTA_KEYS[number]; title: string }[] = [
  { key: 'fuel_mt', title: 'Fuel (mT)' },
  { key: 'co2_mt', title: 'CO2 (mT)' },
  { key: 'sox_mt', title: 'SOx (mT)' },
  { key: 'nox_mt', title: 'NOx (mT)' },
  { key: 'pm_mt', title: 'PM (mT)' },
];

export function emissionBars(
  quantity: typeof DELTA_KEYS[number], title: string,
  entries: { label: string; summary: SummaryDoc }[],
): BarsScene {
  const values = entries.map((e) => e.summary[quantity]);
  const top = Math.max(...values, 0);
  return {
    quantity,
    title,
    bars: entries.map((e, i) => ({
      label: e.label,
      value: values[i] as number,
      text: fixed2(values[i] as number),
      frac: top > 0 ? (values[i] as number) / top : 0,
    })),
  };
}

export interface PowerSeriesScene {
  label: string;
  /** One point per leg: departure offset (s) and engine power (kW). */
  points: { t: number; powerKw: number }[];
}

export interface PowerProfileScene {
  series: PowerSeriesScene[];
  maxPower: number;
  tMin: number;
  tMax: number;
}

export function powerProfile(
  entries: { label: string; legs: AnalyticsLegDoc[] }[],
): PowerProfileScene {
  let maxPower = 0;
  let tMin = Infinity;
  let tMax = -Infinity;
  const series = entries.map((e) => ({
    label: e.label,
    points: e.legs.map((leg) => {
      if (leg.power_kw > maxPower) maxPower = leg.power_kw;
      if (leg.departure_time < tMin) tMin = leg.departure_time;
      if (leg.arrival_time > tMax) tMax = leg.arrival_time;
      return { t: leg.departure_time, powerKw: leg.power_kw };
    }),
  }));
  if (!Number.isFinite(tMin)) {
    tMin = 0;
    tMax = 1;
  }
  return { series, maxPower, tMin, tMax };
}
