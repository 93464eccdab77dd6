/**
 * Client view state and its invariants: the rollout index stays inside
 * the loaded forecast, and at most five rehearsals ride on one base
 * route (the service enforces the same cap server-side).
 */

import type {
  AnalyticsLegDoc, ForecastMeta, RouteDoc, SummaryDoc,
} from './types.js';

export type DrawMode = 'none' | 'rectangle' | 'lasso';

export const MAX_REHEARSALS = 5;

export interface RehearsalEntry {
  routeId: string;
  route: RouteDoc;
  summary: SummaryDoc;
  deltas: Record<string, number>;
  polygons: [number, number][][];
  legs: AnalyticsLegDoc[] | null;
}

export interface TemporalWindow {
  start: number;
  end: number;
}

export class ViewState {
  forecastId: string | null = null;
  meta: ForecastMeta | null = null;
  channel = 'VHM0';
  colormap = 'swell';
  rolloutIndex = 0;

  routeId: string | null = null;
  minDistanceRouteId: string | null = null;

  rehearsals: RehearsalEntry[] = [];
  window: TemporalWindow | null = null;
  drawMode: DrawMode = 'none';
  pendingConstraint: { id: string; polygons: [number, number][][] } | null = null;

  /** Clamp to [0, ntime) of the loaded forecast; 0 when none loaded. */
  setRolloutIndex(index: number): number {
    const ntime = this.meta ? this.meta.ntime : 1;
    const clamped = Math.min(Math.max(Math.trunc(index), 0), ntime - 1);
    this.rolloutIndex = clamped;
    return clamped;
  }

  canAddRehearsal(): boolean {
    return this.rehearsals.length < MAX_REHEARSALS;
  }

  addRehearsal(entry: RehearsalEntry): void {
    if (!this.canAddRehearsal()) {
      throw new Error(`rehearsal list is full (${MAX_REHEARSALS})`);
    }
    this.rehearsals.push(entry);
  }

  clearVoyage(): void {
    this.routeId = null;
    this.minDistanceRouteId = null;
    this.rehearsals = [];
    this.window = null;
    this.pendingConstraint = null;
  }
}

/** Indices of the legs departing inside [start, end), the service's rule. */
export function legsInWindow(
  legs: { departure_time: number }[], start: number, end: number,
): number[] {
  const out: number[] = [];
  legs.forEach((leg, i) => {
    if (leg.departure_time >= start && leg.departure_time < end) out.push(i);
  });
  return out;
}
