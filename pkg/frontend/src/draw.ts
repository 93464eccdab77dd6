/**
 * Constraint drawing: pointer paths to lat/lon polygon rings.
 *
 * Rectangle mode turns a drag into its 4 corners. Lasso mode closes the
 * sampled pointer path into a ring and decimates it to a vertex budget,
 * always keeping the first and last sampled points. Paths with fewer
 * than 3 distinct points are discarded (the service would reject them).
 */

import type { MapProjection, PixelPoint } from './geo.js';

export const MAX_RING_VERTICES = 256;

export type LatLonRing = [number, number][];

export function rectangleRing(
  start: PixelPoint, end: PixelPoint, proj: MapProjection,
): LatLonRing {
  const corners: PixelPoint[] = [
    start,
    { x: end.x, y: start.y },
    end,
    { x: start.x, y: end.y },
  ];
  return corners.map((p) => {
    const { lat, lon } = proj.toLatLon(p.x, p.y);
    return [lat, lon] as [number, number];
  });
}

/** Drop consecutive duplicate samples (pointer events repeat positions). */
export function dedupePath(path: PixelPoint[]): PixelPoint[] {
  const out: PixelPoint[] = [];
  for (const p of path) {
    const last = out[out.length - 1];
    if (!last || last.x !== p.x || last.y !== p.y) out.push(p);
  }
  return out;
}

function distinctCount(path: PixelPoint[]): number {
  const seen = new Set<string>();
  for (const p of path) seen.add(`${p.x},${p.y}`);
  return seen.size;
}

/**
 * Uniform index decimation to at most maxPoints, preserving the first
 * and last elements exactly.
 */
export function decimatePath<T>(points: T[], maxPoints: number): T[] {
  if (maxPoints < 2) throw new Error('decimation budget must be >= 2');
  if (points.length <= maxPoints) return points.slice();
  const out: T[] = [];
  const lastIdx = points.length - 1;
  let prev = -1;
  for (let i = 0; i < maxPoints; i++) {
    const idx = Math.round((i * lastIdx) / (maxPoints - 1));
    if (idx !== prev) {
      out.push(points[idx] as T);
      prev = idx;
    }
  }
  return out;
}

/**
 * Sampled lasso path -> lat/lon ring, or null when the path is too
 * degenerate to form a polygon.
 */
export function lassoRing(
  path: PixelPoint[], proj: MapProjection,
  maxPoints: number = MAX_RING_VERTICES,
): LatLonRing | null {
  const cleaned = dedupePath(path);
  if (distinctCount(cleaned) < 3) return null;
  const kept = decimatePath(cleaned, maxPoints);
  return kept.map((p) => {
    const { lat, lon } = proj.toLatLon(p.x, p.y);
    return [lat, lon] as [number, number];
  });
}
