/**
 * Typed shapes of the routing service's JSON payloads (/api/v1).
 *
 * The client never derives a displayed metric itself; everything it
 * shows comes out of one of these documents.
 */

export interface JobDoc {
  id: string;
  kind: string;
  status: 'pending' | 'done' | 'failed';
  error: string | null;
}

export interface ErrorDoc {
  code: string;
  message: string;
  detail?: unknown;
}

export interface ForecastMeta {
  horizon: number;
  step_seconds: number;
  shape: [number, number];
  lat_span: [number, number];
  lon_span: [number, number];
  t0: number;
  ntime: number;
  channels: string[];
  model: string;
  linear_mode: boolean;
  assimilation_steps: number[];
}

export interface ForecastResponse {
  job: JobDoc;
  forecast_id: string;
  cached: boolean;
  meta: ForecastMeta;
}

export interface BboxDoc {
  lat_min: number;
  lat_max: number;
  lon_min: number;
  lon_max: number;
}

export interface FieldSlicePayload {
  forecast_id: string;
  t_index: number;
  channel: string;
  timestamp: number;
  shape: [number, number];
  bbox: BboxDoc;
  vmin: number;
  vmax: number;
  /** base64 little-endian float32, C order, row 0 = southernmost */
  data: string;
  /** base64 uint8, 1 = ocean */
  mask: string;
  encoding: { dtype: string; order: string; mask_dtype: string };
}

export interface LegDoc {
  node: number;
  lat: number;
  lon: number;
  departure_time: number;
  arrival_time: number;
  heading_deg: number;
  distance_nm: number;
  v_eff_knots: number;
  wave_height_m: number;
  wave_from_deg: number;
  wave_period_s: number;
}

export interface RouteDoc {
  kind: string;
  origin: { node: number; lat: number; lon: number };
  destination: { node: number; lat: number; lon: number };
  departure_time: number;
  total_nm: number;
  total_hours: number;
  legs: LegDoc[];
}

export interface SummaryDoc {
  voyage_hours: number;
  fuel_mt: number;
  co2_mt: number;
  sox_mt: number;
  nox_mt: number;
  pm_mt: number;
  miles_nm: number;
  safety_pct: number;
  reduction_pct?: Record<string, number>;
  empty?: boolean;
}

export interface RoutePayload {
  id: string;
  kind: string;
  route: RouteDoc;
  geojson: unknown;
  summary: SummaryDoc;
}

export interface RouteResponse {
  job: JobDoc;
  route_id: string;
  min_distance_route_id: string;
  routes: { optimized: RoutePayload; min_distance: RoutePayload };
}

export interface AnalyticsLegDoc extends LegDoc {
  power_kw: number;
  energy_kwh: number;
  fuel_kg: number;
  co2_kg: number;
  sox_kg: number;
  nox_kg: number;
  pm_kg: number;
  surf_riding: boolean;
  parametric_roll: boolean;
  flagged: boolean;
}

export interface RouteLegsResponse {
  route_id: string;
  kind: string;
  departure_time: number;
  arrival_time: number;
  legs: AnalyticsLegDoc[];
}

export interface SegmentResponse {
  route_id: string;
  t_start: number;
  t_end: number;
  summary: SummaryDoc;
}

export interface ConstraintResponse {
  constraint_id: string;
  count: number;
  polygons: [number, number][][];
}

export interface RehearsalResponse {
  job: JobDoc;
  route_id: string;
  base_id: string;
  route: RouteDoc;
  geojson: unknown;
  summary: SummaryDoc;
  added_polygons: [number, number][][];
  comparison: {
    base: SummaryDoc;
    rehearsal: SummaryDoc;
    deltas: Record<string, number>;
  };
}

export interface ShipDoc {
  name: string;
  v_design: number;
  p_installed: number;
  sfoc: number;
  length: number;
  displacement: number;
  roll_period: number;
  load_factor: number;
  v_min: number;
}

export interface ShipsResponse {
  ships: ShipDoc[];
  ports: { name: string; lat: number; lon: number }[];
  default: string;
}

/** Minimal structural slice of fetch so tests can hand in a double. */
export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
  signal?: AbortSignal;
}) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;
