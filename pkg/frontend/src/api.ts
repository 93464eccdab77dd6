/**
 * Typed client for the routing service. Interaction classes that can
 * fire rapidly (the rollout slider, the temporal window) cancel their
 * own superseded in-flight request instead of racing it.
 */

import type {
  ConstraintResponse, FetchLike, FieldSlicePayload, ForecastResponse,
  RehearsalResponse, RouteLegsResponse, RouteResponse, SegmentResponse,
  ShipsResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export function isAbortError(err: unknown): boolean {
  return err instanceof Error && err.name === 'AbortError';
}

interface RequestOptions {
  body?: unknown;
  query?: Record<string, number | string>;
  /** Requests sharing a class cancel the previous in-flight one. */
  interactionClass?: string;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;
  private readonly baseUrl: string;
  private readonly inflight = new Map<string, AbortController>();

  constructor(opts: { fetch: FetchLike; baseUrl?: string }) {
    this.fetchImpl = opts.fetch;
    this.baseUrl = (opts.baseUrl ?? '').replace(/\/$/, '');
  }

  private async request<T>(
    method: string, path: string, opts: RequestOptions = {},
  ): Promise<T> {
    let url = `${this.baseUrl}/api/v1${path}`;
    if (opts.query) {
      const params = Object.entries(opts.query)
        .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
        .join('&');
      url += `?${params}`;
    }
    let signal: AbortSignal | undefined;
    if (opts.interactionClass) {
      this.inflight.get(opts.interactionClass)?.abort();
      const controller = new AbortController();
      this.inflight.set(opts.interactionClass, controller);
      signal = controller.signal;
    }
    const init: Parameters<FetchLike>[1] = { method, signal };
    if (opts.body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(opts.body);
    }
    const resp = await this.fetchImpl(url, init);
    if (!resp.ok) {
      let code = 'error';
      let message = `request failed (${resp.status})`;
      let detail: unknown = null;
      try {
        const doc = await resp.json() as Record<string, unknown>;
        if (typeof doc.code === 'string') code = doc.code;
        if (typeof doc.message === 'string') message = doc.message;
        detail = doc.detail ?? null;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(message, code, resp.status, detail);
    }
    return resp.json() as Promise<T>;
  }

  health(): Promise<{ status: string; version: string; model: string }> {
    return this.request('GET', '/health');
  }

  ships(): Promise<ShipsResponse> {
    return this.request('GET', '/ships');
  }

  createForecast(body: unknown): Promise<ForecastResponse> {
    return this.request('POST', '/forecasts', { body });
  }

  fieldSlice(fid: string, tIndex: number, channel: string): Promise<FieldSlicePayload> {
    return this.request('GET', `/forecasts/${fid}/fields/${tIndex}/${channel}`,
                        { interactionClass: 'field-slice' });
  }

  createConstraint(polygons: [number, number][][]): Promise<ConstraintResponse> {
    return this.request('POST', '/constraints', { body: { polygons } });
  }

  createRoute(body: unknown): Promise<RouteResponse> {
    return this.request('POST', '/routes', { body });
  }

  routeLegs(rid: string): Promise<RouteLegsResponse> {
    return this.request('GET', `/routes/${rid}/legs`);
  }

  routeSegment(rid: string, tStart: number, tEnd: number): Promise<SegmentResponse> {
    return this.request('GET', `/routes/${rid}/segment`, {
      query: { t_start: tStart, t_end: tEnd },
      interactionClass: `segment:${rid}`,
    });
  }

  createRehearsal(routeId: string, polygons: [number, number][][]): Promise<RehearsalResponse> {
    return this.request('POST', '/rehearsals', { body: { route_id: routeId, polygons } });
  }

  saveScenario(body: unknown): Promise<{ scenario_id: string }> {
    return this.request('POST', '/scenarios', { body });
  }
}
