/**
 * Application shell: wires the control panels, map stack, and
 * comparison views to the routing service.
 *
 * Numbers on screen come from service responses only. The client
 * formats them (two decimals, signed percentages) but never computes a
 * metric of its own; windowed figures come from the segment endpoint,
 * deltas from the rehearsal comparison, legends from slice payloads.
 */

import { ApiClient, ApiError, isAbortError } from './api.js';
import {
  BarsScene, BAR_QUANTITIES, comparisonRows, emissionBars, powerProfile,
  TableEntry,
} from './charts.js';
import { COLORMAPS, getColormap } from './colormaps.js';
import { lassoRing, rectangleRing } from './draw.js';
import { formatLead, rawNumber } from './format.js';
import { MapProjection, PixelPoint } from './geo.js';
import { decodeSlice, DecodedSlice, rasterizeOverlay } from './overlay.js';
import {
  renderBasemap, renderComparisonTable, renderLegend, renderOverlay,
  renderPowerProfile, renderBars, renderVectors, routeColor, showToast,
  VectorLayers,
} from './render.js';
import { DrawMode, legsInWindow, MAX_REHEARSALS, ViewState } from './state.js';
import type {
  FetchLike, RouteLegsResponse, RoutePayload, SummaryDoc,
} from './types.js';

const MAP_SIZE = 480;

const PAGE = `
<div class="panels">
  <section class="panel" id="sea-panel">
    <h3>Sea surface</h3>
    <label>Seed <input id="seed-input" type="number" value="5"></label>
    <label>Horizon <input id="horizon-input" type="number" value="2" min="0"></label>
    <label>Stored file <input id="wgrid-input" type="text" placeholder="(synthetic)"></label>
    <button id="load-forecast-btn">Forecast</button>
    <label>Channel <select id="channel-select"></select></label>
    <label>Colormap <select id="colormap-select"></select></label>
    <label class="slider-row">Rollout
      <input id="rollout-slider" type="range" min="0" max="0" value="0" step="1">
    </label>
    <div id="timestamp">t = <span id="timestamp-seconds" class="num"></span> s
      <span id="timestamp-lead" class="lead"></span></div>
    <div class="legend">low <span id="legend-min" class="num"></span>
      – <span id="legend-max" class="num"></span> high</div>
  </section>
  <section class="panel" id="route-panel">
    <h3>Ship routing</h3>
    <label>Origin <select id="origin-select"></select></label>
    <label>Destination <select id="dest-select"></select></label>
    <label>Vessel <select id="ship-select"></select></label>
    <button id="route-btn">Compute route</button>
    <div class="draw-controls">
      <button id="mode-none-btn">Pan</button>
      <button id="mode-rect-btn">Rectangle</button>
      <button id="mode-lasso-btn">Lasso</button>
    </div>
    <button id="rehearse-btn">Create rehearsal</button>
    <div id="rehearsal-count"></div>
    <label>Scenario name <input id="scenario-name" type="text" value="scenario"></label>
    <button id="save-scenario-btn">Save scenario</button>
  </section>
</div>
<div id="map-stack" style="width:${MAP_SIZE}px;height:${MAP_SIZE}px">
  <canvas id="basemap-canvas" width="${MAP_SIZE}" height="${MAP_SIZE}"></canvas>
  <canvas id="overlay-canvas" width="${MAP_SIZE}" height="${MAP_SIZE}"></canvas>
  <canvas id="vector-canvas" width="${MAP_SIZE}" height="${MAP_SIZE}"></canvas>
</div>
<section class="panel" id="window-panel">
  <h3>Temporal window</h3>
  <input id="window-start" type="range" min="0" max="1000" value="0">
  <input id="window-end" type="range" min="0" max="1000" value="1000">
  <span id="window-label"></span>
</section>
<section class="panel">
  <h3>Comparison</h3>
  <div id="comparison-container"></div>
</section>
<section class="panel">
  <h3>Engine power</h3>
  <span id="power-max" class="num"></span> kW max
  <span id="power-legend"></span>
  <canvas id="power-canvas" width="640" height="160"></canvas>
</section>
<section class="panel">
  <h3>Emissions</h3>
  <div id="bars-container"></div>
</section>
<div id="toast" class="toast"></div>
`;

interface RouteView {
  id: string;
  label: string;
  payload: RoutePayload;
}

export interface AppOptions {
  fetch: FetchLike;
  baseUrl?: string;
}

export class App {
  readonly state = new ViewState();
  readonly api: ApiClient;
  private readonly root: HTMLElement;
  private readonly doc: Document;

  private slice: DecodedSlice | null = null;
  private projection: MapProjection | null = null;
  private optimized: RouteView | null = null;
  private minDistance: RouteView | null = null;
  private legsByRoute = new Map<string, RouteLegsResponse>();
  private windowSummaries = new Map<string, SummaryDoc>();
  private dragStart: PixelPoint | null = null;
  private lassoPath: PixelPoint[] = [];

  constructor(root: HTMLElement, opts: AppOptions) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.api = new ApiClient({ fetch: opts.fetch, baseUrl: opts.baseUrl });
    root.innerHTML = PAGE;
    this.populateStaticSelects();
    this.bindControls();
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.root.querySelector<T>(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found;
  }

  private populateStaticSelects(): void {
    const cmSelect = this.el<HTMLSelectElement>('colormap-select');
    for (const cm of COLORMAPS) {
      const opt = this.doc.createElement('option');
      opt.value = cm.name;
      opt.textContent = cm.label;
      cmSelect.appendChild(opt);
    }
  }

  private bindControls(): void {
    this.el('load-forecast-btn').addEventListener('click', () => {
      void this.loadForecast();
    });
    this.el('route-btn').addEventListener('click', () => {
      void this.computeRoute();
    });
    this.el('rehearse-btn').addEventListener('click', () => {
      void this.createRehearsal();
    });
    this.el('save-scenario-btn').addEventListener('click', () => {
      void this.saveScenario();
    });
    this.el<HTMLInputElement>('rollout-slider').addEventListener('input', (e) => {
      void this.showSlice(Number((e.target as HTMLInputElement).value));
    });
    this.el<HTMLSelectElement>('channel-select').addEventListener('change', (e) => {
      this.state.channel = (e.target as HTMLSelectElement).value;
      void this.showSlice(this.state.rolloutIndex);
    });
    this.el<HTMLSelectElement>('colormap-select').addEventListener('change', (e) => {
      this.state.colormap = (e.target as HTMLSelectElement).value;
      this.repaintOverlay();
    });
    this.el('mode-none-btn').addEventListener('click', () => this.setDrawMode('none'));
    this.el('mode-rect-btn').addEventListener('click', () => this.setDrawMode('rectangle'));
    this.el('mode-lasso-btn').addEventListener('click', () => this.setDrawMode('lasso'));

    const vectors = this.el<HTMLCanvasElement>('vector-canvas');
    vectors.addEventListener('pointerdown', (e) => {
      const r = vectors.getBoundingClientRect();
      this.pointerDown(e.clientX - r.left, e.clientY - r.top);
    });
    vectors.addEventListener('pointermove', (e) => {
      const r = vectors.getBoundingClientRect();
      this.pointerMove(e.clientX - r.left, e.clientY - r.top);
    });
    vectors.addEventListener('pointerup', (e) => {
      const r = vectors.getBoundingClientRect();
      void this.pointerUp(e.clientX - r.left, e.clientY - r.top);
    });

    const onWindowInput = () => { void this.applyWindowSliders(); };
    this.el('window-start').addEventListener('input', onWindowInput);
    this.el('window-end').addEventListener('input', onWindowInput);
  }

  /** Fill the port and vessel selects from the service's preset list. */
  async init(): Promise<void> {
    const doc = await this.api.ships();
    const origin = this.el<HTMLSelectElement>('origin-select');
    const dest = this.el<HTMLSelectElement>('dest-select');
    for (const port of doc.ports) {
      for (const select of [origin, dest]) {
        const opt = this.doc.createElement('option');
        opt.value = port.name;
        opt.textContent = port.name;
        select.appendChild(opt);
      }
    }
    if (doc.ports.length > 1) {
      dest.selectedIndex = 1;
    }
    const ships = this.el<HTMLSelectElement>('ship-select');
    for (const ship of doc.ships) {
      const opt = this.doc.createElement('option');
      opt.value = ship.name;
      opt.textContent = ship.name;
      if (ship.name === doc.default) opt.selected = true;
      ships.appendChild(opt);
    }
    ships.dataset.default = doc.default;
  }

  private toast(message: string, kind: 'info' | 'error' = 'info'): void {
    showToast(this.el('toast'), message, kind);
  }

  // -- forecasts -----------------------------------------------------------

  forecastRequestBody(): unknown {
    const wgrid = this.el<HTMLInputElement>('wgrid-input').value.trim();
    const horizon = Number(this.el<HTMLInputElement>('horizon-input').value);
    const init = wgrid
      ? { wgrid }
      : {
        synthetic: {
          seed: Number(this.el<HTMLInputElement>('seed-input').value),
          velocity: [0.4, 0.25],
          diffusion: 0.2,
        },
      };
    return { init, horizon, resolution: { shape: [24, 24] } };
  }

  async loadForecast(): Promise<void> {
    try {
      const resp = await this.api.createForecast(this.forecastRequestBody());
      this.state.forecastId = resp.forecast_id;
      this.state.meta = resp.meta;
      this.state.clearVoyage();
      this.optimized = null;
      this.minDistance = null;
      this.legsByRoute.clear();
      this.windowSummaries.clear();

      const channels = this.el<HTMLSelectElement>('channel-select');
      if (!channels.options.length) {
        for (const name of resp.meta.channels) {
          const opt = this.doc.createElement('option');
          opt.value = name;
          opt.textContent = name;
          channels.appendChild(opt);
        }
      }
      const slider = this.el<HTMLInputElement>('rollout-slider');
      slider.max = String(resp.meta.ntime - 1);
      slider.value = '0';
      await this.showSlice(0);
      this.renderCharts();
      this.toast(`forecast ${resp.forecast_id} ready (${resp.meta.model})`, 'info');
    } catch (err) {
      this.reportError(err);
    }
  }

  /**
   * Fetch and draw one rollout step. Slider moves cancel the previous
   * in-flight slice; failures keep the previous layer on screen.
   */
  async showSlice(index: number): Promise<void> {
    if (!this.state.forecastId || !this.state.meta) return;
    const clamped = this.state.setRolloutIndex(index);
    try {
      const payload = await this.api.fieldSlice(
        this.state.forecastId, clamped, this.state.channel);
      this.slice = decodeSlice(payload);
      this.projection = new MapProjection(payload.bbox, MAP_SIZE, MAP_SIZE);
      this.el('timestamp-seconds').textContent = rawNumber(payload.timestamp);
      this.el('timestamp-lead').textContent =
        formatLead(payload.timestamp - this.state.meta.t0);
      renderLegend(this.el('legend-min'), this.el('legend-max'),
                   payload.vmin, payload.vmax);
      renderBasemap(this.el<HTMLCanvasElement>('basemap-canvas'),
                    this.slice.mask, this.slice.width, this.slice.height);
      this.repaintOverlay();
      this.repaintVectors();
    } catch (err) {
      if (isAbortError(err)) return; // superseded by a newer slider move
      this.reportError(err);
    }
  }

  private repaintOverlay(): void {
    if (!this.slice) return;
    const layer = rasterizeOverlay(this.slice, getColormap(this.state.colormap));
    renderOverlay(this.el<HTMLCanvasElement>('overlay-canvas'), layer);
  }

  // -- routing -------------------------------------------------------------

  routeRequestBody(): unknown {
    const ships = this.el<HTMLSelectElement>('ship-select');
    const body: Record<string, unknown> = {
      forecast_id: this.state.forecastId,
      origin: this.el<HTMLSelectElement>('origin-select').value,
      dest: this.el<HTMLSelectElement>('dest-select').value,
    };
    if (ships.value && ships.value !== ships.dataset.default) {
      body.ship = { preset: ships.value };
    }
    return body;
  }

  async computeRoute(): Promise<void> {
    if (!this.state.forecastId) {
      this.toast('load a forecast first', 'error');
      return;
    }
    try {
      const resp = await this.api.createRoute(this.routeRequestBody());
      this.state.clearVoyage();
      this.windowSummaries.clear();
      this.legsByRoute.clear();
      this.state.routeId = resp.route_id;
      this.state.minDistanceRouteId = resp.min_distance_route_id;
      this.optimized = { id: resp.route_id, label: 'optimized',
                         payload: resp.routes.optimized };
      this.minDistance = { id: resp.min_distance_route_id,
                           label: resp.routes.min_distance.kind,
                           payload: resp.routes.min_distance };
      await this.fetchLegs(resp.route_id);
      await this.fetchLegs(resp.min_distance_route_id);
      this.resetWindowSliders();
      this.renderCharts();
      this.repaintVectors();
    } catch (err) {
      this.reportError(err);
    }
  }

  private async fetchLegs(rid: string): Promise<void> {
    this.legsByRoute.set(rid, await this.api.routeLegs(rid));
  }

  // -- constraint drawing ----------------------------------------------------

  setDrawMode(mode: DrawMode): void {
    this.state.drawMode = mode;
    this.dragStart = null;
    this.lassoPath = [];
    for (const [id, m] of [['mode-none-btn', 'none'],
                           ['mode-rect-btn', 'rectangle'],
                           ['mode-lasso-btn', 'lasso']] as const) {
      this.el(id).classList.toggle('active', m === mode);
    }
  }

  pointerDown(x: number, y: number): void {
    if (this.state.drawMode === 'none') return;
    this.dragStart = { x, y };
    this.lassoPath = [{ x, y }];
  }

  pointerMove(x: number, y: number): void {
    if (this.state.drawMode === 'lasso' && this.dragStart) {
      this.lassoPath.push({ x, y });
    }
  }

  async pointerUp(x: number, y: number): Promise<void> {
    if (!this.dragStart || !this.projection) {
      this.dragStart = null;
      return;
    }
    const start = this.dragStart;
    this.dragStart = null;
    let ring: [number, number][] | null = null;
    if (this.state.drawMode === 'rectangle') {
      ring = rectangleRing(start, { x, y }, this.projection);
    } else if (this.state.drawMode === 'lasso') {
      this.lassoPath.push({ x, y });
      ring = lassoRing(this.lassoPath, this.projection);
      this.lassoPath = [];
    }
    if (!ring) {
      this.toast('draw at least 3 distinct points to make a zone', 'error');
      return;
    }
    await this.submitConstraint(ring);
  }

  /** Send a drawn ring; the echoed polygon is what gets rendered. */
  async submitConstraint(ring: [number, number][]): Promise<void> {
    try {
      const resp = await this.api.createConstraint([ring]);
      this.state.pendingConstraint = {
        id: resp.constraint_id,
        polygons: resp.polygons,
      };
      this.toast(`zone ${resp.constraint_id} staged for the next rehearsal`, 'info');
      this.repaintVectors();
    } catch (err) {
      this.reportError(err);
    }
  }

  // -- rehearsals ------------------------------------------------------------

  async createRehearsal(): Promise<void> {
    if (!this.state.routeId) {
      this.toast('compute a base route first', 'error');
      return;
    }
    if (!this.state.canAddRehearsal()) {
      this.toast(`rehearsal limit reached (${MAX_REHEARSALS} of ${MAX_REHEARSALS})`,
                 'error');
      return;
    }
    const polygons = this.state.pendingConstraint?.polygons ?? [];
    try {
      const resp = await this.api.createRehearsal(this.state.routeId, polygons);
      this.state.addRehearsal({
        routeId: resp.route_id,
        route: resp.route,
        summary: resp.comparison.rehearsal,
        deltas: resp.comparison.deltas,
        polygons: resp.added_polygons,
        legs: null,
      });
      this.state.pendingConstraint = null;
      await this.fetchLegs(resp.route_id);
      const entry = this.state.rehearsals[this.state.rehearsals.length - 1];
      if (entry) entry.legs = this.legsByRoute.get(resp.route_id)?.legs ?? null;
      this.renderCharts();
      this.repaintVectors();
    } catch (err) {
      this.reportError(err);
    }
  }

  // -- temporal window ---------------------------------------------------------

  private voyageSpan(): { t0: number; t1: number } | null {
    if (!this.optimized) return null;
    const route = this.optimized.payload.route;
    const last = route.legs[route.legs.length - 1];
    if (!last) return null;
    return { t0: route.departure_time, t1: last.arrival_time };
  }

  private resetWindowSliders(): void {
    this.el<HTMLInputElement>('window-start').value = '0';
    this.el<HTMLInputElement>('window-end').value = '1000';
    this.el('window-label').textContent = 'full voyage';
    this.state.window = null;
  }

  private async applyWindowSliders(): Promise<void> {
    const span = this.voyageSpan();
    if (!span) return;
    const lo = Number(this.el<HTMLInputElement>('window-start').value);
    const hi = Number(this.el<HTMLInputElement>('window-end').value);
    if (lo === 0 && hi === 1000) {
      this.state.window = null;
      this.windowSummaries.clear();
      this.el('window-label').textContent = 'full voyage';
      this.renderCharts();
      this.repaintVectors();
      return;
    }
    const total = span.t1 + 1 - span.t0;
    const start = span.t0 + (Math.min(lo, hi) / 1000) * total;
    const end = span.t0 + (Math.max(lo + 1, hi) / 1000) * total;
    await this.setWindow(start, end);
  }

  /**
   * Filter the comparison to legs departing inside [start, end): bars
   * switch to segment summaries from the service and the map highlights
   * the selected stretch of each path.
   */
  async setWindow(start: number, end: number): Promise<void> {
    this.state.window = { start, end };
    this.el('window-label').textContent =
      `${formatLead(start - (this.state.meta?.t0 ?? 0))} to ` +
      `${formatLead(end - (this.state.meta?.t0 ?? 0))}`;
    const targets: { key: string; rid: string }[] = [];
    if (this.optimized) targets.push({ key: 'optimized', rid: this.optimized.id });
    this.state.rehearsals.forEach((r, i) => {
      targets.push({ key: `rehearsal ${i + 1}`, rid: r.routeId });
    });
    try {
      const docs = await Promise.all(
        targets.map((t) => this.api.routeSegment(t.rid, start, end)));
      docs.forEach((doc, i) => {
        const target = targets[i];
        if (target) this.windowSummaries.set(target.key, doc.summary);
      });
      this.renderCharts();
      this.repaintVectors();
    } catch (err) {
      if (isAbortError(err)) return;
      this.reportError(err);
    }
  }

  // -- scenarios ---------------------------------------------------------------

  async saveScenario(): Promise<void> {
    if (!this.state.routeId) {
      this.toast('compute a base route first', 'error');
      return;
    }
    try {
      const name = this.el<HTMLInputElement>('scenario-name').value || 'scenario';
      const resp = await this.api.saveScenario({
        name,
        route_id: this.state.routeId,
        rehearsal_ids: this.state.rehearsals.map((r) => r.routeId),
      });
      this.toast(`scenario saved as ${resp.scenario_id}`, 'info');
    } catch (err) {
      this.reportError(err);
    }
  }

  // -- rendering ----------------------------------------------------------------

  private barEntries(): { label: string; summary: SummaryDoc }[] {
    const out: { label: string; summary: SummaryDoc }[] = [];
    if (this.optimized) {
      out.push({
        label: 'optimized',
        summary: this.windowSummaries.get('optimized')
          ?? this.optimized.payload.summary,
      });
    }
    this.state.rehearsals.forEach((r, i) => {
      const key = `rehearsal ${i + 1}`;
      out.push({ label: key, summary: this.windowSummaries.get(key) ?? r.summary });
    });
    return out;
  }

  renderCharts(): void {
    const entries: TableEntry[] = [];
    if (this.minDistance) {
      entries.push({ label: this.minDistance.label,
                     summary: this.minDistance.payload.summary, deltas: null });
    }
    if (this.optimized) {
      entries.push({
        label: 'optimized',
        summary: this.optimized.payload.summary,
        deltas: this.optimized.payload.summary.reduction_pct ?? null,
      });
    }
    this.state.rehearsals.forEach((r, i) => {
      entries.push({ label: `rehearsal ${i + 1}`, summary: r.summary,
                     deltas: r.deltas });
    });
    renderComparisonTable(this.el('comparison-container'), comparisonRows(entries));

    const scenes: BarsScene[] = [];
    const barEntries = this.barEntries();
    if (barEntries.length) {
      for (const q of BAR_QUANTITIES) {
        scenes.push(emissionBars(q.key, q.title, barEntries));
      }
    }
    renderBars(this.el('bars-container'), scenes);

    const powerEntries: { label: string; legs: RouteLegsResponse['legs'] }[] = [];
    if (this.optimized) {
      const legs = this.legsByRoute.get(this.optimized.id);
      if (legs) powerEntries.push({ label: 'optimized', legs: legs.legs });
    }
    this.state.rehearsals.forEach((r, i) => {
      if (r.legs) powerEntries.push({ label: `rehearsal ${i + 1}`, legs: r.legs });
    });
    renderPowerProfile(this.el<HTMLCanvasElement>('power-canvas'),
                       this.el('power-max'), this.el('power-legend'),
                       powerProfile(powerEntries));

    this.el('rehearsal-count').textContent =
      `${this.state.rehearsals.length} / ${MAX_REHEARSALS} rehearsals`;
  }

  private repaintVectors(): void {
    if (!this.projection) return;
    const layers: VectorLayers = { routes: [], constraints: [], flaggedLegs: [] };
    const win = this.state.window;
    let colorIdx = 0;
    if (this.minDistance) {
      layers.routes.push({ label: this.minDistance.label,
                           route: this.minDistance.payload.route,
                           color: '#9aa7b5' });
    }
    if (this.optimized) {
      const legs = this.legsByRoute.get(this.optimized.id);
      layers.routes.push({
        label: 'optimized',
        route: this.optimized.payload.route,
        color: routeColor(colorIdx++),
        highlight: win && legs
          ? legsInWindow(legs.legs, win.start, win.end) : undefined,
      });
      if (legs) {
        layers.flaggedLegs.push(...legs.legs.filter((l) => l.flagged));
      }
    }
    this.state.rehearsals.forEach((r, i) => {
      const legs = this.legsByRoute.get(r.routeId);
      layers.routes.push({
        label: `rehearsal ${i + 1}`,
        route: r.route,
        color: routeColor(colorIdx++),
        highlight: win && legs
          ? legsInWindow(legs.legs, win.start, win.end) : undefined,
      });
      if (legs) {
        layers.flaggedLegs.push(...legs.legs.filter((l) => l.flagged));
      }
      layers.constraints.push(...r.polygons);
    });
    if (this.state.pendingConstraint) {
      layers.constraints.push(...this.state.pendingConstraint.polygons);
    }
    renderVectors(this.el<HTMLCanvasElement>('vector-canvas'),
                  this.projection, layers);
  }

  private reportError(err: unknown): void {
    if (err instanceof ApiError) {
      this.toast(err.message, 'error');
    } else {
      this.toast(err instanceof Error ? err.message : String(err), 'error');
    }
  }
}
