/**
 * DOM and canvas renderers for the scene structures. Metric text is
 * always tagged with the "num" class so tests can audit every displayed
 * number against intercepted service responses.
 */

import type { BarsScene, PowerProfileScene, TableRowScene } from './charts.js';
import { DELTA_KEYS, TABLE_COLUMNS } from './charts.js';
import { fixed2 } from './format.js';
import type { MapProjection } from './geo.js';
import type { RasterLayer } from './overlay.js';
import type { AnalyticsLegDoc, RouteDoc } from './types.js';

export function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export function renderComparisonTable(
  container: HTMLElement, rows: TableRowScene[],
): void {
  const doc = container.ownerDocument;
  clear(container);
  const table = doc.createElement('table');
  table.className = 'comparison';

  const thead = doc.createElement('thead');
  const headRow = doc.createElement('tr');
  const labels = ['Route', ...TABLE_COLUMNS,
                  ...DELTA_KEYS.map((k) => `Δ ${k.replace('_mt', '')} %`)];
  for (const text of labels) {
    const th = doc.createElement('th');
    th.textContent = text;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = doc.createElement('tbody');
  for (const row of rows) {
    const tr = doc.createElement('tr');
    if (row.pending) tr.className = 'pending';
    const labelCell = doc.createElement('td');
    labelCell.textContent = row.label;
    labelCell.className = 'label';
    tr.appendChild(labelCell);
    for (const cell of row.cells) {
      const td = doc.createElement('td');
      td.textContent = cell;
      td.className = row.pending ? 'pending' : 'num';
      tr.appendChild(td);
    }
    for (const cell of row.deltaCells) {
      const td = doc.createElement('td');
      td.textContent = cell ?? '';
      td.className = cell === null ? 'blank' : 'num delta';
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  container.appendChild(table);
}

export function renderLegend(
  minEl: HTMLElement, maxEl: HTMLElement, vmin: number, vmax: number,
): void {
  minEl.textContent = fixed2(vmin);
  maxEl.textContent = fixed2(vmax);
}

export function renderBars(container: HTMLElement, scenes: BarsScene[]): void {
  const doc = container.ownerDocument;
  clear(container);
  for (const scene of scenes) {
    const group = doc.createElement('div');
    group.className = 'bar-group';
    group.dataset.quantity = scene.quantity;
    const title = doc.createElement('h4');
    title.textContent = scene.title;
    group.appendChild(title);
    for (const bar of scene.bars) {
      const row = doc.createElement('div');
      row.className = 'bar-row';
      const label = doc.createElement('span');
      label.className = 'bar-label';
      label.textContent = bar.label;
      const track = doc.createElement('span');
      track.className = 'bar-track';
      const fill = doc.createElement('span');
      fill.className = 'bar-fill';
      fill.style.width = `${(bar.frac * 100).toFixed(1)}%`;
      track.appendChild(fill);
      const value = doc.createElement('span');
      value.className = 'num bar-value';
      value.textContent = bar.text;
      row.appendChild(label);
      row.appendChild(track);
      row.appendChild(value);
      group.appendChild(row);
    }
    container.appendChild(group);
  }
}

const SERIES_COLORS = ['#1d6fb8', '#c2571a', '#3a8f4d', '#8a4ebf', '#b03060',
                       '#6b6b20', '#13807f'];

export function renderPowerProfile(
  canvas: HTMLCanvasElement, maxLabel: HTMLElement, legendEl: HTMLElement,
  scene: PowerProfileScene,
): void {
  maxLabel.textContent = scene.maxPower > 0 ? fixed2(scene.maxPower) : '';
  const doc = legendEl.ownerDocument;
  clear(legendEl);
  scene.series.forEach((s, i) => {
    const chip = doc.createElement('span');
    chip.className = 'series-chip';
    chip.style.color = SERIES_COLORS[i % SERIES_COLORS.length] as string;
    chip.textContent = `■ ${s.label}`;
    legendEl.appendChild(chip);
  });

  const ctx = canvas.getContext('2d');
  if (!ctx) return; // test environments have no 2d context
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const span = scene.tMax - scene.tMin || 1;
  const top = scene.maxPower || 1;
  scene.series.forEach((s, i) => {
    ctx.strokeStyle = SERIES_COLORS[i % SERIES_COLORS.length] as string;
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.points.forEach((p, j) => {
      const x = ((p.t - scene.tMin) / span) * canvas.width;
      const y = canvas.height - (p.powerKw / top) * (canvas.height - 8) - 4;
      if (j === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

export interface VectorLayers {
  routes: { label: string; route: RouteDoc; color: string; highlight?: number[] }[];
  constraints: [number, number][][];
  flaggedLegs: AnalyticsLegDoc[];
}

export function routeColor(index: number): string {
  return SERIES_COLORS[index % SERIES_COLORS.length] as string;
}

export function renderBasemap(
  canvas: HTMLCanvasElement, mask: Uint8Array, width: number, height: number,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.fillStyle = '#0b2e4f';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const cw = canvas.width / width;
  const ch = canvas.height / height;
  ctx.fillStyle = '#5d5545';
  for (let row = 0; row < height; row++) {
    const srcRow = height - 1 - row;
    for (let col = 0; col < width; col++) {
      if (!mask[srcRow * width + col]) {
        ctx.fillRect(col * cw, row * ch, cw + 0.5, ch + 0.5);
      }
    }
  }
}

export function renderOverlay(canvas: HTMLCanvasElement, layer: RasterLayer): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (typeof ImageData === 'undefined' || !ctx.putImageData) return;
  const image = new ImageData(layer.pixels, layer.width, layer.height);
  const off = canvas.ownerDocument.createElement('canvas');
  off.width = layer.width;
  off.height = layer.height;
  const offCtx = off.getContext('2d');
  if (!offCtx) return;
  offCtx.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

export function renderVectors(
  canvas: HTMLCanvasElement, proj: MapProjection, layers: VectorLayers,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  for (const ring of layers.constraints) {
    ctx.strokeStyle = '#e5c212';
    ctx.fillStyle = 'rgba(229, 194, 18, 0.25)';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ring.forEach(([lat, lon], i) => {
      const { x, y } = proj.toPixel(lat, lon);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }

  for (const entry of layers.routes) {
    const pts = [
      proj.toPixel(entry.route.origin.lat, entry.route.origin.lon),
      ...entry.route.legs.map((l) => proj.toPixel(l.lat, l.lon)),
    ];
    ctx.strokeStyle = entry.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
    if (entry.highlight && entry.highlight.length) {
      ctx.lineWidth = 5;
      ctx.globalAlpha = 0.55;
      ctx.beginPath();
      for (const i of entry.highlight) {
        const a = pts[i];
        const b = pts[i + 1];
        if (!a || !b) continue;
        ctx.moveTo(a.x, a.y);
        ctx.lineTo(b.x, b.y);
      }
      ctx.stroke();
      ctx.globalAlpha = 1;
    }
  }

  ctx.fillStyle = '#ff3b30';
  for (const leg of layers.flaggedLegs) {
    const { x, y } = proj.toPixel(leg.lat, leg.lon);
    ctx.beginPath();
    ctx.arc(x, y, 4, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function showToast(el: HTMLElement, message: string, kind: 'info' | 'error'): void {
  el.textContent = message;
  el.className = `toast show ${kind}`;
}
