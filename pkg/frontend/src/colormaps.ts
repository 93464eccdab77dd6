/** Sequential colormap presets for the field overlay. */

export type Rgb = [number, number, number];

export interface Colormap {
  name: string;
  label: string;
  stops: Rgb[];
}

// Default blue-to-yellow ramp for wave height, plus two alternates.
export const COLORMAPS: Colormap[] = [
  {
    name: 'swell',
    label: 'Swell (blue-yellow)',
    stops: [[8, 29, 88], [34, 94, 168], [29, 145, 192], [127, 205, 187],
            [199, 233, 180], [237, 248, 177], [255, 237, 100]],
  },
  {
    name: 'thermal',
    label: 'Thermal (blue-red)',
    stops: [[13, 8, 135], [126, 3, 168], [204, 71, 120], [248, 149, 64],
            [240, 249, 33]],
  },
  {
    name: 'ice',
    label: 'Ice (greys)',
    stops: [[37, 37, 37], [99, 99, 99], [150, 150, 150], [204, 204, 204],
            [247, 247, 247]],
  },
];

export function getColormap(name: string): Colormap {
  const found = COLORMAPS.find((c) => c.name === name);
  if (!found) throw new Error(`unknown colormap ${name}`);
  return found;
}

/**
 * Sample a colormap at t in [0, 1] with linear interpolation between
 * stops. Out-of-range t clamps; NaN maps to the low end.
 */
export function sampleColormap(cm: Colormap, t: number): Rgb {
  const n = cm.stops.length;
  if (!Number.isFinite(t) || t <= 0) return cm.stops[0] as Rgb;
  if (t >= 1) return cm.stops[n - 1] as Rgb;
  const pos = t * (n - 1);
  const lo = Math.floor(pos);
  const frac = pos - lo;
  const a = cm.stops[lo] as Rgb;
  const b = cm.stops[Math.min(lo + 1, n - 1)] as Rgb;
  return [
    Math.round(a[0] + (b[0] - a[0]) * frac),
    Math.round(a[1] + (b[1] - a[1]) * frac),
    Math.round(a[2] + (b[2] - a[2]) * frac),
  ];
}

/**
 * Min/max normalization for a cell value. A flat field (vmax == vmin)
 * renders mid-scale so constant slices stay a single uniform color.
 */
export function normalize(value: number, vmin: number, vmax: number): number {
  if (vmax <= vmin) return 0.5;
  const t = (value - vmin) / (vmax - vmin);
  return t < 0 ? 0 : t > 1 ? 1 : t;
}
