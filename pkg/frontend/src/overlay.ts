/**
 * Field-slice decoding and rasterization.
 *
 * Slices arrive as base64 little-endian float32 planes in C order with
 * row 0 at the southern edge; the raster flips rows so canvas row 0 is
 * north. Land cells (mask 0) become fully transparent pixels so the
 * basemap shows through.
 */

import type { FieldSlicePayload } from './types.js';
import { Colormap, normalize, sampleColormap } from './colormaps.js';

export interface DecodedSlice {
  width: number;
  height: number;
  values: Float32Array;
  mask: Uint8Array;
  vmin: number;
  vmax: number;
  timestamp: number;
  tIndex: number;
  channel: string;
}

export interface RasterLayer {
  width: number;
  height: number;
  /** RGBA, canvas row order (row 0 = north). */
  pixels: Uint8ClampedArray<ArrayBuffer>;
}

function bytesFromBase64(s: string): Uint8Array {
  const bin = atob(s);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export function decodeSlice(payload: FieldSlicePayload): DecodedSlice {
  const [nlat, nlon] = payload.shape;
  const raw = bytesFromBase64(payload.data);
  if (raw.length !== nlat * nlon * 4) {
    throw new Error(
      `field payload is ${raw.length} bytes, expected ${nlat * nlon * 4}`);
  }
  const view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
  const values = new Float32Array(nlat * nlon);
  for (let i = 0; i < values.length; i++) {
    values[i] = view.getFloat32(i * 4, true);
  }
  const mask = bytesFromBase64(payload.mask);
  if (mask.length !== nlat * nlon) {
    throw new Error(
      `mask payload is ${mask.length} bytes, expected ${nlat * nlon}`);
  }
  return {
    width: nlon,
    height: nlat,
    values,
    mask,
    vmin: payload.vmin,
    vmax: payload.vmax,
    timestamp: payload.timestamp,
    tIndex: payload.t_index,
    channel: payload.channel,
  };
}

export function rasterizeOverlay(slice: DecodedSlice, cm: Colormap): RasterLayer {
  const { width, height, values, mask, vmin, vmax } = slice;
  const pixels = new Uint8ClampedArray(width * height * 4);
  for (let row = 0; row < height; row++) {
    const srcRow = height - 1 - row; // grid row 0 is south, canvas row 0 is north
    for (let col = 0; col < width; col++) {
      const src = srcRow * width + col;
      const dst = (row * width + col) * 4;
      if (!mask[src]) continue; // land stays transparent (alpha 0)
      const [r, g, b] = sampleColormap(cm, normalize(values[src] as number, vmin, vmax));
      pixels[dst] = r;
      pixels[dst + 1] = g;
      pixels[dst + 2] = b;
      pixels[dst + 3] = 255;
    }
  }
  return { width, height, pixels };
}
