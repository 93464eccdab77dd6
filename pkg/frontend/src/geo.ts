/**
 * Equirectangular mapping between geographic coordinates and canvas
 * pixels. Pixel y grows southward, so row 0 of the canvas is the
 * northern edge of the bounding box.
 */

import type { BboxDoc } from './types.js';

export interface PixelPoint {
  x: number;
  y: number;
}

export class MapProjection {
  constructor(
    readonly bbox: BboxDoc,
    readonly width: number,
    readonly height: number,
  ) {}

  get latSpan(): number {
    return this.bbox.lat_max - this.bbox.lat_min;
  }

  get lonSpan(): number {
    return this.bbox.lon_max - this.bbox.lon_min;
  }

  toPixel(lat: number, lon: number): PixelPoint {
    return {
      x: ((lon - this.bbox.lon_min) / this.lonSpan) * this.width,
      y: ((this.bbox.lat_max - lat) / this.latSpan) * this.height,
    };
  }

  toLatLon(x: number, y: number): { lat: number; lon: number } {
    return {
      lat: this.bbox.lat_max - (y / this.height) * this.latSpan,
      lon: this.bbox.lon_min + (x / this.width) * this.lonSpan,
    };
  }
}
