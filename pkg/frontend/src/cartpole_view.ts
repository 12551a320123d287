// Canvas view of the cart and pole, drawn to scale on the track, with the
// failure cones at +/-12 degrees marked.

import type { ContinuousState } from "./protocol.js";

export const FAILURE_ANGLE_RAD = (12 * Math.PI) / 180;

export interface TrackGeometry {
  trackLength: number;
  poleLength: number;
}

export interface PoleSegment {
  baseX: number;
  baseY: number;
  tipX: number;
  tipY: number;
}

// World -> pixel x for a track centred in a canvas of the given width.
export function trackToPixelX(x: number, trackLength: number, canvasWidth: number): number {
  const margin = 0.05 * canvasWidth;
  const scale = (canvasWidth - 2 * margin) / trackLength;
  return canvasWidth / 2 + x * scale;
}

// Pole endpoints in pixels; theta 0 is upright, positive leans clockwise
// (to the right on screen; canvas y grows downward).
export function poleSegment(
  state: ContinuousState,
  geometry: TrackGeometry,
  canvasWidth: number,
  cartTopY: number,
): PoleSegment {
  const margin = 0.05 * canvasWidth;
  const scale = (canvasWidth - 2 * margin) / geometry.trackLength;
  const baseX = trackToPixelX(state.x, geometry.trackLength, canvasWidth);
  const lengthPx = geometry.poleLength * scale;
  return {
    baseX,
    baseY: cartTopY,
    tipX: baseX + lengthPx * Math.sin(state.theta),
    tipY: cartTopY - lengthPx * Math.cos(state.theta),
  };
}

export class CartPoleView {
  constructor(
    private readonly canvas: HTMLCanvasElement,
    private geometry: TrackGeometry = { trackLength: 4.4, poleLength: 1.0 },
  ) {}

  setGeometry(geometry: TrackGeometry): void {
    this.geometry = geometry;
  }

  draw(state: ContinuousState | null, failedNow: boolean): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    const groundY = height * 0.78;
    const cartWidth = width * 0.06;
    const cartHeight = height * 0.1;

    // track and its ends
    ctx.strokeStyle = "#888";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const left = trackToPixelX(-this.geometry.trackLength / 2, this.geometry.trackLength, width);
    const right = trackToPixelX(this.geometry.trackLength / 2, this.geometry.trackLength, width);
    ctx.moveTo(left, groundY);
    ctx.lineTo(right, groundY);
    ctx.stroke();
    ctx.strokeStyle = "#c33";
    for (const endX of [left, right]) {
      ctx.beginPath();
      ctx.moveTo(endX, groundY - 14);
      ctx.lineTo(endX, groundY + 6);
      ctx.stroke();
    }
    if (state === null) return;

    const cartTopY = groundY - cartHeight;
    const segment = poleSegment(state, this.geometry, width, cartTopY);

    // failure cones around upright, anchored at the pivot
    const coneLen = (this.geometry.poleLength / this.geometry.trackLength) * (width * 0.9) * 1.15;
    ctx.strokeStyle = "rgba(200, 60, 60, 0.45)";
    ctx.setLineDash([6, 5]);
    ctx.lineWidth = 1.5;
    for (const sign of [-1, 1]) {
      ctx.beginPath();
      ctx.moveTo(segment.baseX, cartTopY);
      ctx.lineTo(
        segment.baseX + coneLen * Math.sin(sign * FAILURE_ANGLE_RAD),
        cartTopY - coneLen * Math.cos(sign * FAILURE_ANGLE_RAD),
      );
      ctx.stroke();
    }
    ctx.setLineDash([]);

    // cart
    ctx.fillStyle = failedNow ? "#c0392b" : "#2c3e50";
    ctx.fillRect(segment.baseX - cartWidth / 2, cartTopY, cartWidth, cartHeight);

    // pole
    ctx.strokeStyle = "#b5651d";
    ctx.lineWidth = 6;
    ctx.lineCap = "round";
    ctx.beginPath();
    ctx.moveTo(segment.baseX, segment.baseY);
    ctx.lineTo(segment.tipX, segment.tipY);
    ctx.stroke();
  }
}
