// Canvas line charts: best-trial-so-far and unique-states against training
// steps, with rewind events marked on the step axis.

import type { HistoryPoint, RewindMark } from "./model.js";

export interface Series {
  label: string;
  pick: (p: HistoryPoint) => number;
  color: string;
}

export function chartScales(
  points: { x: number; y: number }[],
  width: number,
  height: number,
  pad = 28,
): { toX: (x: number) => number; toY: (y: number) => number; xMax: number; yMax: number } {
  const xMax = Math.max(1, ...points.map((p) => p.x));
  const yMax = Math.max(1, ...points.map((p) => p.y));
  return {
    xMax,
    yMax,
    toX: (x) => pad + (x / xMax) * (width - 2 * pad),
    toY: (y) => height - pad - (y / yMax) * (height - 2 * pad),
  };
}

export class MetricChart {
  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly series: Series,
  ) {}

  draw(history: HistoryPoint[], marks: RewindMark[]): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.font = "11px sans-serif";
    ctx.fillStyle = "#555";
    ctx.fillText(this.series.label, 8, 14);
    if (history.length === 0) return;

    const points = history.map((p) => ({ x: p.step, y: this.series.pick(p) }));
    const { toX, toY, yMax } = chartScales(points, width, height);

    // axes
    ctx.strokeStyle = "#ccc";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(28, 14);
    ctx.lineTo(28, height - 28);
    ctx.lineTo(width - 28, height - 28);
    ctx.stroke();
    ctx.fillText(String(Math.round(yMax)), 2, 24);

    // rewind markers on the step axis
    ctx.strokeStyle = "rgba(200, 120, 40, 0.6)";
    for (const mark of marks) {
      const x = toX(mark.step);
      ctx.beginPath();
      ctx.moveTo(x, height - 28);
      ctx.lineTo(x, height - 20);
      ctx.stroke();
    }

    ctx.strokeStyle = this.series.color;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(toX(p.x), toY(p.y));
      else ctx.lineTo(toX(p.x), toY(p.y));
    });
    ctx.stroke();
  }
}
