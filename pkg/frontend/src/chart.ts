import { SeriesPoint } from "./buffers";

export interface Viewport {
  width: number;
  height: number;
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

/** Map a series into pixel-space polyline points for the given viewport. */
export function toPolyline(series: SeriesPoint[], vp: Viewport): [number, number][] {
  const tSpan = vp.tMax - vp.tMin || 1;
  const vSpan = vp.vMax - vp.vMin || 1;
  return series.map((p) => [
    ((p.t - vp.tMin) / tSpan) * vp.width,
    vp.height - ((p.v - vp.vMin) / vSpan) * vp.height,
  ]);
}

/** Duplicate each interior point so the polyline renders as steps. */
export function toStepPolyline(series: SeriesPoint[], vp: Viewport): [number, number][] {
  const out: SeriesPoint[] = [];
  for (let i = 0; i < series.length; i++) {
    if (i > 0) out.push({ t: series[i].t, v: series[i - 1].v });
    out.push(series[i]);
  }
  return toPolyline(out, vp);
}

export function viewportFor(
  allSeries: SeriesPoint[][],
  width: number,
  height: number,
): Viewport {
  let tMin = Infinity;
  let tMax = -Infinity;
  let vMax = 1e-9;
  for (const series of allSeries) {
    for (const p of series) {
      if (p.t < tMin) tMin = p.t;
      if (p.t > tMax) tMax = p.t;
      if (p.v > vMax) vMax = p.v;
    }
  }
  if (!isFinite(tMin)) {
    tMin = 0;
    tMax = 1;
  }
  return { width, height, tMin, tMax, vMin: 0, vMax: vMax * 1.05 };
}

const PALETTE = ["#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756", "#72b7b2"];

export function studentColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

/** Canvas renderer for the live dashboard chart. */
export class LineChart {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  draw(
    studentSeries: Map<string, SeriesPoint[]>,
    classMean: SeriesPoint[],
    uTrace: SeriesPoint[],
  ): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, width, height);
    const all = [...studentSeries.values(), classMean, uTrace];
    const vp = viewportFor(all, width, height);

    ctx.strokeStyle = "#999";
    ctx.setLineDash([4, 3]);
    this.stroke(toStepPolyline(uTrace, vp));
    ctx.setLineDash([]);

    let i = 0;
    for (const series of studentSeries.values()) {
      ctx.strokeStyle = studentColor(i++);
      ctx.lineWidth = 1;
      this.stroke(toPolyline(series, vp));
    }
    ctx.strokeStyle = "#111";
    ctx.lineWidth = 2;
    this.stroke(toPolyline(classMean, vp));

    ctx.fillStyle = "#555";
    ctx.font = "11px sans-serif";
    ctx.fillText(`t: ${vp.tMin.toFixed(1)} .. ${vp.tMax.toFixed(1)}`, 6, height - 6);
    ctx.fillText(`max: ${vp.vMax.toFixed(2)}`, 6, 12);
  }

  private stroke(points: [number, number][]): void {
    if (points.length < 2) return;
    const ctx = this.ctx;
    ctx.beginPath();
    ctx.moveTo(points[0][0], points[0][1]);
    for (let i = 1; i < points.length; i++) ctx.lineTo(points[i][0], points[i][1]);
    ctx.stroke();
  }
}
