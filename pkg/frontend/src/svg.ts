/**
 * Minimal deterministic SVG scene builder: fixed styles, no timestamps or
 * generated ids, numbers formatted through one helper so identical inputs
 * render identical bytes.
 */

import { fmt } from "./stats.js";

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 78, right: 24, top: 34, bottom: 64 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export type Scale = (value: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

export class Scene {
  private parts: string[] = [];

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, dash?: string): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="1"${dashAttr}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${stroke}" stroke-width="${fmt(width)}"/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    opts: { anchor?: string; size?: number; fill?: string; rotate?: boolean } = {},
  ): void {
    const anchor = opts.anchor ?? "start";
    const size = opts.size ?? 12;
    const fill = opts.fill ?? "#222222";
    const transform = opts.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,Arial,sans-serif" ` +
        `font-size="${fmt(size)}" text-anchor="${anchor}" fill="${fill}"${transform}>` +
        `${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Frame {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export function plotFrame(): Frame {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

export function drawAxes(
  scene: Scene,
  frame: Frame,
  xTicks: Array<[number, string]>,
  yTicks: Array<[number, string]>,
  xLabel: string,
  yLabel: string,
  xScale: Scale,
  yScale: Scale,
): void {
  scene.line(frame.x0, frame.y0, frame.x1, frame.y0, "#222222");
  scene.line(frame.x0, frame.y0, frame.x0, frame.y1, "#222222");
  for (const [value, label] of xTicks) {
    const x = xScale(value);
    scene.line(x, frame.y0, x, frame.y0 + 5, "#222222");
    scene.line(x, frame.y0, x, frame.y1, "#eeeeee");
    scene.text(x, frame.y0 + 18, label, { anchor: "middle", size: 11 });
  }
  for (const [value, label] of yTicks) {
    const y = yScale(value);
    scene.line(frame.x0 - 5, y, frame.x0, y, "#222222");
    scene.line(frame.x0, y, frame.x1, y, "#eeeeee");
    scene.text(frame.x0 - 8, y + 4, label, { anchor: "end", size: 11 });
  }
  scene.text((frame.x0 + frame.x1) / 2, HEIGHT - 26, xLabel, { anchor: "middle" });
  scene.text(22, (frame.y0 + frame.y1) / 2, yLabel, { anchor: "middle", rotate: true });
}

export function caption(scene: Scene, source: string, schema: string): void {
  scene.text(MARGIN.left, HEIGHT - 8, `source: ${source} (${schema})`, {
    size: 10,
    fill: "#777777",
  });
}
