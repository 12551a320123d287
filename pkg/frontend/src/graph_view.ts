// Force-directed rendering of the transition graph. The graph has at most
// 163 nodes, so a naive O(n^2) spring-electric layout per frame is plenty.

import type { GraphExport } from "./protocol.js";

export interface NodePosition {
  x: number;
  y: number;
}

export type Layout = Map<number, NodePosition>;

const REPULSION = 1800;
const SPRING = 0.02;
const SPRING_LENGTH = 46;
const DAMPING = 0.85;

export function seedLayout(graph: GraphExport, width: number, height: number, prior?: Layout): Layout {
  const layout: Layout = new Map();
  const n = Math.max(1, graph.nodes.length);
  graph.nodes.forEach((node, i) => {
    const existing = prior?.get(node);
    if (existing) {
      layout.set(node, existing);
      return;
    }
    const angle = (2 * Math.PI * i) / n;
    layout.set(node, {
      x: width / 2 + 0.35 * width * Math.cos(angle),
      y: height / 2 + 0.35 * height * Math.sin(angle),
    });
  });
  return layout;
}

// One relaxation step; returns the total movement so callers can stop early.
export function layoutStep(graph: GraphExport, layout: Layout, width: number, height: number): number {
  const forces = new Map<number, { fx: number; fy: number }>();
  for (const node of graph.nodes) forces.set(node, { fx: 0, fy: 0 });

  const nodes = graph.nodes;
  for (let i = 0; i < nodes.length; i++) {
    for (let j = i + 1; j < nodes.length; j++) {
      const a = layout.get(nodes[i])!;
      const b = layout.get(nodes[j])!;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const distSq = Math.max(25, dx * dx + dy * dy);
      const force = REPULSION / distSq;
      const dist = Math.sqrt(distSq);
      const fx = (force * dx) / dist;
      const fy = (force * dy) / dist;
      forces.get(nodes[i])!.fx += fx;
      forces.get(nodes[i])!.fy += fy;
      forces.get(nodes[j])!.fx -= fx;
      forces.get(nodes[j])!.fy -= fy;
    }
  }
  for (const edge of graph.edges) {
    const a = layout.get(edge.from);
    const b = layout.get(edge.to);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const dist = Math.max(1, Math.hypot(dx, dy));
    const stretch = SPRING * (dist - SPRING_LENGTH);
    const fx = (stretch * dx) / dist;
    const fy = (stretch * dy) / dist;
    forces.get(edge.from)!.fx += fx;
    forces.get(edge.from)!.fy += fy;
    forces.get(edge.to)!.fx -= fx;
    forces.get(edge.to)!.fy -= fy;
  }

  let moved = 0;
  for (const node of nodes) {
    const p = layout.get(node)!;
    const f = forces.get(node)!;
    const dx = Math.max(-8, Math.min(8, f.fx * DAMPING));
    const dy = Math.max(-8, Math.min(8, f.fy * DAMPING));
    p.x = Math.max(10, Math.min(width - 10, p.x + dx));
    p.y = Math.max(10, Math.min(height - 10, p.y + dy));
    moved += Math.abs(dx) + Math.abs(dy);
  }
  return moved;
}

export function edgeWidth(count: number, maxCount: number): number {
  if (maxCount <= 0) return 0.5;
  return 0.5 + 4.5 * (count / maxCount);
}

export class GraphView {
  private layout: Layout = new Map();

  constructor(private readonly canvas: HTMLCanvasElement) {}

  draw(graph: GraphExport | null, activeNode: number | null): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    if (!graph || graph.nodes.length === 0) return;

    this.layout = seedLayout(graph, width, height, this.layout);
    for (let i = 0; i < 3; i++) layoutStep(graph, this.layout, width, height);

    const maxCount = Math.max(1, ...graph.edges.map((e) => e.count));
    ctx.strokeStyle = "rgba(70, 90, 120, 0.5)";
    for (const edge of graph.edges) {
      const a = this.layout.get(edge.from);
      const b = this.layout.get(edge.to);
      if (!a || !b) continue;
      ctx.lineWidth = edgeWidth(edge.count, maxCount);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    for (const node of graph.nodes) {
      const p = this.layout.get(node)!;
      const isFailure = node === -1;
      const isActive = node === activeNode;
      ctx.fillStyle = isFailure ? "#c0392b" : isActive ? "#f1c40f" : "#34495e";
      ctx.beginPath();
      ctx.arc(p.x, p.y, isFailure ? 7 : 5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
