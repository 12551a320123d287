import { describe, expect, it } from "vitest";

import { FAILURE_ANGLE_RAD, poleSegment, trackToPixelX } from "../src/cartpole_view.js";
import { chartScales } from "../src/charts.js";
import { edgeWidth, layoutStep, seedLayout } from "../src/graph_view.js";
import type { GraphExport } from "../src/protocol.js";

const geometry = { trackLength: 4.4, poleLength: 1.0 };

describe("cart-pole geometry", () => {
  it("centres x=0 and keeps the track inside the canvas", () => {
    expect(trackToPixelX(0, 4.4, 600)).toBe(300);
    expect(trackToPixelX(-2.2, 4.4, 600)).toBeGreaterThanOrEqual(0);
    expect(trackToPixelX(2.2, 4.4, 600)).toBeLessThanOrEqual(600);
  });

  it("draws the pole vertical when upright", () => {
    const seg = poleSegment({ x: 0, x_dot: 0, theta: 0, theta_dot: 0 }, geometry, 600, 200);
    expect(seg.tipX).toBeCloseTo(seg.baseX, 10);
    expect(seg.tipY).toBeLessThan(seg.baseY);
  });

  it("leans the tip to the right for positive theta", () => {
    const seg = poleSegment({ x: 0, x_dot: 0, theta: 0.2, theta_dot: 0 }, geometry, 600, 200);
    expect(seg.tipX).toBeGreaterThan(seg.baseX);
  });

  it("pole length is to scale with the track", () => {
    const seg = poleSegment({ x: 0, x_dot: 0, theta: 0, theta_dot: 0 }, geometry, 600, 200);
    const trackPx = trackToPixelX(2.2, 4.4, 600) - trackToPixelX(-2.2, 4.4, 600);
    expect((seg.baseY - seg.tipY) / trackPx).toBeCloseTo(1.0 / 4.4, 10);
  });

  it("the failure cone sits at twelve degrees", () => {
    expect(FAILURE_ANGLE_RAD).toBeCloseTo((12 * Math.PI) / 180, 12);
  });
});

describe("chart scaling", () => {
  it("maps the data range onto the padded canvas", () => {
    const { toX, toY } = chartScales(
      [
        { x: 0, y: 0 },
        { x: 100, y: 50 },
      ],
      400,
      200,
    );
    expect(toX(0)).toBe(28);
    expect(toX(100)).toBe(372);
    expect(toY(0)).toBe(172);
    expect(toY(50)).toBe(28);
  });
});

describe("graph layout", () => {
  const graph: GraphExport = {
    nodes: [-1, 1, 2, 3],
    edges: [
      { from: 1, to: 2, count: 10 },
      { from: 2, to: 3, count: 1 },
      { from: 3, to: -1, count: 2 },
    ],
  };

  it("edge thickness scales with the count", () => {
    const thick = edgeWidth(10, 10);
    const thin = edgeWidth(1, 10);
    expect(thick).toBeGreaterThan(thin);
    // roughly proportional: 10x the count is much thicker
    expect(thick / thin).toBeGreaterThan(3);
  });

  it("relaxation reduces movement and keeps nodes in bounds", () => {
    const layout = seedLayout(graph, 400, 300);
    const early = layoutStep(graph, layout, 400, 300);
    let late = early;
    for (let i = 0; i < 200; i++) late = layoutStep(graph, layout, 400, 300);
    expect(late).toBeLessThanOrEqual(early);
    for (const node of graph.nodes) {
      const p = layout.get(node)!;
      expect(p.x).toBeGreaterThanOrEqual(10);
      expect(p.x).toBeLessThanOrEqual(390);
      expect(p.y).toBeGreaterThanOrEqual(10);
      expect(p.y).toBeLessThanOrEqual(290);
    }
  });

  it("keeps prior positions for known nodes when the graph grows", () => {
    const layout = seedLayout(graph, 400, 300);
    const before = { ...layout.get(2)! };
    const grown: GraphExport = { nodes: [...graph.nodes, 4], edges: graph.edges };
    const relaid = seedLayout(grown, 400, 300, layout);
    expect(relaid.get(2)).toEqual(before);
    expect(relaid.get(4)).toBeDefined();
  });
});
