import { describe, expect, it } from "vitest";
import {
  COL_W, PAD_L, PAD_T, gridRect, renderErrorBanner, renderSource,
  renderSteps, renderTile, renderTiles, renderViolationsPanel,
} from "../src/render.js";
import { immediateCauses } from "../src/causes.js";
import { initialView, pushZoom } from "../src/viewstate.js";
import { goldenDoc, deepFreeze } from "./helpers.js";

const worked = goldenDoc("worked_example.diagram.json");
const deadlock = goldenDoc("deadlock.diagram.json");

function count(haystack: string, needle: RegExp): number {
  return (haystack.match(needle) ?? []).length;
}

describe("worked example, full view", () => {
  const svg = renderTile(worked, gridRect(worked));

  it("draws one labeled vertical line per lifeline", () => {
    expect(count(svg, /class="lifeline /g)).toBe(6);
    for (const l of worked.lifelines) {
      expect(svg).toContain(`>${l.name}</text>`);
    }
  });

  it("draws one labeled horizontal line per command", () => {
    expect(count(svg, /class="transaction"/g)).toBe(worked.transactions.length);
    expect(svg).toContain(">new x</text>");
    expect(svg).toContain(">rel.1(x) / acq.2(x)</text>");
  });

  it("spans the handover line from the releasing to the acquiring thread", () => {
    const line = svg.match(/<line class="transaction" data-tx="3" ([^/]*)\/>/)?.[1];
    expect(line).toContain(`x1="${PAD_L + 1 * COL_W}"`);
    expect(line).toContain(`x2="${PAD_L + 3 * COL_W}"`);
  });

  it("labels the arrows into y with the old and new value", () => {
    expect(svg).toContain(">3</text>");
    expect(svg).toContain(">4</text>");
  });

  it("draws plain lines and tells direction on hover instead", () => {
    expect(svg).not.toContain("marker");
    expect(svg).not.toContain("arrowhead");
    expect(svg).toContain("<title>3 from the environment to y := y + 1</title>");
    expect(svg).toContain("<title>4 from y := y + 1 to d!(x + y)</title>");
  });

  it("marks the focused event when it is inside the tile", () => {
    expect(renderTile(worked, gridRect(worked), { focus: 5 })).toContain("focus-ring");
    expect(renderTile(worked, { rowLo: 5, rowHi: 6, colLo: 0, colHi: 5 }, { focus: 5 }))
      .not.toContain("focus-ring");
  });

  it("reports a clean run as such", () => {
    expect(renderViolationsPanel(worked, null)).toBe(`<p class="all-clear">no violations</p>`);
  });

  it("never writes to the document", () => {
    const frozen = deepFreeze(goldenDoc("worked_example.diagram.json"));
    renderTile(frozen, gridRect(frozen), { focus: 3, violation: null });
    renderViolationsPanel(frozen, null);
    expect(frozen).toEqual(worked);
  });
});

describe("zoom tiles", () => {
  it("shows only the rows a tile intersects", () => {
    const svg = renderTile(worked, { rowLo: 4, rowHi: 4, colLo: 0, colHi: 5 });
    expect(svg).toContain('data-tx="3"');
    expect(svg).not.toContain('data-tx="0"');
    expect(svg).not.toContain('data-tx="5"');
  });

  it("shows only the columns a tile intersects", () => {
    const svg = renderTile(worked, { rowLo: 1, rowHi: 6, colLo: 4, colHi: 5 });
    expect(count(svg, /class="lifeline /g)).toBe(2);
  });

  it("renders one tile per coexisting zoom", () => {
    const grid = gridRect(worked);
    let view = pushZoom(initialView, { rowLo: 1, rowHi: 2, colLo: 0, colHi: 2 }, grid);
    view = pushZoom(view, { rowLo: 5, rowHi: 6, colLo: 3, colHi: 5 }, grid);
    expect(count(renderTiles(worked, view), /<svg /g)).toBe(2);
    expect(count(renderTiles(worked, initialView), /<svg /g)).toBe(1);
  });
});

describe("stuck run", () => {
  it("lists the violation with its grade and row", () => {
    const panel = renderViolationsPanel(deadlock, 0);
    expect(panel).toContain("DEADLOCK_CYCLE");
    expect(panel).toContain("[developer]");
    expect(panel).toContain("row 1:");
    expect(panel).toContain('class="selected"');
  });

  it("draws the witness as a closed chain across the cycle", () => {
    const svg = renderTile(deadlock, gridRect(deadlock), { violation: 0 });
    // witness t, b, u, a, t sits on columns 0, 3, 2, 1, 0
    const xs = [0, 3, 2, 1, 0].map((c) => PAD_L + c * COL_W);
    const points = xs.map((x) => `${x},${PAD_T}`).join(" ");
    expect(svg).toContain(`<polyline class="witness" points="${points}"/>`);
  });

  it("draws no chain while no violation is selected", () => {
    expect(renderTile(deadlock, gridRect(deadlock))).not.toContain("witness");
  });

  it("still draws the held objects' standing arrows", () => {
    const svg = renderTile(deadlock, gridRect(deadlock));
    expect(count(svg, /class="arrow"/g)).toBe(2);
    expect(count(svg, /class="lifeline /g)).toBe(4);
  });
});

describe("side panes", () => {
  it("renders the cause list in query order", () => {
    const steps = immediateCauses(worked, 5);
    const html = renderSteps(worked, steps);
    expect(count(html, /<li /g)).toBe(steps.length);
    const first = html.indexOf(steps[0]!.label);
    const last = html.indexOf(steps[steps.length - 1]!.label.replace("8 ", ""));
    expect(first).toBeGreaterThan(-1);
    expect(first).toBeLessThan(last);
  });

  it("escapes and highlights source spans", () => {
    expect(renderSource("a < b", [[0, 1]])).toBe(
      `<pre class="source"><mark>a</mark> &lt; b</pre>`,
    );
  });

  it("merges overlapping highlight spans", () => {
    expect(renderSource("abcdef", [[0, 3], [2, 5]])).toBe(
      `<pre class="source"><mark>abcde</mark>f</pre>`,
    );
  });

  it("shows the whole program when nothing is selected", () => {
    const html = renderSource(deadlock.source);
    expect(html).toContain("acquire b");
    expect(html).not.toContain("<mark>");
  });

  it("keeps the error banner free of markup injection", () => {
    expect(renderErrorBanner("<script>")).toBe(
      `<div class="error-banner">cannot display this document: &lt;script&gt;</div>`,
    );
  });
});
