// Pure rendering: document plus view state in, markup strings out.
//
// Nothing in here touches the DOM or the document.  Arrows are drawn
// as plain lines without heads; their direction lives in the hover
// title, which keeps dense nets readable.  Each zoom rectangle becomes
// its own tile, so two disjoint zooms sit side by side.

import { DiagramDoc, Violation, rowCount } from "./document.js";
import { NavStep } from "./causes.js";
import { Rect, ViewState, tiles } from "./viewstate.js";

export const COL_W = 110;
export const ROW_H = 44;
export const PAD_L = 70;
export const PAD_T = 40;
export const PAD_R = 70;
export const PAD_B = 30;

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Full grid of a document: rows start at 1, columns at 0. */
export function gridRect(doc: DiagramDoc): Rect {
  return {
    rowLo: 1,
    rowHi: Math.max(1, rowCount(doc)),
    colLo: 0,
    colHi: Math.max(0, doc.lifelines.length - 1),
  };
}

interface TileScale {
  readonly rect: Rect;
  readonly x: (col: number) => number;
  readonly y: (row: number) => number;
  readonly width: number;
  readonly height: number;
}

function scaleFor(rect: Rect): TileScale {
  return {
    rect,
    x: (col) => PAD_L + (col - rect.colLo) * COL_W,
    y: (row) => PAD_T + (row - rect.rowLo) * ROW_H,
    width: PAD_L + (rect.colHi - rect.colLo) * COL_W + PAD_R,
    height: PAD_T + (rect.rowHi - rect.rowLo) * ROW_H + PAD_B,
  };
}

function lifelineLines(doc: DiagramDoc, s: TileScale): string[] {
  const out: string[] = [];
  for (const l of doc.lifelines) {
    if (l.column < s.rect.colLo || l.column > s.rect.colHi) continue;
    const lo = Math.max(l.alloc_row ?? s.rect.rowLo, s.rect.rowLo);
    const hi = Math.min(l.dispose_row ?? s.rect.rowHi, s.rect.rowHi);
    if (lo > hi) continue;
    const x = s.x(l.column);
    out.push(
      `<line class="lifeline lifeline-${l.kind}" data-lifeline="${l.id}" ` +
        `x1="${x}" y1="${s.y(lo) - ROW_H / 2}" x2="${x}" y2="${s.y(hi) + ROW_H / 2}"/>`,
      `<text class="lifeline-name" x="${x}" y="${PAD_T - 16}">${escapeHtml(l.name)}</text>`,
    );
  }
  return out;
}

function transactionLines(doc: DiagramDoc, s: TileScale): string[] {
  const out: string[] = [];
  for (const t of doc.transactions) {
    if (t.row < s.rect.rowLo || t.row > s.rect.rowHi) continue;
    const cols = t.participants.map((p) => doc.lifelines[doc.events[p]!.lifeline]!.column);
    if (cols.length === 0) continue;
    const lo = Math.max(Math.min(...cols), s.rect.colLo);
    const hi = Math.min(Math.max(...cols), s.rect.colHi);
    if (lo > hi) continue;
    const y = s.y(t.row);
    // single-participant commands still get a visible tick
    const x1 = lo === hi ? s.x(lo) - 9 : s.x(lo);
    const x2 = lo === hi ? s.x(hi) + 9 : s.x(hi);
    out.push(
      `<line class="transaction" data-tx="${t.id}" x1="${x1}" y1="${y}" x2="${x2}" y2="${y}"/>`,
      `<text class="tx-label" x="${x2 + 10}" y="${y + 4}">${escapeHtml(t.label)}</text>`,
    );
    for (const p of t.participants) {
      const col = doc.lifelines[doc.events[p]!.lifeline]!.column;
      if (col < s.rect.colLo || col > s.rect.colHi) continue;
      out.push(
        `<circle class="event" data-eid="${p}" cx="${s.x(col)}" cy="${y}" r="4"/>`,
      );
    }
  }
  return out;
}

function endDescription(doc: DiagramDoc, eid: number | null): string {
  if (eid === null) return "the environment";
  return doc.transactions[doc.events[eid]!.transaction]!.label;
}

function arrowTitle(doc: DiagramDoc, aid: number): string {
  const a = doc.arrows[aid]!;
  const flow = a.value === null ? "control" : a.value;
  return `${flow} from ${endDescription(doc, a.tail)} to ${endDescription(doc, a.head)}`;
}

function arrowLines(doc: DiagramDoc, s: TileScale): string[] {
  const out: string[] = [];
  const pos = (eid: number): [number, number] => {
    const ev = doc.events[eid]!;
    return [doc.lifelines[ev.lifeline]!.column, doc.transactions[ev.transaction]!.row];
  };
  for (const a of doc.arrows) {
    let x1: number, y1: number, x2: number, y2: number;
    if (a.orientation === "vertical") {
      // rides one lifeline; open ends run to the tile borders
      const col = a.lifeline ?? (a.tail !== null ? pos(a.tail)[0] : null);
      if (col === null) continue;
      if (col < s.rect.colLo || col > s.rect.colHi) continue;
      const rowLo = a.tail === null ? null : pos(a.tail)[1];
      const rowHi = a.head === null ? null : pos(a.head)[1];
      if (rowLo !== null && rowLo > s.rect.rowHi) continue;
      if (rowHi !== null && rowHi < s.rect.rowLo) continue;
      x1 = x2 = s.x(col);
      y1 = rowLo === null ? s.y(s.rect.rowLo) - ROW_H / 2 - 8 : s.y(rowLo);
      y2 = rowHi === null ? s.y(s.rect.rowHi) + ROW_H / 2 + 8 : s.y(rowHi);
    } else {
      const row = a.tail !== null ? pos(a.tail)[1]
        : a.head !== null ? pos(a.head)[1] : null;
      if (row === null) continue;
      if (row < s.rect.rowLo || row > s.rect.rowHi) continue;
      const colLo = a.tail === null ? null : pos(a.tail)[0];
      const colHi = a.head === null ? null : pos(a.head)[0];
      if (colLo !== null && colHi !== null) {
        if (Math.max(colLo, colHi) < s.rect.colLo) continue;
        if (Math.min(colLo, colHi) > s.rect.colHi) continue;
      }
      y1 = y2 = s.y(row);
      x1 = colLo === null ? s.x(s.rect.colLo) - PAD_L / 2 : s.x(colLo);
      x2 = colHi === null ? s.x(s.rect.colHi) + PAD_R / 2 : s.x(colHi);
    }
    out.push(
      `<g class="arrow" data-arrow="${a.id}">` +
        `<title>${escapeHtml(arrowTitle(doc, a.id))}</title>` +
        `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}"/>` +
        (a.value === null
          ? ""
          : `<text class="arrow-value" x="${(x1 + x2) / 2 + 5}" y="${(y1 + y2) / 2 - 5}">` +
            `${escapeHtml(a.value)}</text>`) +
        `</g>`,
    );
  }
  return out;
}

// A deadlock witness names lifelines in cycle order, first one repeated
// at the end; drawn as a closed chain across their columns.
function witnessChain(doc: DiagramDoc, v: Violation, s: TileScale): string[] {
  if (v.witness === null || v.witness.length === 0) return [];
  const byName = new Map(doc.lifelines.map((l) => [l.name, l]));
  const points: string[] = [];
  for (const name of v.witness) {
    const l = byName.get(name);
    if (l === undefined) return [];
    const row = Math.min(Math.max(v.row, s.rect.rowLo), s.rect.rowHi);
    points.push(`${s.x(l.column)},${s.y(row)}`);
  }
  return [`<polyline class="witness" points="${points.join(" ")}"/>`];
}

export interface RenderOptions {
  readonly focus?: number | null;
  readonly violation?: number | null;
}

export function renderTile(doc: DiagramDoc, rect: Rect, opts: RenderOptions = {}): string {
  const s = scaleFor(rect);
  const parts: string[] = [
    `<svg class="tile" viewBox="0 0 ${s.width} ${s.height}" ` +
      `width="${s.width}" height="${s.height}" xmlns="http://www.w3.org/2000/svg">`,
  ];
  parts.push(...lifelineLines(doc, s));
  parts.push(...arrowLines(doc, s));
  parts.push(...transactionLines(doc, s));
  const focus = opts.focus ?? null;
  if (focus !== null && focus >= 0 && focus < doc.events.length) {
    const ev = doc.events[focus]!;
    const col = doc.lifelines[ev.lifeline]!.column;
    const row = doc.transactions[ev.transaction]!.row;
    if (
      col >= rect.colLo && col <= rect.colHi &&
      row >= rect.rowLo && row <= rect.rowHi
    ) {
      parts.push(
        `<circle class="focus-ring" cx="${s.x(col)}" cy="${s.y(row)}" r="9"/>`,
      );
    }
  }
  const vi = opts.violation ?? null;
  const selected = vi !== null ? doc.violations[vi] : undefined;
  if (selected !== undefined) parts.push(...witnessChain(doc, selected, s));
  parts.push("</svg>");
  return parts.join("\n");
}

/** One tile per zoom rectangle; the whole net when none are pushed. */
export function renderTiles(doc: DiagramDoc, view: ViewState): string {
  const rects = tiles(view, gridRect(doc));
  const opts: RenderOptions = { focus: view.focus, violation: view.violation };
  return rects.map((r) => renderTile(doc, r, opts)).join("\n");
}

export function renderViolationsPanel(doc: DiagramDoc, selected: number | null): string {
  if (doc.violations.length === 0) {
    return `<p class="all-clear">no violations</p>`;
  }
  const items = doc.violations.map((v, i) => {
    const cls = i === selected ? ` class="selected"` : "";
    return (
      `<li${cls} data-violation="${i}">` +
      `<span class="code">${escapeHtml(v.code)}</span> ` +
      `<span class="grade">[${escapeHtml(v.classification.toLowerCase())}]</span> ` +
      `row ${v.row}: ${escapeHtml(v.detail)}</li>`
    );
  });
  return `<ol class="violations">${items.join("")}</ol>`;
}

/** Clickable list of navigation steps out of the focused event. */
export function renderSteps(doc: DiagramDoc, steps: readonly NavStep[]): string {
  if (steps.length === 0) return `<p class="no-steps">nothing this way</p>`;
  const items = steps.map((s, i) => {
    const kind = s.via === null ? "same command" : "arrow";
    return (
      `<li data-step="${i}" data-to="${s.to}">` +
      `<span class="step-label">${escapeHtml(s.label)}</span> ` +
      `<span class="step-kind">${kind}</span></li>`
    );
  });
  return `<ol class="steps">${items.join("")}</ol>`;
}

// Overlapping highlight spans are merged so the marked regions nest
// cleanly inside the escaped source text.
function mergeSpans(spans: readonly (readonly [number, number])[]): [number, number][] {
  const sorted = [...spans].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const out: [number, number][] = [];
  for (const [lo, hi] of sorted) {
    const last = out[out.length - 1];
    if (last !== undefined && lo <= last[1]) {
      last[1] = Math.max(last[1], hi);
    } else {
      out.push([lo, hi]);
    }
  }
  return out;
}

export function renderSource(
  source: string,
  spans: readonly (readonly [number, number])[] = [],
): string {
  const merged = mergeSpans(spans.filter(([lo, hi]) => lo < hi));
  const parts: string[] = [`<pre class="source">`];
  let at = 0;
  for (const [lo, hi] of merged) {
    if (lo > at) parts.push(escapeHtml(source.slice(at, lo)));
    parts.push(`<mark>${escapeHtml(source.slice(Math.max(lo, at), hi))}</mark>`);
    at = Math.max(at, hi);
  }
  if (at < source.length) parts.push(escapeHtml(source.slice(at)));
  parts.push(`</pre>`);
  return parts.join("");
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner">cannot display this document: ${escapeHtml(message)}</div>`;
}
