// Viewer state, kept apart from the document it looks at.
//
// Every operation returns a fresh state and leaves its argument alone,
// which is what makes undo trivial: the navigation trail replays from
// its first step to the focused event, and popping one step restores
// the state that pushed it, field for field.

import { NavStep } from "./causes.js";

export interface Rect {
  readonly rowLo: number;
  readonly rowHi: number;
  readonly colLo: number;
  readonly colHi: number;
}

export interface ViewState {
  /** Zoom stack; each entry is one visible tile, empty means the full net. */
  readonly zooms: readonly Rect[];
  readonly focus: number | null;
  readonly trail: readonly NavStep[];
  readonly violation: number | null;
}

export const initialView: ViewState = {
  zooms: [],
  focus: null,
  trail: [],
  violation: null,
};

/** Focus an event directly, starting a new trail there. */
export function focusEvent(view: ViewState, eid: number | null): ViewState {
  return { ...view, focus: eid, trail: [] };
}

/**
 * Follow one navigation step from the current focus.  The step must
 * leave from the focused event, otherwise the trail would no longer
 * replay to the focus.
 */
export function takeStep(view: ViewState, step: NavStep): ViewState {
  if (view.focus !== step.from) {
    throw new Error(`step leaves event ${step.from}, but focus is ${view.focus}`);
  }
  return { ...view, focus: step.to, trail: [...view.trail, step] };
}

/** Undo the most recent step; with an empty trail there is nothing to undo. */
export function undoStep(view: ViewState): ViewState {
  const last = view.trail[view.trail.length - 1];
  if (last === undefined) return view;
  return { ...view, focus: last.from, trail: view.trail.slice(0, -1) };
}

export function selectViolation(view: ViewState, index: number | null): ViewState {
  return { ...view, violation: index };
}

function normalize(rect: Rect): Rect {
  return {
    rowLo: Math.min(rect.rowLo, rect.rowHi),
    rowHi: Math.max(rect.rowLo, rect.rowHi),
    colLo: Math.min(rect.colLo, rect.colHi),
    colHi: Math.max(rect.colLo, rect.colHi),
  };
}

function intersect(a: Rect, b: Rect): Rect | null {
  const r: Rect = {
    rowLo: Math.max(a.rowLo, b.rowLo),
    rowHi: Math.min(a.rowHi, b.rowHi),
    colLo: Math.max(a.colLo, b.colLo),
    colHi: Math.min(a.colHi, b.colHi),
  };
  return r.rowLo > r.rowHi || r.colLo > r.colHi ? null : r;
}

/**
 * Push a zoom rectangle.  The rectangle is clipped to the grid; one
 * that misses the grid entirely is ignored rather than pushed, so the
 * zoom stack never holds an empty tile.
 */
export function pushZoom(view: ViewState, rect: Rect, grid: Rect): ViewState {
  const clipped = intersect(normalize(rect), grid);
  if (clipped === null) return view;
  return { ...view, zooms: [...view.zooms, clipped] };
}

export function popZoom(view: ViewState): ViewState {
  if (view.zooms.length === 0) return view;
  return { ...view, zooms: view.zooms.slice(0, -1) };
}

/** Visible tiles in stack order; no zooms means one full-grid tile. */
export function tiles(view: ViewState, grid: Rect): readonly Rect[] {
  return view.zooms.length === 0 ? [grid] : view.zooms;
}

/**
 * True when the trail is a connected walk ending at the focus.  Holds
 * for every state reachable through the exported operations.
 */
export function trailIsSound(view: ViewState): boolean {
  if (view.trail.length === 0) return true;
  for (let i = 1; i < view.trail.length; i++) {
    if (view.trail[i]!.from !== view.trail[i - 1]!.to) return false;
  }
  return view.trail[view.trail.length - 1]!.to === view.focus;
}
