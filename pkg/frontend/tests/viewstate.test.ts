import { describe, expect, it } from "vitest";
import { immediateCauses, immediateEffects, NavStep } from "../src/causes.js";
import {
  Rect, ViewState, initialView, focusEvent, takeStep, undoStep,
  selectViolation, pushZoom, popZoom, tiles, trailIsSound,
} from "../src/viewstate.js";
import { gridRect } from "../src/render.js";
import { goldenDoc, deepFreeze, mulberry32 } from "./helpers.js";

const doc = goldenDoc("worked_example.diagram.json");
const grid = gridRect(doc);

function stepsFrom(eid: number): NavStep[] {
  return [...immediateCauses(doc, eid), ...immediateEffects(doc, eid)];
}

describe("navigation trail", () => {
  it("replays to the focus and undoes exactly, on random walks", () => {
    const rng = mulberry32(0xa11ce);
    for (let walk = 0; walk < 50; walk++) {
      let view: ViewState = focusEvent(initialView, Math.floor(rng() * doc.events.length));
      const snapshots: ViewState[] = [view];
      for (let i = 0; i < 40; i++) {
        deepFreeze(view);
        expect(trailIsSound(view)).toBe(true);
        const options = stepsFrom(view.focus!);
        const roll = rng();
        if (roll < 0.55 && options.length > 0) {
          view = takeStep(view, options[Math.floor(rng() * options.length)]!);
          snapshots.push(view);
        } else if (roll < 0.8 && view.trail.length > 0) {
          view = undoStep(view);
          snapshots.pop();
          // exact undo: the state the last step was taken from
          expect(view).toEqual(snapshots[snapshots.length - 1]);
        } else {
          view = focusEvent(view, Math.floor(rng() * doc.events.length));
          snapshots.length = 0;
          snapshots.push(view);
        }
      }
      expect(trailIsSound(view)).toBe(true);
    }
  });

  it("undoing the whole trail returns to the journey origin", () => {
    const rng = mulberry32(7);
    let view = focusEvent(initialView, 5);
    const origin = view;
    for (let i = 0; i < 12; i++) {
      const options = stepsFrom(view.focus!);
      view = takeStep(view, options[Math.floor(rng() * options.length)]!);
    }
    for (let i = 0; i < 12; i++) view = undoStep(view);
    expect(view).toEqual(origin);
  });

  it("refuses a step that does not leave the focused event", () => {
    const view = focusEvent(initialView, 0);
    const stray = stepsFrom(5)[0]!;
    expect(() => takeStep(view, stray)).toThrow(/focus/);
  });

  it("focusing directly starts a fresh trail", () => {
    let view = focusEvent(initialView, 5);
    view = takeStep(view, stepsFrom(5)[0]!);
    view = focusEvent(view, 2);
    expect(view.trail).toEqual([]);
    expect(view.focus).toBe(2);
  });

  it("undo on an empty trail changes nothing", () => {
    const view = focusEvent(initialView, 3);
    expect(undoStep(view)).toEqual(view);
  });
});

describe("zoom stack", () => {
  const rect = (rowLo: number, rowHi: number, colLo: number, colHi: number): Rect =>
    ({ rowLo, rowHi, colLo, colHi });

  it("pushes and pops as inverses", () => {
    const before = initialView;
    const after = popZoom(pushZoom(before, rect(2, 4, 1, 3), grid));
    expect(after).toEqual(before);
  });

  it("ignores rectangles that miss the grid", () => {
    expect(pushZoom(initialView, rect(99, 120, 0, 2), grid)).toEqual(initialView);
    expect(pushZoom(initialView, rect(1, 2, 50, 60), grid)).toEqual(initialView);
  });

  it("normalizes flipped corners and clips to the grid", () => {
    const view = pushZoom(initialView, rect(5, 2, 99, 1), grid);
    expect(view.zooms).toEqual([rect(2, 5, 1, grid.colHi)]);
  });

  it("keeps coexisting zooms as separate tiles, in push order", () => {
    let view = pushZoom(initialView, rect(1, 2, 0, 1), grid);
    view = pushZoom(view, rect(5, 6, 3, 5), grid);
    expect(tiles(view, grid)).toEqual([rect(1, 2, 0, 1), rect(5, 6, 3, 5)]);
  });

  it("popping every zoom falls back to the full net", () => {
    let view = pushZoom(initialView, rect(1, 2, 0, 1), grid);
    view = pushZoom(view, rect(3, 4, 2, 3), grid);
    view = popZoom(popZoom(view));
    expect(tiles(view, grid)).toEqual([grid]);
    expect(popZoom(view)).toEqual(view);
  });

  it("a single row or column is a legitimate zoom", () => {
    const view = pushZoom(initialView, rect(4, 4, 2, 2), grid);
    expect(view.zooms).toEqual([rect(4, 4, 2, 2)]);
  });
});

describe("state independence", () => {
  it("operations never write through to earlier states", () => {
    const v0 = deepFreeze(focusEvent(initialView, 5));
    const v1 = deepFreeze(takeStep(v0, stepsFrom(5)[0]!));
    const v2 = deepFreeze(pushZoom(v1, { rowLo: 1, rowHi: 3, colLo: 0, colHi: 2 }, grid));
    const v3 = deepFreeze(selectViolation(v2, null));
    expect(v0.trail.length).toBe(0);
    expect(v1.trail.length).toBe(1);
    expect(v2.zooms.length).toBe(1);
    expect(v3.focus).toBe(v1.focus);
  });
});
