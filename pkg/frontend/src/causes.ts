// Causal navigation over a diagram document.
//
// These functions answer one question each about a focused event: which
// events feed it (one step back), which events it feeds (one step
// forward), and the full cone in either direction.  The server exposes
// the same queries, so the golden navigation dumps double as an oracle
// for this module.

import { DiagramDoc, eventPosition } from "./document.js";

export interface NavStep {
  readonly from: number;
  /** Arrow id carrying the step; null for a same-transaction hop. */
  readonly via: number | null;
  readonly to: number;
  readonly direction: "back" | "forward";
  readonly label: string;
}

function checkEvent(doc: DiagramDoc, eid: number): void {
  if (!Number.isInteger(eid) || eid < 0 || eid >= doc.events.length) {
    throw new RangeError(`no event ${eid} in this diagram`);
  }
}

// Label of a step is the destination's command, prefixed with the
// carried value when the step rides an arrow that has one.
function stepLabel(doc: DiagramDoc, to: number, value: string | null): string {
  const label = doc.transactions[doc.events[to]!.transaction]!.label;
  return value === null ? label : `${value} ${label}`;
}

function coSteps(
  doc: DiagramDoc,
  eid: number,
  direction: "back" | "forward",
): NavStep[] {
  const tx = doc.transactions[doc.events[eid]!.transaction]!;
  const steps: NavStep[] = [];
  for (const p of tx.participants) {
    if (p === eid) continue;
    steps.push({ from: eid, via: null, to: p, direction, label: tx.label });
  }
  return steps;
}

function finish(doc: DiagramDoc, steps: NavStep[]): NavStep[] {
  const seen = new Map<string, NavStep>();
  for (const s of steps) {
    const key = `${s.to}|${s.via}`;
    if (!seen.has(key)) seen.set(key, s);
  }
  return [...seen.values()].sort((a, b) => {
    const [ar, ac] = eventPosition(doc, a.to);
    const [br, bc] = eventPosition(doc, b.to);
    if (ar !== br) return ar - br;
    if (ac !== bc) return ac - bc;
    const coA = a.via === null ? 1 : 0;
    const coB = b.via === null ? 1 : 0;
    if (coA !== coB) return coA - coB;
    return (a.via ?? 0) - (b.via ?? 0);
  });
}

export function immediateCauses(doc: DiagramDoc, eid: number): NavStep[] {
  checkEvent(doc, eid);
  const steps: NavStep[] = [];
  for (const a of doc.arrows) {
    if (a.head !== eid || a.tail === null) continue;
    steps.push({
      from: eid,
      via: a.id,
      to: a.tail,
      direction: "back",
      label: stepLabel(doc, a.tail, a.value),
    });
  }
  steps.push(...coSteps(doc, eid, "back"));
  return finish(doc, steps);
}

export function immediateEffects(doc: DiagramDoc, eid: number): NavStep[] {
  checkEvent(doc, eid);
  const steps: NavStep[] = [];
  for (const a of doc.arrows) {
    if (a.tail !== eid || a.head === null) continue;
    steps.push({
      from: eid,
      via: a.id,
      to: a.head,
      direction: "forward",
      label: stepLabel(doc, a.head, a.value),
    });
  }
  steps.push(...coSteps(doc, eid, "forward"));
  return finish(doc, steps);
}

function cone(doc: DiagramDoc, eid: number, backwards: boolean): number[] {
  checkEvent(doc, eid);
  const seen = new Set<number>([eid]);
  const work = [eid];
  while (work.length > 0) {
    const e = work.pop()!;
    const tx = doc.transactions[doc.events[e]!.transaction]!;
    for (const p of tx.participants) {
      if (!seen.has(p)) {
        seen.add(p);
        work.push(p);
      }
    }
    for (const a of doc.arrows) {
      const near = backwards ? a.head : a.tail;
      const far = backwards ? a.tail : a.head;
      if (near === e && far !== null && !seen.has(far)) {
        seen.add(far);
        work.push(far);
      }
    }
  }
  return [...seen].sort((x, y) => x - y);
}

/** Every event the focused one depends on, itself included. */
export function causalPast(doc: DiagramDoc, eid: number): number[] {
  return cone(doc, eid, true);
}

/** Every event downstream of the focused one, itself included. */
export function causalFuture(doc: DiagramDoc, eid: number): number[] {
  return cone(doc, eid, false);
}
