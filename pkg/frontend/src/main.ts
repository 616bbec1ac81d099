// Browser entry point: fetch the document once, then rerender the pure
// views whenever the view state changes.  All state lives in `view`;
// the document itself is never written to after parsing.

import { parseDocument, DiagramDoc, DocumentError } from "./document.js";
import { immediateCauses, immediateEffects, NavStep } from "./causes.js";
import {
  ViewState, initialView, focusEvent, takeStep, undoStep,
  selectViolation, pushZoom, popZoom,
} from "./viewstate.js";
import {
  renderTiles, renderViolationsPanel, renderSteps, renderSource,
  renderErrorBanner, gridRect,
} from "./render.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

function currentSteps(doc: DiagramDoc, view: ViewState): NavStep[] {
  if (view.focus === null) return [];
  return [
    ...immediateCauses(doc, view.focus),
    ...immediateEffects(doc, view.focus),
  ];
}

function draw(doc: DiagramDoc, view: ViewState, steps: NavStep[]): void {
  el("tiles").innerHTML = renderTiles(doc, view);
  el("violations").innerHTML = renderViolationsPanel(doc, view.violation);
  el("steps").innerHTML = renderSteps(doc, steps);
  const spans = view.violation === null
    ? []
    : doc.violations[view.violation]?.spans ?? [];
  el("source").innerHTML = renderSource(doc.source, spans);
  el("trail").textContent = view.trail.length === 0
    ? "no steps taken"
    : view.trail.map((s) => s.label).join("  →  ").replace(/→/g, "then");
}

function wire(doc: DiagramDoc): void {
  let view: ViewState = initialView;
  let steps: NavStep[] = [];

  const refresh = (): void => {
    steps = currentSteps(doc, view);
    draw(doc, view, steps);
  };

  el("tiles").addEventListener("click", (e) => {
    const target = (e.target as Element).closest("[data-eid]");
    if (target === null) return;
    view = focusEvent(view, Number(target.getAttribute("data-eid")));
    refresh();
  });

  el("steps").addEventListener("click", (e) => {
    const target = (e.target as Element).closest("[data-step]");
    if (target === null) return;
    const step = steps[Number(target.getAttribute("data-step"))];
    if (step === undefined) return;
    view = takeStep(view, step);
    refresh();
  });

  el("violations").addEventListener("click", (e) => {
    const target = (e.target as Element).closest("[data-violation]");
    if (target === null) return;
    const index = Number(target.getAttribute("data-violation"));
    view = selectViolation(view, view.violation === index ? null : index);
    refresh();
  });

  el("undo").addEventListener("click", () => {
    view = undoStep(view);
    refresh();
  });

  el("zoom-in").addEventListener("click", () => {
    const read = (id: string): number => Number((el(id) as HTMLInputElement).value);
    view = pushZoom(view, {
      rowLo: read("zoom-row-lo"),
      rowHi: read("zoom-row-hi"),
      colLo: read("zoom-col-lo"),
      colHi: read("zoom-col-hi"),
    }, gridRect(doc));
    refresh();
  });

  el("zoom-out").addEventListener("click", () => {
    view = popZoom(view);
    refresh();
  });

  refresh();
}

async function boot(): Promise<void> {
  try {
    const response = await fetch("/api/diagram");
    if (!response.ok) throw new DocumentError(`server said ${response.status}`);
    const doc = parseDocument(await response.json());
    wire(doc);
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    el("tiles").innerHTML = renderErrorBanner(message);
    el("violations").innerHTML = "";
    el("steps").innerHTML = "";
    el("source").innerHTML = "";
  }
}

void boot();
