// Reader for the diagram interchange document (format version 1).
//
// The viewer never mutates a document.  parseDocument either returns a
// fully-checked value or throws DocumentError; there is no partially
// valid result, so the UI can render an error banner and nothing else.

export type LifelineKind =
  | "thread" | "variable" | "channel-in-port" | "channel-out-port";
export type EventKind =
  | "read" | "write" | "alloc" | "dispose"
  | "send" | "recv" | "release" | "acquire";
export type SliceOp = "leaf" | "seq" | "chain" | "interleave" | "par";
export type Orientation = "horizontal" | "vertical" | "none";

export type Span = readonly [number, number];

export interface Lifeline {
  readonly id: number;
  readonly name: string;
  readonly kind: LifelineKind;
  readonly column: number;
  readonly alloc_row: number | null;
  readonly dispose_row: number | null;
  /** Lifeline id of the thread a local object belongs to. */
  readonly scope: number | null;
}

export interface DiagramEvent {
  readonly id: number;
  readonly lifeline: number;
  readonly transaction: number;
  readonly kind: EventKind;
}

export interface Transaction {
  readonly id: number;
  readonly row: number;
  readonly label: string;
  readonly issuer: number | "environment";
  readonly participants: readonly number[];
  readonly span: Span;
}

export interface Arrow {
  readonly id: number;
  readonly tail: number | null;
  readonly head: number | null;
  readonly orientation: "horizontal" | "vertical";
  readonly value: string | null;
  readonly lifeline: number | null;
}

export interface Slice {
  readonly id: number;
  readonly op: SliceOp;
  readonly span: Span;
  readonly parent: number | null;
  readonly children: readonly number[];
  readonly orientation: Orientation;
  readonly row_lo: number;
  readonly row_hi: number;
  readonly col_lo: number;
  readonly col_hi: number;
}

export interface Violation {
  readonly code: string;
  readonly classification: string;
  readonly loci: readonly (readonly [string, number])[];
  readonly spans: readonly Span[];
  readonly detail: string;
  readonly witness: readonly string[] | null;
  readonly row: number;
}

export interface GlobalBinding {
  readonly name: string;
  readonly value: string;
  readonly owner: string;
}

export interface RunConfig {
  readonly seed: string;
  readonly max_steps: number;
  readonly channel_inputs: Readonly<Record<string, readonly string[]>>;
  readonly message_offset: Readonly<Record<string, number>>;
}

export interface DiagramDoc {
  readonly version: 1;
  readonly source: string;
  readonly config: RunConfig;
  readonly globals: readonly GlobalBinding[];
  readonly lifelines: readonly Lifeline[];
  readonly events: readonly DiagramEvent[];
  readonly transactions: readonly Transaction[];
  readonly arrows: readonly Arrow[];
  readonly slices: readonly Slice[];
  readonly violations: readonly Violation[];
}

export class DocumentError extends Error {}

function fail(msg: string): never {
  throw new DocumentError(msg);
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function asArray(v: unknown, where: string): unknown[] {
  if (!Array.isArray(v)) fail(`not a diagram document: ${where} is not an array`);
  return v;
}

function asString(v: unknown, where: string): string {
  if (typeof v !== "string") fail(`not a diagram document: ${where} is not a string`);
  return v;
}

function asInt(v: unknown, where: string): number {
  if (typeof v !== "number" || !Number.isInteger(v)) {
    fail(`not a diagram document: ${where} is not an integer`);
  }
  return v;
}

function asSpan(v: unknown, where: string): Span {
  const arr = asArray(v, where);
  if (arr.length !== 2) fail(`not a diagram document: ${where} is not a span pair`);
  return [asInt(arr[0], where), asInt(arr[1], where)];
}

function optInt(v: unknown, where: string): number | null {
  return v === null || v === undefined ? null : asInt(v, where);
}

// Every table entry carries its own id; documents store them densely
// so entry k has id k and a transaction on row r has id r - 1.
function checkIds(rows: readonly { id: number }[], table: string): void {
  rows.forEach((row, i) => {
    if (row.id !== i) fail(`ids out of order: ${table}[${i}] has id ${row.id}`);
  });
}

function checkRef(
  value: number | null,
  limit: number,
  where: string,
): void {
  if (value === null) return;
  if (value < 0 || value >= limit) {
    fail(`dangling id: ${where} is ${value}, but only ${limit} exist`);
  }
}

export function parseDocument(raw: unknown): DiagramDoc {
  if (!isRecord(raw)) fail("not a diagram document: top level is not an object");
  const version = raw["version"];
  if (version !== 1) {
    fail(`unsupported version: ${JSON.stringify(version)} (this reader speaks 1)`);
  }
  for (const key of [
    "source", "config", "globals", "lifelines", "events",
    "transactions", "arrows", "slices", "violations",
  ]) {
    if (!(key in raw)) fail(`not a diagram document: missing ${key}`);
  }

  const source = asString(raw["source"], "source");

  const rawConfig = raw["config"];
  if (!isRecord(rawConfig)) fail("not a diagram document: config is not an object");
  const config: RunConfig = {
    seed: asString(rawConfig["seed"], "config.seed"),
    max_steps: asInt(rawConfig["max_steps"], "config.max_steps"),
    channel_inputs: Object.fromEntries(
      Object.entries(
        isRecord(rawConfig["channel_inputs"]) ? rawConfig["channel_inputs"] : {},
      ).map(([k, v]) => [
        k,
        asArray(v, `config.channel_inputs.${k}`).map((x, i) =>
          asString(x, `config.channel_inputs.${k}[${i}]`),
        ),
      ]),
    ),
    message_offset: Object.fromEntries(
      Object.entries(
        isRecord(rawConfig["message_offset"]) ? rawConfig["message_offset"] : {},
      ).map(([k, v]) => [k, asInt(v, `config.message_offset.${k}`)]),
    ),
  };

  const globals = asArray(raw["globals"], "globals").map((g, i): GlobalBinding => {
    if (!isRecord(g)) fail(`not a diagram document: globals[${i}]`);
    return {
      name: asString(g["name"], `globals[${i}].name`),
      value: asString(g["value"], `globals[${i}].value`),
      owner: asString(g["owner"], `globals[${i}].owner`),
    };
  });

  const lifelines = asArray(raw["lifelines"], "lifelines").map((l, i): Lifeline => {
    if (!isRecord(l)) fail(`not a diagram document: lifelines[${i}]`);
    const kind = asString(l["kind"], `lifelines[${i}].kind`);
    if (!["thread", "variable", "channel-in-port", "channel-out-port"].includes(kind)) {
      fail(`not a diagram document: lifelines[${i}].kind = ${JSON.stringify(kind)}`);
    }
    return {
      id: asInt(l["id"], `lifelines[${i}].id`),
      name: asString(l["name"], `lifelines[${i}].name`),
      kind: kind as LifelineKind,
      column: asInt(l["column"], `lifelines[${i}].column`),
      alloc_row: optInt(l["alloc_row"], `lifelines[${i}].alloc_row`),
      dispose_row: optInt(l["dispose_row"], `lifelines[${i}].dispose_row`),
      scope: optInt(l["scope"], `lifelines[${i}].scope`),
    };
  });

  const events = asArray(raw["events"], "events").map((e, i): DiagramEvent => {
    if (!isRecord(e)) fail(`not a diagram document: events[${i}]`);
    return {
      id: asInt(e["id"], `events[${i}].id`),
      lifeline: asInt(e["lifeline"], `events[${i}].lifeline`),
      transaction: asInt(e["transaction"], `events[${i}].transaction`),
      kind: asString(e["kind"], `events[${i}].kind`) as EventKind,
    };
  });

  const transactions = asArray(raw["transactions"], "transactions").map(
    (t, i): Transaction => {
      if (!isRecord(t)) fail(`not a diagram document: transactions[${i}]`);
      const issuer = t["issuer"];
      return {
        id: asInt(t["id"], `transactions[${i}].id`),
        row: asInt(t["row"], `transactions[${i}].row`),
        label: asString(t["label"], `transactions[${i}].label`),
        issuer: issuer === "environment" ? "environment"
          : asInt(issuer, `transactions[${i}].issuer`),
        participants: asArray(t["participants"], `transactions[${i}].participants`)
          .map((p, j) => asInt(p, `transactions[${i}].participants[${j}]`)),
        span: asSpan(t["span"], `transactions[${i}].span`),
      };
    },
  );

  const arrows = asArray(raw["arrows"], "arrows").map((a, i): Arrow => {
    if (!isRecord(a)) fail(`not a diagram document: arrows[${i}]`);
    const orientation = asString(a["orientation"], `arrows[${i}].orientation`);
    if (orientation !== "horizontal" && orientation !== "vertical") {
      fail(`not a diagram document: arrows[${i}].orientation`);
    }
    return {
      id: asInt(a["id"], `arrows[${i}].id`),
      tail: optInt(a["tail"], `arrows[${i}].tail`),
      head: optInt(a["head"], `arrows[${i}].head`),
      orientation,
      value: a["value"] == null ? null : asString(a["value"], `arrows[${i}].value`),
      lifeline: optInt(a["lifeline"], `arrows[${i}].lifeline`),
    };
  });

  const slices = asArray(raw["slices"], "slices").map((s, i): Slice => {
    if (!isRecord(s)) fail(`not a diagram document: slices[${i}]`);
    return {
      id: asInt(s["id"], `slices[${i}].id`),
      op: asString(s["op"], `slices[${i}].op`) as SliceOp,
      span: asSpan(s["span"], `slices[${i}].span`),
      parent: optInt(s["parent"], `slices[${i}].parent`),
      children: asArray(s["children"], `slices[${i}].children`)
        .map((c, j) => asInt(c, `slices[${i}].children[${j}]`)),
      orientation: asString(s["orientation"], `slices[${i}].orientation`) as Orientation,
      row_lo: asInt(s["row_lo"], `slices[${i}].row_lo`),
      row_hi: asInt(s["row_hi"], `slices[${i}].row_hi`),
      col_lo: asInt(s["col_lo"], `slices[${i}].col_lo`),
      col_hi: asInt(s["col_hi"], `slices[${i}].col_hi`),
    };
  });

  const violations = asArray(raw["violations"], "violations").map(
    (v, i): Violation => {
      if (!isRecord(v)) fail(`not a diagram document: violations[${i}]`);
      return {
        code: asString(v["code"], `violations[${i}].code`),
        classification: asString(v["classification"], `violations[${i}].classification`),
        loci: asArray(v["loci"], `violations[${i}].loci`).map((l, j) => {
          const pair = asArray(l, `violations[${i}].loci[${j}]`);
          if (pair.length !== 2) fail(`not a diagram document: violations[${i}].loci[${j}]`);
          return [
            asString(pair[0], `violations[${i}].loci[${j}][0]`),
            asInt(pair[1], `violations[${i}].loci[${j}][1]`),
          ] as const;
        }),
        spans: asArray(v["spans"], `violations[${i}].spans`)
          .map((s, j) => asSpan(s, `violations[${i}].spans[${j}]`)),
        detail: asString(v["detail"], `violations[${i}].detail`),
        witness: v["witness"] == null
          ? null
          : asArray(v["witness"], `violations[${i}].witness`)
              .map((w, j) => asString(w, `violations[${i}].witness[${j}]`)),
        row: asInt(v["row"], `violations[${i}].row`),
      };
    },
  );

  checkIds(lifelines, "lifelines");
  checkIds(events, "events");
  checkIds(transactions, "transactions");
  checkIds(arrows, "arrows");
  checkIds(slices, "slices");

  transactions.forEach((t, i) => {
    if (i > 0 && t.row !== transactions[i - 1]!.row + 1) {
      fail(`non-canonical row order: transaction ${t.id} has row ${t.row} after row ${transactions[i - 1]!.row}`);
    }
    t.participants.forEach((p, j) =>
      checkRef(p, events.length, `transactions[${i}].participants[${j}]`),
    );
  });
  lifelines.forEach((l, i) => {
    checkRef(l.scope, lifelines.length, `lifelines[${i}].scope`);
  });
  events.forEach((e, i) => {
    checkRef(e.lifeline, lifelines.length, `events[${i}].lifeline`);
    checkRef(e.transaction, transactions.length, `events[${i}].transaction`);
  });
  arrows.forEach((a, i) => {
    checkRef(a.tail, events.length, `arrows[${i}].tail`);
    checkRef(a.head, events.length, `arrows[${i}].head`);
    checkRef(a.lifeline, lifelines.length, `arrows[${i}].lifeline`);
  });
  slices.forEach((s, i) => {
    checkRef(s.parent, slices.length, `slices[${i}].parent`);
    s.children.forEach((c, j) =>
      checkRef(c, slices.length, `slices[${i}].children[${j}]`),
    );
  });

  return {
    version: 1, source, config, globals,
    lifelines, events, transactions, arrows, slices, violations,
  };
}

/** Row and column of an event on the grid. */
export function eventPosition(doc: DiagramDoc, eid: number): [number, number] {
  const ev = doc.events[eid];
  if (ev === undefined) throw new RangeError(`no event ${eid} in this diagram`);
  return [doc.transactions[ev.transaction]!.row, doc.lifelines[ev.lifeline]!.column];
}

/** Highest transaction or violation row; 0 for an empty diagram. */
export function rowCount(doc: DiagramDoc): number {
  let hi = 0;
  for (const t of doc.transactions) hi = Math.max(hi, t.row);
  for (const v of doc.violations) hi = Math.max(hi, v.row);
  return hi;
}
