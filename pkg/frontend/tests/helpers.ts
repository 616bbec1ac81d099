import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { parseDocument, DiagramDoc } from "../src/document.js";

// Golden fixtures are shared with the recorder's own test suite; the
// viewer must agree with them byte for byte, so they are read from the
// repository rather than copied here.
const goldens = join(
  dirname(fileURLToPath(import.meta.url)), "..", "..", "tests", "goldens",
);

export function goldenRaw(name: string): unknown {
  return JSON.parse(readFileSync(join(goldens, name), "utf8"));
}

export function goldenDoc(name: string): DiagramDoc {
  return parseDocument(goldenRaw(name));
}

export interface NavEntry {
  event: number;
  back: unknown[];
  forward: unknown[];
  past: number[];
}

export function goldenNavigation(name: string): NavEntry[] {
  const blob = goldenRaw(name) as { events: NavEntry[] };
  return blob.events;
}

export function deepFreeze<T>(value: T): T {
  if (value !== null && typeof value === "object" && !Object.isFrozen(value)) {
    Object.freeze(value);
    for (const key of Object.getOwnPropertyNames(value)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
  }
  return value;
}

/** Deterministic PRNG for property walks; same seed, same walk. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
