/** Editable curve model with frame-snapped dragging and a selection range.
 *  Pure data logic; canvas wiring lives in main.ts. */

import { clampF0, clampScore } from "./validate.js";

export type CurveKindTag = { kind: "f0" } | { kind: "style-token"; token: number };

export class CurveModel {
  values: number[];
  selection: [number, number] | null = null;
  dirty = false;

  constructor(public tag: CurveKindTag, values: readonly number[]) {
    this.values = values.slice();
  }

  get frames(): number {
    return this.values.length;
  }

  /** Snap a fractional x position (in frames) to the nearest frame index. */
  snapFrame(x: number): number {
    const f = Math.round(x);
    return Math.min(Math.max(f, 0), this.frames - 1);
  }

  select(a: number, b: number): void {
    const lo = this.snapFrame(Math.min(a, b));
    const hi = this.snapFrame(Math.max(a, b));
    this.selection = [lo, hi + 1];
  }

  clearSelection(): void {
    this.selection = null;
  }

  selectionOrAll(): [number, number] {
    return this.selection ?? [0, this.frames];
  }

  private clamp(value: number): number {
    return this.tag.kind === "f0" ? clampF0(value) : clampScore(value);
  }

  /** Drag one frame to a value (clamped into the legal domain). */
  dragTo(frame: number, value: number): void {
    const f = this.snapFrame(frame);
    this.values[f] = this.clamp(value);
    this.dirty = true;
  }

  /** Drag across a span, linearly interpolating between the endpoints. */
  dragSpan(fromFrame: number, fromValue: number, toFrame: number, toValue: number): void {
    const a = this.snapFrame(fromFrame);
    const b = this.snapFrame(toFrame);
    if (a === b) {
      this.dragTo(a, toValue);
      return;
    }
    const lo = Math.min(a, b);
    const hi = Math.max(a, b);
    for (let f = lo; f <= hi; f++) {
      const t = (f - a) / (b - a);
      this.values[f] = this.clamp(fromValue + (toValue - fromValue) * t);
    }
    this.dirty = true;
  }

  replace(values: readonly number[]): void {
    this.values = values.slice();
    this.dirty = true;
  }

  markSaved(): void {
    this.dirty = false;
  }
}
