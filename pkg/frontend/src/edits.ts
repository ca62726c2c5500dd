/** Scripted curve edits, mirroring the engine's semantics exactly:
 *  multiplicative semitone-domain f0 edits on voiced frames only, and
 *  non-renormalizing style-token scaling. */

import { clampScore, F0_MAX_HZ, F0_MIN_HZ } from "./validate.js";

export const SAMPLE_RATE = 22050;
export const HOP = 256;

export type FrameRange = [number, number];

function checkRange(range: FrameRange, length: number): void {
  const [a, b] = range;
  if (!(a >= 0 && a < b && b <= length)) {
    throw new Error(`range [${a}, ${b}) invalid for ${length} frames`);
  }
}

function clampVoiced(v: number): number {
  return Math.min(Math.max(v, F0_MIN_HZ), F0_MAX_HZ);
}

export function shiftF0(values: readonly number[], semitones: number,
                        range: FrameRange): number[] {
  checkRange(range, values.length);
  const factor = Math.pow(2, semitones / 12);
  return values.map((v, i) =>
    v > 0 && i >= range[0] && i < range[1] ? clampVoiced(v * factor) : v);
}

export function flattenF0(values: readonly number[], lambda: number,
                          range: FrameRange): number[] {
  checkRange(range, values.length);
  if (lambda < 0 || lambda > 1) throw new Error("lambda must be in [0, 1]");
  const out = values.slice();
  let start = -1;
  const segments: Array<[number, number]> = [];
  for (let i = range[0]; i <= range[1]; i++) {
    const voiced = i < range[1] && (values[i] as number) > 0;
    if (voiced && start < 0) start = i;
    if (!voiced && start >= 0) {
      segments.push([start, i]);
      start = -1;
    }
  }
  for (const [a, b] of segments) {
    let mean = 0;
    for (let i = a; i < b; i++) mean += values[i] as number;
    mean /= b - a;
    for (let i = a; i < b; i++) {
      out[i] = clampVoiced(mean + lambda * ((values[i] as number) - mean));
    }
  }
  return out;
}

export function vibratoF0(values: readonly number[], rateHz: number,
                          depthSemitones: number, range: FrameRange): number[] {
  checkRange(range, values.length);
  const dt = HOP / SAMPLE_RATE;
  return values.map((v, i) => {
    if (!(v > 0) || i < range[0] || i >= range[1]) return v;
    const t = (i - range[0]) * dt;
    const factor = Math.pow(2, (depthSemitones * Math.sin(2 * Math.PI * rateHz * t)) / 12);
    return clampVoiced(v * factor);
  });
}

export function rampF0(values: readonly number[], startSemitones: number,
                       endSemitones: number, range: FrameRange): number[] {
  checkRange(range, values.length);
  const n = range[1] - range[0];
  return values.map((v, i) => {
    if (!(v > 0) || i < range[0] || i >= range[1]) return v;
    const f = n === 1 ? 0 : (i - range[0]) / (n - 1);
    const offset = startSemitones + (endSemitones - startSemitones) * f;
    return clampVoiced(v * Math.pow(2, offset / 12));
  });
}

/** Multiply one token's column by a constant factor over [a, b). */
export function scaleToken(scores: ReadonlyArray<ReadonlyArray<number>>,
                           token: number, factor: number,
                           range: FrameRange): number[][] {
  checkRange(range, scores.length);
  if (factor < 0) throw new Error("factor must be >= 0");
  return scores.map((row, f) => {
    const copy = row.slice();
    if (f >= range[0] && f < range[1]) {
      copy[token] = clampScore((copy[token] as number) * factor);
    }
    return copy;
  });
}

/** Linearly interpolated per-frame factor from start to end over [a, b). */
export function rampToken(scores: ReadonlyArray<ReadonlyArray<number>>,
                          token: number, factorStart: number, factorEnd: number,
                          range: FrameRange): number[][] {
  checkRange(range, scores.length);
  if (factorStart < 0 || factorEnd < 0) throw new Error("factors must be >= 0");
  const n = range[1] - range[0];
  return scores.map((row, f) => {
    const copy = row.slice();
    if (f >= range[0] && f < range[1]) {
      const t = n === 1 ? 0 : (f - range[0]) / (n - 1);
      const factor = factorStart + (factorEnd - factorStart) * t;
      copy[token] = clampScore((copy[token] as number) * factor);
    }
    return copy;
  });
}
