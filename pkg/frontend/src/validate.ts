/** Client-side curve validation mirroring the server's rules, so the UI
 *  never sends a curve the server would reject. */

export const F0_MIN_HZ = 40;
export const F0_MAX_HZ = 1500;

export interface Violation {
  field: string;
  message: string;
}

export function validateF0Values(values: ArrayLike<number>): Violation[] {
  const out: Violation[] = [];
  for (let i = 0; i < values.length; i++) {
    const v = values[i] as number;
    if (!Number.isFinite(v)) {
      out.push({ field: `f0_hz[${i}]`, message: "non-finite value" });
    } else if (v < 0) {
      out.push({ field: `f0_hz[${i}]`, message: `negative f0 ${v}` });
    } else if (v !== 0 && (v < F0_MIN_HZ || v > F0_MAX_HZ)) {
      out.push({
        field: `f0_hz[${i}]`,
        message: `voiced f0 ${v} outside [${F0_MIN_HZ}, ${F0_MAX_HZ}] Hz`,
      });
    }
  }
  return out;
}

export function validateStyleScores(
  scores: ReadonlyArray<ReadonlyArray<number>>,
  side: string,
): Violation[] {
  const out: Violation[] = [];
  for (let f = 0; f < scores.length; f++) {
    const row = scores[f]!;
    for (let t = 0; t < row.length; t++) {
      const v = row[t] as number;
      if (!Number.isFinite(v)) {
        out.push({
          field: `style.${side}.scores[${f}][${t}]`,
          message: "non-finite value",
        });
      } else if (v < 0) {
        out.push({
          field: `style.${side}.scores[${f}][${t}]`,
          message: `negative score ${v}`,
        });
      }
    }
  }
  return out;
}

/** Clamp a dragged f0 value into the server's domain. Values dragged below
 *  the voiced floor snap to unvoiced (exactly 0). */
export function clampF0(value: number): number {
  if (!Number.isFinite(value)) return 0;
  if (value < F0_MIN_HZ / 2) return 0;
  return Math.min(Math.max(value, F0_MIN_HZ), F0_MAX_HZ);
}

export function clampScore(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.max(value, 0);
}
