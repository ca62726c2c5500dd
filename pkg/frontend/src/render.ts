/** Pure spectrogram rendering: mel matrix in, RGBA pixel buffer out.
 *  Deterministic, so identical mels produce byte-identical pixels. */

import type { MelData } from "./melbin.js";

export interface PixelImage {
  width: number;
  height: number;
  /** RGBA, row-major from the top scanline */
  pixels: Uint8ClampedArray;
}

/** Five-stop dark-to-bright color ramp; t in [0, 1]. */
function colorRamp(t: number): [number, number, number] {
  const stops: Array<[number, number, number]> = [
    [8, 8, 24],
    [48, 28, 96],
    [158, 54, 112],
    [234, 118, 54],
    [250, 240, 170],
  ];
  const x = Math.min(Math.max(t, 0), 1) * (stops.length - 1);
  const i = Math.min(Math.floor(x), stops.length - 2);
  const f = x - i;
  const a = stops[i]!;
  const b = stops[i + 1]!;
  return [
    Math.round(a[0] + (b[0] - a[0]) * f),
    Math.round(a[1] + (b[1] - a[1]) * f),
    Math.round(a[2] + (b[2] - a[2]) * f),
  ];
}

export interface RenderOptions {
  /** log-mel value mapped to 0 (default: the analysis floor) */
  floor?: number;
  /** log-mel value mapped to 1 */
  ceiling?: number;
}

export function melToPixels(mel: MelData, opts: RenderOptions = {}): PixelImage {
  const floor = opts.floor ?? Math.log(1e-5);
  const ceiling = opts.ceiling ?? 4.0;
  const span = ceiling - floor;
  const { frames, bands, data } = mel;
  const pixels = new Uint8ClampedArray(frames * bands * 4);
  for (let t = 0; t < frames; t++) {
    for (let b = 0; b < bands; b++) {
      const value = data[t * bands + b] ?? floor;
      const norm = (value - floor) / span;
      const [r, g, bl] = colorRamp(norm);
      // low bands at the bottom scanline
      const y = bands - 1 - b;
      const idx = (y * frames + t) * 4;
      pixels[idx] = r;
      pixels[idx + 1] = g;
      pixels[idx + 2] = bl;
      pixels[idx + 3] = 255;
    }
  }
  return { width: frames, height: bands, pixels };
}

export function pixelsEqual(a: PixelImage, b: PixelImage): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  if (a.pixels.length !== b.pixels.length) return false;
  for (let i = 0; i < a.pixels.length; i++) {
    if (a.pixels[i] !== b.pixels[i]) return false;
  }
  return true;
}
