/** Parser for the SVSMEL1 binary mel format:
 *  magic "SVSMEL1", u32 LE frame count, u32 LE band count,
 *  float32 LE data row-major (frames x bands). */

export interface MelData {
  frames: number;
  bands: number;
  /** row-major [frames * bands] */
  data: Float32Array;
}

const MAGIC = "SVSMEL1";
const HEADER_BYTES = MAGIC.length + 8;

export function parseMel(buffer: ArrayBuffer): MelData {
  if (buffer.byteLength < HEADER_BYTES) {
    throw new Error("mel buffer too short for header");
  }
  const magic = new TextDecoder().decode(new Uint8Array(buffer, 0, MAGIC.length));
  if (magic !== MAGIC) {
    throw new Error(`bad mel magic: ${JSON.stringify(magic)}`);
  }
  const view = new DataView(buffer);
  const frames = view.getUint32(MAGIC.length, true);
  const bands = view.getUint32(MAGIC.length + 4, true);
  const expected = HEADER_BYTES + frames * bands * 4;
  if (buffer.byteLength !== expected) {
    throw new Error(
      `mel payload size mismatch: expected ${expected} bytes, got ${buffer.byteLength}`,
    );
  }
  const data = new Float32Array(frames * bands);
  for (let i = 0; i < data.length; i++) {
    data[i] = view.getFloat32(HEADER_BYTES + i * 4, true);
  }
  return { frames, bands, data };
}

export function encodeMel(mel: MelData): ArrayBuffer {
  const out = new ArrayBuffer(HEADER_BYTES + mel.data.length * 4);
  new Uint8Array(out).set(new TextEncoder().encode(MAGIC), 0);
  const view = new DataView(out);
  view.setUint32(MAGIC.length, mel.frames, true);
  view.setUint32(MAGIC.length + 4, mel.bands, true);
  for (let i = 0; i < mel.data.length; i++) {
    view.setFloat32(HEADER_BYTES + i * 4, mel.data[i] ?? 0, true);
  }
  return out;
}
