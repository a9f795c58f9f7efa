/** DCGF frame container: 6-bit color codes behind a tiny header.
 *
 * Layout (big-endian): "DCGF" magic, u16 width, u16 height, then
 * width*height code bytes row-major. Codes expand to RGB by placing each
 * 2-bit channel at the top of its byte, mid-band.
 */

export interface DecodedFrame {
  width: number;
  height: number;
  codes: Uint8Array; // row-major, values 0..63
}

export function decodeFrame(data: ArrayBuffer): DecodedFrame {
  const view = new DataView(data);
  if (data.byteLength < 8 || view.getUint32(0) !== 0x44434746 /* "DCGF" */) {
    throw new Error("not a DCGF container");
  }
  const width = view.getUint16(4);
  const height = view.getUint16(6);
  const codes = new Uint8Array(data, 8);
  if (codes.length !== width * height) {
    throw new Error(`body is ${codes.length} bytes, expected ${width * height}`);
  }
  return { width, height, codes };
}

/** Canonical RGB representative of a 6-bit code (band midpoints). */
export function codeToRgb(code: number): [number, number, number] {
  return [
    (((code >> 4) & 3) << 6) | 32,
    (((code >> 2) & 3) << 6) | 32,
    ((code & 3) << 6) | 32,
  ];
}

/** Expand a frame into RGBA pixels for a canvas ImageData buffer. */
export function frameToRgba(frame: DecodedFrame, out?: Uint8ClampedArray): Uint8ClampedArray {
  const rgba = out ?? new Uint8ClampedArray(frame.width * frame.height * 4);
  for (let i = 0; i < frame.codes.length; i++) {
    const [r, g, b] = codeToRgb(frame.codes[i]);
    rgba[4 * i] = r;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = b;
    rgba[4 * i + 3] = 255;
  }
  return rgba;
}
