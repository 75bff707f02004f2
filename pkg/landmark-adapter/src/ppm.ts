/** Minimal binary PPM (P6, maxval 255) decoder; fixtures and test media use
 * this format because it needs no native codecs. */

import { readFileSync } from "node:fs";

export interface PpmImage {
  width: number;
  height: number;
  /** RGB triples, row-major. */
  data: Buffer;
}

export class PpmError extends Error {}

export function decodePpm(buf: Buffer): PpmImage {
  let pos = 0;
  const token = (): string => {
    // skip whitespace and '#' comments
    for (;;) {
      while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]!))) pos++;
      if (pos < buf.length && buf[pos] === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]!))) pos++;
    if (start === pos) throw new PpmError("unexpected end of header");
    return buf.subarray(start, pos).toString("ascii");
  };

  if (token() !== "P6") throw new PpmError("not a binary PPM (P6) file");
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new PpmError(`bad dimensions ${width}x${height}`);
  }
  if (maxval !== 255) throw new PpmError(`unsupported maxval ${maxval}`);
  pos++; // single whitespace after maxval
  const need = width * height * 3;
  if (buf.length - pos < need) {
    throw new PpmError(`truncated pixel data: need ${need}, have ${buf.length - pos}`);
  }
  return { width, height, data: buf.subarray(pos, pos + need) };
}

export function readPpm(path: string): PpmImage {
  return decodePpm(readFileSync(path));
}
