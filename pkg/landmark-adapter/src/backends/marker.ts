/**
 * Fiducial-marker landmark detector.
 *
 * Landmarks are encoded in the image as pure-red-family pixels: a marker
 * pixel has R=255, G=0 and B equal to the landmark index (1..68). The
 * detector scans the image, groups marker pixels by index, and returns the
 * centroid of each group. A face counts as detected only when all 68
 * indices are present.
 */

import type { PpmImage } from "../ppm.js";
import { N_LANDMARKS } from "../format.js";
import type { DetectedFace, DetectorBackend } from "./index.js";

const MARKER_R = 255;
const MARKER_G = 0;

export class MarkerBackend implements DetectorBackend {
  readonly name = "marker";

  detect(image: PpmImage): DetectedFace[] {
    const sums = new Float64Array(N_LANDMARKS * 2);
    const counts = new Uint32Array(N_LANDMARKS);
    const { width, height, data } = image;
    for (let y = 0; y < height; y++) {
      const row = y * width * 3;
      for (let x = 0; x < width; x++) {
        const o = row + x * 3;
        if (data[o] === MARKER_R && data[o + 1] === MARKER_G) {
          const idx = data[o + 2]!;
          if (idx >= 1 && idx <= N_LANDMARKS) {
            sums[(idx - 1) * 2] += x;
            sums[(idx - 1) * 2 + 1] += y;
            counts[idx - 1]++;
          }
        }
      }
    }
    if (counts.some((c) => c === 0)) {
      return []; // incomplete marker set: no face
    }
    const landmarks: [number, number][] = [];
    for (let i = 0; i < N_LANDMARKS; i++) {
      landmarks.push([sums[i * 2]! / counts[i]!, sums[i * 2 + 1]! / counts[i]!]);
    }
    return [{ landmarks }];
  }
}
