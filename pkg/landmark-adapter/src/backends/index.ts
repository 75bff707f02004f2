/**
 * Detector backends behind one interface. A backend turns a decoded image
 * into zero or more 68-point faces in the standard landmark numbering.
 *
 * The `marker` backend ships by default: it reads fiducial-coded landmarks
 * and needs no model weights, so contract tests run offline. Neural
 * detectors (dlib-style or mediapipe-style) plug in through the same
 * interface but require their own model assets.
 */

import type { PpmImage } from "../ppm.js";
import { MarkerBackend } from "./marker.js";

export interface DetectedFace {
  landmarks: [number, number][];
}

export interface DetectorBackend {
  readonly name: string;
  detect(image: PpmImage): DetectedFace[];
}

const REGISTRY: Record<string, () => DetectorBackend> = {
  marker: () => new MarkerBackend(),
};

export function backendNames(): string[] {
  return Object.keys(REGISTRY);
}

export function createBackend(name: string): DetectorBackend {
  const factory = REGISTRY[name];
  if (!factory) {
    throw new Error(`unknown backend ${name}; available: ${backendNames().join(", ")}`);
  }
  return factory();
}
