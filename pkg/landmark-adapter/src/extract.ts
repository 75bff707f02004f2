/**
 * Extraction jobs: images and clips to landmark JSON lines.
 *
 * An input path that is a regular file is a single image. A directory is a
 * clip: its image files, sorted by name, form the frame sequence, and the
 * frame stride picks every N-th frame. Clip records share the directory
 * name as video_id.
 */

import { readdirSync, statSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import type { DetectorBackend } from "./backends/index.js";
import { serializeRecord, type FaceObservation, type Label } from "./format.js";
import { readPpm } from "./ppm.js";

const IMAGE_EXTENSIONS = new Set([".ppm"]);

export interface ExtractionJob {
  inputs: string[];
  label: Label;
  stride: number;
  out: string;
  backend: DetectorBackend;
}

export interface ExtractionResult {
  records: FaceObservation[];
  /** inputs or frames where no face was found */
  skipped: string[];
  /** per-file failures (unreadable or undecodable media) */
  errors: string[];
}

interface Frame {
  path: string;
  id: string;
  videoId: string | null;
}

function stem(path: string): string {
  const b = basename(path);
  const e = extname(b);
  return e ? b.slice(0, -e.length) : b;
}

function collectFrames(input: string, stride: number, errors: string[]): Frame[] {
  let st;
  try {
    st = statSync(input);
  } catch {
    errors.push(`${input}: does not exist`);
    return [];
  }
  if (st.isDirectory()) {
    const frames = readdirSync(input)
      .filter((f) => IMAGE_EXTENSIONS.has(extname(f).toLowerCase()))
      .sort();
    const clip = basename(input);
    return frames
      .filter((_, i) => i % stride === 0)
      .map((f) => ({ path: join(input, f), id: `${clip}/${stem(f)}`, videoId: clip }));
  }
  return [{ path: input, id: stem(input), videoId: null }];
}

export function runExtraction(job: ExtractionJob): ExtractionResult {
  if (job.stride < 1 || !Number.isInteger(job.stride)) {
    throw new Error(`stride must be a positive integer, got ${job.stride}`);
  }
  const records: FaceObservation[] = [];
  const skipped: string[] = [];
  const errors: string[] = [];

  for (const input of job.inputs) {
    for (const frame of collectFrames(input, job.stride, errors)) {
      let image;
      try {
        image = readPpm(frame.path);
      } catch (e) {
        errors.push(`${frame.path}: ${(e as Error).message}`);
        continue;
      }
      const faces = job.backend.detect(image);
      if (faces.length === 0) {
        skipped.push(frame.path);
        continue;
      }
      faces.forEach((face, k) => {
        records.push({
          id: faces.length > 1 ? `${frame.id}#${k}` : frame.id,
          video_id: frame.videoId,
          label: job.label,
          width: image.width,
          height: image.height,
          landmarks: face.landmarks,
          backend: job.backend.name,
        });
      });
    }
  }

  const lines = records.map(serializeRecord).join("\n");
  writeFileSync(job.out, lines.length ? lines + "\n" : "");
  return { records, skipped, errors };
}
