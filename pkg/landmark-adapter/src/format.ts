/**
 * The landmark JSON-lines record format consumed by the pose pipeline.
 * One face observation per line:
 *   {"id", "video_id", "label", "width", "height", "landmarks": [[x, y] x 68]}
 * Validation rules here mirror the consumer's loader exactly.
 */

export const N_LANDMARKS = 68;

export const LABELS = ["real", "fake", "unknown"] as const;
export type Label = (typeof LABELS)[number];

export interface FaceObservation {
  id: string;
  video_id: string | null;
  label: Label;
  width: number;
  height: number;
  landmarks: [number, number][];
  /** detector backend that produced the record, for provenance */
  backend?: string;
}

export interface ValidationIssue {
  field: string;
  message: string;
  recordId?: string;
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Validate one parsed record; returns all issues found (empty = valid). */
export function validateRecord(rec: unknown): ValidationIssue[] {
  if (typeof rec !== "object" || rec === null || Array.isArray(rec)) {
    return [{ field: "(record)", message: "record must be a JSON object" }];
  }
  const r = rec as Record<string, unknown>;
  const issues: ValidationIssue[] = [];
  const recordId = typeof r.id === "string" ? r.id : undefined;
  const push = (field: string, message: string) =>
    issues.push({ field, message, recordId });

  if (typeof r.id !== "string" || r.id.length === 0) {
    push("id", "must be a non-empty string");
  }
  if (r.video_id !== null && r.video_id !== undefined && typeof r.video_id !== "string") {
    push("video_id", "must be a string or null");
  }
  const label = r.label ?? "unknown";
  if (!LABELS.includes(label as Label)) {
    push("label", `must be one of ${LABELS.join(", ")}`);
  }
  for (const key of ["width", "height"] as const) {
    if (!isFiniteNumber(r[key]) || (r[key] as number) <= 0) {
      push(key, "must be a positive number");
    }
  }
  if (r.backend !== undefined && typeof r.backend !== "string") {
    push("backend", "must be a string when present");
  }
  const lm = r.landmarks;
  if (!Array.isArray(lm) || lm.length !== N_LANDMARKS) {
    push("landmarks", `must be a list of ${N_LANDMARKS} [x, y] pairs`);
  } else {
    lm.forEach((p, i) => {
      if (!Array.isArray(p) || p.length !== 2 || !isFiniteNumber(p[0]) || !isFiniteNumber(p[1])) {
        push(`landmarks[${i}]`, "must be an [x, y] pair of finite numbers");
      }
    });
  }
  return issues;
}

export function serializeRecord(obs: FaceObservation): string {
  return JSON.stringify({
    id: obs.id,
    video_id: obs.video_id,
    label: obs.label,
    width: obs.width,
    height: obs.height,
    landmarks: obs.landmarks,
    ...(obs.backend !== undefined ? { backend: obs.backend } : {}),
  });
}
