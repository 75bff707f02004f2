/** Schema validation of landmark JSON-lines files, matching the consumer's
 * loader rules record for record. */

import { readFileSync } from "node:fs";

import { validateRecord, type ValidationIssue } from "./format.js";

export interface RecordReport {
  line: number;
  id: string | null;
  issues: ValidationIssue[];
}

export interface ValidationReport {
  records: RecordReport[];
  nValid: number;
  nInvalid: number;
}

export function validateFile(path: string): ValidationReport {
  const text = readFileSync(path, "utf-8");
  const records: RecordReport[] = [];
  let nValid = 0;
  text.split("\n").forEach((line, i) => {
    if (line.trim().length === 0) return;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (e) {
      records.push({
        line: i + 1,
        id: null,
        issues: [{ field: "(json)", message: `invalid JSON: ${(e as Error).message}` }],
      });
      return;
    }
    const issues = validateRecord(parsed);
    const id =
      typeof (parsed as Record<string, unknown>)?.id === "string"
        ? ((parsed as Record<string, unknown>).id as string)
        : null;
    records.push({ line: i + 1, id, issues });
    if (issues.length === 0) nValid++;
  });
  return { records, nValid, nInvalid: records.length - nValid };
}

export function renderReport(report: ValidationReport): string {
  const lines: string[] = [];
  for (const rec of report.records) {
    const name = rec.id ?? `line ${rec.line}`;
    if (rec.issues.length === 0) {
      lines.push(`PASS ${name}`);
    } else {
      for (const issue of rec.issues) {
        lines.push(`FAIL ${name}: ${issue.field}: ${issue.message}`);
      }
    }
  }
  lines.push(`${report.nValid}/${report.records.length} records valid`);
  return lines.join("\n");
}
