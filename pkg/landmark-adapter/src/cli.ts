#!/usr/bin/env node
/**
 * landmark-adapter CLI.
 *
 *   extract  --in <paths...> --label <real|fake> [--stride N]
 *            [--backend marker] --out file.jsonl
 *   validate --in file.jsonl
 *
 * Exit codes: 0 success, 1 usage error, 2 data error.
 */

import { backendNames, createBackend } from "./backends/index.js";
import { LABELS, type Label } from "./format.js";
import { runExtraction } from "./extract.js";
import { renderReport, validateFile } from "./validate.js";

class UsageError extends Error {}

interface Flags {
  lists: Map<string, string[]>;
  values: Map<string, string>;
}

function parseFlags(argv: string[], listFlags: Set<string>): Flags {
  const lists = new Map<string, string[]>();
  const values = new Map<string, string>();
  let current: string | null = null;
  for (const arg of argv) {
    if (arg.startsWith("--")) {
      current = arg.slice(2);
      if (listFlags.has(current)) {
        if (!lists.has(current)) lists.set(current, []);
      }
      continue;
    }
    if (current === null) throw new UsageError(`unexpected argument ${arg}`);
    if (listFlags.has(current)) {
      lists.get(current)!.push(arg);
    } else {
      if (values.has(current)) throw new UsageError(`--${current} given twice`);
      values.set(current, arg);
    }
  }
  return { lists, values };
}

function cmdExtract(argv: string[]): number {
  const flags = parseFlags(argv, new Set(["in"]));
  const inputs = flags.lists.get("in") ?? [];
  const label = flags.values.get("label");
  const out = flags.values.get("out");
  const stride = Number(flags.values.get("stride") ?? "1");
  const backendName = flags.values.get("backend") ?? "marker";
  if (inputs.length === 0) throw new UsageError("--in requires at least one path");
  if (!label || !LABELS.includes(label as Label) || label === "unknown") {
    throw new UsageError("--label must be real or fake");
  }
  if (!out) throw new UsageError("--out is required");
  if (!Number.isInteger(stride) || stride < 1) {
    throw new UsageError("--stride must be a positive integer");
  }
  if (!backendNames().includes(backendName)) {
    throw new UsageError(`--backend must be one of: ${backendNames().join(", ")}`);
  }

  const result = runExtraction({
    inputs,
    label: label as Label,
    stride,
    out,
    backend: createBackend(backendName),
  });
  for (const err of result.errors) console.error(`error: ${err}`);
  for (const skip of result.skipped) console.error(`skip: no face detected in ${skip}`);
  console.log(
    `extract: wrote ${result.records.length} records to ${out} ` +
      `(${result.skipped.length} skipped, ${result.errors.length} errors)`,
  );
  if (result.records.length === 0) {
    console.error("error: no faces detected in any input");
    return 2;
  }
  return 0;
}

function cmdValidate(argv: string[]): number {
  const flags = parseFlags(argv, new Set());
  const input = flags.values.get("in");
  if (!input) throw new UsageError("--in is required");
  const report = validateFile(input);
  console.log(renderReport(report));
  return report.nInvalid === 0 ? 0 : 2;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "extract":
        return cmdExtract(rest);
      case "validate":
        return cmdValidate(rest);
      default:
        throw new UsageError(
          `usage: landmark-adapter <extract|validate> ...  (got ${command ?? "nothing"})`,
        );
    }
  } catch (e) {
    if (e instanceof UsageError) {
      console.error(`usage error: ${e.message}`);
      return 1;
    }
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
}

import { fileURLToPath } from "node:url";
import { argv as processArgv, exit } from "node:process";

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  exit(main(processArgv.slice(2)));
}
