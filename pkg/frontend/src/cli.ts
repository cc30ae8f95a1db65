#!/usr/bin/env node
/** plots <kind> --in <csv> --out <svg>  (kinds: u_curve, loglog_n, hitting) */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvError, parseTable } from "./csv.js";
import { hitting, loglogN, uCurve } from "./figures.js";

const KINDS: Record<string, (table: ReturnType<typeof parseTable>) => string> = {
  u_curve: uCurve,
  loglog_n: loglogN,
  hitting,
};

export function checkOutputPath(path: string): void {
  if (!path.endsWith(".svg")) {
    throw new CsvError(
      `output must be an .svg file (got ${path}); raster formats are not supported`,
    );
  }
}

function usage(): string {
  return `usage: plots <${Object.keys(KINDS).join("|")}> --in <csv> --out <svg>`;
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        out: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(usage());
    return 2;
  }
  const [kind] = parsed.positionals;
  const input = parsed.values.in;
  const output = parsed.values.out;
  if (!kind || !(kind in KINDS) || !input || !output) {
    console.error(usage());
    return 2;
  }
  try {
    checkOutputPath(output);
    const table = parseTable(readFileSync(input, "utf-8"), basename(input));
    const svg = KINDS[kind](table);
    writeFileSync(output, svg, "utf-8");
    console.error(`wrote ${output}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
