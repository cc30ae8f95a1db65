import { describe, expect, it, vi } from "vitest";

import { CsvError, parseTable, requireColumns, requireSchema } from "../src/csv.js";

const SWEEP = `# schema=sweep-v1
algo,n,strength,trial,seed,iterations,evaluations,lower_hits,upper_hits,censored
cga,16,0.125,0,5,42,84,0,16,0
cga,16,0.125,1,6,58,116,0,16,0
`;

describe("parseTable", () => {
  it("reads the schema line and rows", () => {
    const table = parseTable(SWEEP, "sweep.csv");
    expect(table.schema).toBe("sweep-v1");
    expect(table.rows).toHaveLength(2);
    expect(table.rows[0].iterations).toBe("42");
  });

  it("rejects files without a schema line", () => {
    expect(() => parseTable("algo,n\ncga,16\n", "x.csv")).toThrow(CsvError);
  });

  it("schema mismatch names both versions", () => {
    const table = parseTable(SWEEP, "sweep.csv");
    expect(() => requireSchema(table, "sweep-v2")).toThrow(/sweep-v1.*sweep-v2/);
  });

  it("missing columns are named", () => {
    const table = parseTable(SWEEP, "sweep.csv");
    expect(() => requireColumns(table, [...table.header, "bonus", "extra"]))
      .toThrow(/bonus, extra/);
  });

  it("unknown columns warn and are ignored", () => {
    const spy = vi.spyOn(console, "error").mockImplementation(() => {});
    const table = parseTable(SWEEP, "sweep.csv");
    requireColumns(table, table.header.filter((c) => c !== "censored"));
    expect(spy).toHaveBeenCalledOnce();
    expect(String(spy.mock.calls[0][0])).toContain("censored");
    spy.mockRestore();
  });

  it("empty data is an error", () => {
    const headerOnly = SWEEP.split("\n").slice(0, 2).join("\n") + "\n";
    const table = parseTable(headerOnly, "empty.csv");
    expect(() => requireColumns(table, table.header)).toThrow(/no data rows/);
  });
});
