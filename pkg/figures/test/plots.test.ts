import { createHash } from "node:crypto";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { describe, expect, it } from "vitest";

import { SchemaError, readCsv, readRunDir } from "../src/csv.js";
import { fitSlope, plotMollifyStudy, plotRun } from "../src/plots.js";
import { main } from "../src/cli.js";
import { fmt, linearScale, logScale } from "../src/svg.js";

const FIX = path.join(__dirname, "fixtures");

function sha256(text: string): string {
  return createHash("sha256").update(text).digest("hex");
}

const referenceHashes: Record<string, string> = JSON.parse(
  fs.readFileSync(path.join(FIX, "hashes.json"), "utf8"),
);

describe("byte-stable regeneration", () => {
  for (const name of ["run_flat", "run_smooth", "run_crest"]) {
    it(`regenerates ${name}.svg hash-identical to the stored reference`, () => {
      const svg = plotRun(path.join(FIX, name));
      expect(sha256(svg)).toBe(referenceHashes[`${name}.svg`]);
    });
  }

  it("regenerates the mollification study figure hash-identical", () => {
    const svg = plotMollifyStudy(path.join(FIX, "study", "mollify_study.csv"));
    expect(sha256(svg)).toBe(referenceHashes["study.svg"]);
  });

  it("renders are deterministic across repeated calls", () => {
    const a = plotRun(path.join(FIX, "run_smooth"));
    const b = plotRun(path.join(FIX, "run_smooth"));
    expect(a).toBe(b);
  });
});

describe("run figure content", () => {
  it("flat run draws flat interface snapshots and reports completion", () => {
    const svg = plotRun(path.join(FIX, "run_flat"));
    expect(svg).toContain("interface snapshots");
    expect(svg).toContain("termination: completed");
    expect(svg).toContain("blow-up energies");
  });

  it("crest run includes every report time label", () => {
    const svg = plotRun(path.join(FIX, "run_crest"));
    for (const label of ["t=0", "t=0.1", "t=0.2", "t=0.3"]) {
      expect(svg).toContain(`>${label}<`);
    }
  });
});

describe("mollify study figure", () => {
  it("annotates a fitted slope consistent with an offline fit", () => {
    const table = readCsv(path.join(FIX, "study", "mollify_study.csv"),
      ["eps", "d_eps"]);
    const eps = table.rows.map((r) => Math.log10(r.eps));
    const d = table.rows.map((r) => Math.log10(r.d_eps));
    const slope = fitSlope(eps, d);
    const svg = plotMollifyStudy(path.join(FIX, "study", "mollify_study.csv"));
    expect(svg).toContain(`fitted slope: ${fmt(slope)}`);
  });

  it("renders an empty table as empty axes with a warning", () => {
    const svg = plotMollifyStudy(path.join(FIX, "empty_study", "mollify_study.csv"));
    expect(svg).toContain("warning: empty study table");
  });

  it("renders a single-row table as scatter only (no slope fit)", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "study-"));
    const file = path.join(dir, "mollify_study.csv");
    fs.writeFileSync(file,
      "eps,d_eps,ratio_to_coarser,delta0,delta_min,chord_arc_ok,reason\n"
      + "0.1,0.01,nan,0.8,0.8,true,completed\n");
    const svg = plotMollifyStudy(file);
    expect(svg).toContain("<circle");
    expect(svg).not.toContain("fitted slope");
  });
});

describe("malformed input handling", () => {
  it("schema mismatch names the offending file", () => {
    expect(() => readCsv(path.join(FIX, "bad_energy.csv"), ["t", "frakE"]))
      .toThrowError(/bad_energy\.csv.*missing column 'frakE'/);
  });

  it("missing run directory fails loudly", () => {
    expect(() => readRunDir(path.join(FIX, "no_such_run"))).toThrowError(SchemaError);
  });

  it("cli exits nonzero and writes no partial output", async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
    const out = path.join(dir, "broken.svg");
    const bogus = path.join(dir, "not_a_run");
    fs.mkdirSync(bogus);
    fs.writeFileSync(path.join(bogus, "energy.csv"), "t,Ea\n0,0\n");
    fs.writeFileSync(path.join(bogus, "snapshots.csv"), "t\n0\n");
    const code = await main(["plot-run", bogus, "--out", out]);
    expect(code).toBe(1);
    expect(fs.existsSync(out)).toBe(false);
    expect(fs.readdirSync(dir).filter((f) => f.endsWith(".tmp"))).toHaveLength(0);
  });

  it("cli succeeds on a well-formed run", async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
    const out = path.join(dir, "ok.svg");
    const code = await main(["plot-run", path.join(FIX, "run_flat"), "--out", out]);
    expect(code).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
    expect(sha256(fs.readFileSync(out, "utf8"))).toBe(referenceHashes["run_flat.svg"]);
  });
});

describe("scales", () => {
  it("linear scale spans the output range with readable ticks", () => {
    const s = linearScale(0, 10, 100, 200);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s.ticks.length).toBeGreaterThan(2);
  });

  it("log scale rejects nonpositive bounds", () => {
    expect(() => logScale(0, 1, 0, 1)).toThrowError();
  });

  it("number formatting is stable and trims zeros", () => {
    expect(fmt(0.5)).toBe("0.5");
    expect(fmt(0)).toBe("0");
    expect(() => fmt(Number.NaN)).toThrowError();
  });
});
