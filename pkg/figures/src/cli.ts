#!/usr/bin/env node
/**
 * crestwave-figures: render run directories and study tables to SVG.
 *
 * The whole figure is built in memory and written once, so a malformed input
 * exits nonzero without leaving a partial image behind.
 */

import fs from "node:fs";
import path from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { plotMollifyStudy, plotRun } from "./plots.js";

function writeAtomically(outPath: string, content: string): void {
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  const tmp = `${outPath}.tmp-${process.pid}`;
  fs.writeFileSync(tmp, content);
  fs.renameSync(tmp, outPath);
}

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  const parser = yargs(argv)
    .scriptName("crestwave-figures")
    .command(
      "plot-run <rundir>",
      "interface snapshots and energy traces for one run directory",
      (y) => y.positional("rundir", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true }),
      (args) => {
        const svg = plotRun(args.rundir as string);
        writeAtomically(args.out as string, svg);
        console.log(`wrote ${args.out}`);
      },
    )
    .command(
      "plot-mollify <csv>",
      "log-log successive-difference plot with fitted slope",
      (y) => y.positional("csv", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true }),
      (args) => {
        const svg = plotMollifyStudy(args.csv as string);
        writeAtomically(args.out as string, svg);
        console.log(`wrote ${args.out}`);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(err ? `${err.name}: ${err.message}` : msg);
      failed = true;
    });
  try {
    await parser.parseAsync();
  } catch {
    failed = true;
  }
  return failed ? 1 : 0;
}

const isDirectRun = process.argv[1] !== undefined
  && path.resolve(process.argv[1]) === new URL(import.meta.url).pathname;
if (isDirectRun) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
