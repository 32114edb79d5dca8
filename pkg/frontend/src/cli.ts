#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { writeChromaFigure } from "./chromaPolar.js";
import { writeKSweepFigure } from "./ksweep.js";

yargs(hideBin(process.argv))
  .command(
    "render-chroma",
    "render polar chroma histograms side by side with a shared scale",
    y => y
      .option("inputs", { type: "string", array: true, demandOption: true,
                          describe: "histogram JSON files" })
      .option("labels", { type: "string", array: true, default: [] as string[],
                          describe: "one panel label per input" })
      .option("out", { type: "string", demandOption: true,
                       describe: "output SVG path" }),
    argv => {
      writeChromaFigure(argv.inputs, argv.labels, argv.out);
      console.log(`wrote ${argv.out} (${argv.inputs.length} panels)`);
    })
  .command(
    "render-ksweep",
    "render retained points and ratio against bin capacity k",
    y => y
      .option("csv", { type: "string", demandOption: true,
                       describe: "CSV with k,points,ratio_pct columns" })
      .option("out", { type: "string", demandOption: true,
                       describe: "output SVG path" }),
    argv => {
      const data = writeKSweepFigure(argv.csv, argv.out);
      if (!data.monotone) {
        console.error("warning: ratio_pct is not monotone in k; check the CSV");
      }
      console.log(`wrote ${argv.out} (${data.rows.length} capacities)`);
    })
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    console.error(err ? err.message : msg);
    process.exit(1);
  })
  .parse();
