import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { parseMeasuredCsv, parseRatesCsv, SchemaError } from "./csv";
import { buildRatesSvg } from "./plots";

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write("usage: plot_rates <rates.csv> <measured.csv> <out.svg>\n");
    return 2;
  }
  const [ratesPath, measuredPath, outPath] = argv;
  try {
    const svg = buildRatesSvg(parseRatesCsv(ratesPath), parseMeasuredCsv(measuredPath));
    mkdirSync(dirname(outPath), { recursive: true });
    writeFileSync(outPath, svg);
  } catch (err) {
    const tag = err instanceof SchemaError ? "schema error" : "error";
    process.stderr.write(`plot_rates: ${tag}: ${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (typeof require !== "undefined" && require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
