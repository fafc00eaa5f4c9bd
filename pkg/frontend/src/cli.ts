import { mkdirSync, readdirSync } from "node:fs";
import { basename, join } from "node:path";
import { parseArgs } from "node:util";
import { SchemaError } from "./csv.js";
import { FILE_KIND_MAP, FIGURE_KINDS } from "./figures.js";
import { renderToFile } from "./render.js";

const USAGE = `usage:
  render     --kind <kind> --input <csv> --out <svg> [--title t] [--xlabel x] [--ylabel y] [--width n] [--height n]
  render-all --input <study-dir> --out <figure-dir>

kinds: ${Object.keys(FIGURE_KINDS).join(", ")}`;

function cmdRender(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      kind: { type: "string" },
      input: { type: "string" },
      out: { type: "string" },
      title: { type: "string" },
      xlabel: { type: "string" },
      ylabel: { type: "string" },
      width: { type: "string" },
      height: { type: "string" },
    },
  });
  if (!values.kind || !values.input || !values.out) {
    console.error(USAGE);
    return 2;
  }
  renderToFile({
    kind: values.kind,
    input: values.input,
    output: values.out,
    title: values.title,
    xlabel: values.xlabel,
    ylabel: values.ylabel,
    width: values.width ? Number(values.width) : undefined,
    height: values.height ? Number(values.height) : undefined,
  });
  console.log(`wrote ${values.out}`);
  return 0;
}

function cmdRenderAll(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: { input: { type: "string" }, out: { type: "string" } },
  });
  if (!values.input || !values.out) {
    console.error(USAGE);
    return 2;
  }
  mkdirSync(values.out, { recursive: true });
  let rendered = 0;
  for (const file of readdirSync(values.input).sort()) {
    for (const [pattern, kinds] of FILE_KIND_MAP) {
      if (!pattern.test(file)) continue;
      for (const kind of kinds) {
        const out = join(values.out, `${basename(file, ".csv")}_${kind}.svg`);
        renderToFile({ kind, input: join(values.input, file), output: out });
        console.log(`wrote ${out}`);
        rendered += 1;
      }
    }
  }
  if (rendered === 0) {
    console.error(`no study CSVs recognised in ${values.input}`);
    return 1;
  }
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "render") return cmdRender(rest);
    if (command === "render-all") return cmdRenderAll(rest);
    console.error(USAGE);
    return 2;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === new URL(`file://${process.argv[1]}`).href) {
  process.exitCode = main(process.argv.slice(2));
}
