import { writeFileSync } from "node:fs";
import * as echarts from "echarts";
import { buildFigure, FigureSpec } from "./figures.js";

/** Render a figure spec to an SVG string with the input checksum embedded
 * as metadata (figures are artifacts of the CSV alone). */
export function renderToString(spec: FigureSpec): string {
  const { option, sha256 } = buildFigure(spec);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? 800,
    height: spec.height ?? 560,
  });
  try {
    chart.setOption(option);
    // the renderer stamps class names with process-global counters;
    // renumber them by first occurrence so renders are byte-identical
    const svg = canonicaliseClasses(chart.renderToSVGString());
    const meta = `<metadata>input-sha256:${sha256} source:${spec.input.split("/").pop()}</metadata>`;
    return svg.replace(/<\/svg>\s*$/, `${meta}</svg>`);
  } finally {
    chart.dispose();
  }
}

function canonicaliseClasses(svg: string): string {
  const renamed = new Map<string, string>();
  return svg
    .replace(/zr\d+-cls-\d+/g, (name) => {
      let next = renamed.get(name);
      if (next === undefined) {
        next = `zr-cls-${renamed.size}`;
        renamed.set(name, next);
      }
      return next;
    })
    // clip-path and gradient ids are numbered per chart instance; only the
    // instance prefix varies between renders
    .replace(/zr\d+-/g, "zr-");
}

export function renderToFile(spec: FigureSpec): void {
  writeFileSync(spec.output, renderToString(spec));
}
