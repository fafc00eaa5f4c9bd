import type { EChartsOption } from "echarts";
import { distinct, loadCsv, num, SchemaError, Table } from "./csv.js";

export interface FigureSpec {
  kind: string;
  input: string;
  output: string;
  title?: string;
  xlabel?: string;
  ylabel?: string;
  width?: number;
  height?: number;
}

export interface BuiltFigure {
  option: EChartsOption;
  sha256: string;
}

type Builder = (spec: FigureSpec) => BuiltFigure;

function base(spec: FigureSpec, title: string): EChartsOption {
  return {
    animation: false,
    title: { text: spec.title ?? title, left: "center" },
    grid: { left: 70, right: 30, top: 60, bottom: 55 },
    legend: { bottom: 0, type: "scroll" },
  };
}

function lineSeries(
  table: Table,
  groupCol: string,
  xCol: string,
  yCol: string,
): { name: string; data: [number, number][] }[] {
  return distinct(table, groupCol).map((g) => ({
    name: `${groupCol}=${g}`,
    data: table.rows
      .filter((r) => r[groupCol] === g && Number.isFinite(num(r, yCol)))
      .map((r) => [num(r, xCol), num(r, yCol)] as [number, number])
      .sort((a, b) => a[0] - b[0]),
  }));
}

/** hs_quality.csv: mean solution quality against problem size. */
function qualityLine(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["N", "q_mean", "q_std"]);
  const data = table.rows
    .map((r) => [num(r, "N"), num(r, "q_mean")] as [number, number])
    .sort((a, b) => a[0] - b[0]);
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Solution quality vs size"),
      xAxis: { type: "value", name: spec.xlabel ?? "vertices N" },
      yAxis: { type: "value", name: spec.ylabel ?? "mean q", scale: true },
      series: [{ type: "line", name: "q_mean", symbol: "circle", data }],
    },
  };
}

/** hs_scaling.csv: iterations to reach each quality target vs size. */
function iterationsLine(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["N", "q_target", "mean_iters"]);
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Iterations to quality"),
      xAxis: { type: "value", name: spec.xlabel ?? "vertices N" },
      yAxis: { type: "log", name: spec.ylabel ?? "mean iterations" },
      series: lineSeries(table, "q_target", "N", "mean_iters").map((s) => ({
        ...s,
        type: "line" as const,
        symbol: "circle",
      })),
    },
  };
}

/** hs_hubo_vs_qubo.csv: quality per formulation variant. */
function variantBars(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["variant", "q_mean"]);
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Native order vs quadratised"),
      xAxis: { type: "category", data: table.rows.map((r) => r.variant) },
      yAxis: { type: "value", name: spec.ylabel ?? "mean q", scale: true },
      series: [{ type: "bar", name: "q_mean", data: table.rows.map((r) => num(r, "q_mean")) }],
    },
  };
}

/** sg_er_iterations.csv: iterations vs density (or size) per target. */
function sgIterations(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["N", "p", "q_target", "mean_iterations"]);
  const xCol = distinct(table, "p").length > 1 ? "p" : "N";
  const groups: { name: string; data: [number, number][] }[] = [];
  for (const n of distinct(table, "N")) {
    for (const q of distinct(table, "q_target")) {
      const data = table.rows
        .filter((r) => r.N === n && r.q_target === q && Number.isFinite(num(r, "mean_iterations")))
        .map((r) => [num(r, xCol), num(r, "mean_iterations")] as [number, number])
        .sort((a, b) => a[0] - b[0]);
      if (data.length) groups.push({ name: `N=${n}, q=${q}`, data });
    }
  }
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Iterations to quality"),
      xAxis: { type: "value", name: spec.xlabel ?? (xCol === "p" ? "edge probability p" : "size N") },
      yAxis: { type: "log", name: spec.ylabel ?? "mean iterations" },
      series: groups.map((g) => ({ ...g, type: "line" as const, symbol: "circle" })),
    },
  };
}

/** tsp_bench.csv: average tour ratio per instance and method. */
function benchBars(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["instance", "method", "best", "ave"]);
  const instances = distinct(table, "instance");
  const methods = distinct(table, "method");
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Tour quality by method"),
      xAxis: { type: "category", data: instances, name: spec.xlabel ?? "" },
      yAxis: { type: "value", name: spec.ylabel ?? "tour / optimum", scale: true },
      series: methods.map((m) => ({
        type: "bar" as const,
        name: m,
        data: instances.map((inst) => {
          const row = table.rows.find((r) => r.instance === inst && r.method === m);
          return row ? num(row, "ave") : null;
        }),
      })),
    },
  };
}

/** tsp_costs.csv: histogram of valid tour ratios per method. */
function tourHistogram(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["method", "ratio", "valid"]);
  const methods = distinct(table, "method");
  const ratios = table.rows
    .filter((r) => r.valid === "1" && r.ratio !== "")
    .map((r) => num(r, "ratio"));
  if (ratios.length === 0) {
    throw new SchemaError(`${spec.input}: no valid tours to plot`);
  }
  const lo = Math.min(...ratios);
  const hi = Math.max(...ratios);
  const nBins = 20;
  const width = (hi - lo) / nBins || 1;
  const edges = Array.from({ length: nBins }, (_, i) => lo + i * width);
  const labels = edges.map((e) => e.toFixed(3));
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Tour cost distribution"),
      xAxis: { type: "category", data: labels, name: spec.xlabel ?? "tour / optimum" },
      yAxis: { type: "value", name: spec.ylabel ?? "count" },
      series: methods.map((m) => {
        const counts = new Array(nBins).fill(0);
        for (const row of table.rows) {
          if (row.method !== m || row.valid !== "1" || row.ratio === "") continue;
          const b = Math.min(nBins - 1, Math.floor((num(row, "ratio") - lo) / width));
          counts[b] += 1;
        }
        return { type: "bar" as const, name: m, data: counts, barGap: "0%" };
      }),
    },
  };
}

/** group_counts_*.csv: heat map of group counts over (k, m). */
function heatmap(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["k", "m", "mean_groups"]);
  const ks = distinct(table, "k");
  const ms = distinct(table, "m");
  const values = table.rows.map((r) => [
    ks.indexOf(r.k),
    ms.indexOf(r.m),
    num(r, "mean_groups"),
  ]);
  const vmax = Math.max(...values.map((v) => v[2] as number));
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Update groups"),
      grid: { left: 70, right: 90, top: 60, bottom: 55 },
      xAxis: { type: "category", data: ks, name: spec.xlabel ?? "edge size k" },
      yAxis: { type: "category", data: ms, name: spec.ylabel ?? "edges m" },
      visualMap: {
        min: 0,
        max: vmax,
        calculable: false,
        orient: "vertical",
        right: 10,
        top: "center",
      },
      series: [{ type: "heatmap", data: values, label: { show: true } }],
    },
  };
}

/** sparsify_sweep.csv: physical node count against neighbour budget. */
function sparsifyNodes(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["variant", "budget", "physical_nodes"]);
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Sparsification growth"),
      xAxis: { type: "value", name: spec.xlabel ?? "neighbour budget" },
      yAxis: { type: "log", name: spec.ylabel ?? "physical nodes" },
      series: lineSeries(table, "variant", "budget", "physical_nodes").map((s) => ({
        ...s,
        type: "line" as const,
        symbol: "circle",
      })),
    },
  };
}

/** sparsify_sweep.csv: vertex growth vs degree-reduction ratio (from (1,1)). */
function sparsifyRatio(spec: FigureSpec): BuiltFigure {
  const table = loadCsv(spec.input, ["variant", "r_N", "r_S"]);
  return {
    sha256: table.sha256,
    option: {
      ...base(spec, "Vertex growth vs sparsification"),
      xAxis: { type: "value", name: spec.xlabel ?? "r_S (max-degree reduction)" },
      yAxis: { type: "value", name: spec.ylabel ?? "r_N (vertex growth)" },
      series: distinct(table, "variant").map((v) => ({
        type: "line" as const,
        name: v,
        symbol: "circle",
        data: table.rows
          .filter((r) => r.variant === v)
          .map((r) => [num(r, "r_S"), num(r, "r_N")] as [number, number])
          .sort((a, b) => a[0] - b[0]),
      })),
    },
  };
}

export const FIGURE_KINDS: Record<string, Builder> = {
  "quality-line": qualityLine,
  "iterations-line": iterationsLine,
  "variant-bars": variantBars,
  "sg-iterations": sgIterations,
  "bench-bars": benchBars,
  "tour-histogram": tourHistogram,
  heatmap: heatmap,
  "sparsify-nodes": sparsifyNodes,
  "sparsify-ratio": sparsifyRatio,
};

/** Which kinds render which study CSVs (by file name). */
export const FILE_KIND_MAP: [RegExp, string[]][] = [
  [/^hs_quality\.csv$/, ["quality-line"]],
  [/^hs_scaling\.csv$/, ["iterations-line"]],
  [/^hs_hubo_vs_qubo\.csv$/, ["variant-bars"]],
  [/^sg_er_iterations\.csv$/, ["sg-iterations"]],
  [/^tsp_bench\.csv$/, ["bench-bars"]],
  [/^tsp_costs\.csv$/, ["tour-histogram"]],
  [/^group_counts.*\.csv$/, ["heatmap"]],
  [/^sparsify_sweep\.csv$/, ["sparsify-nodes", "sparsify-ratio"]],
];

export function buildFigure(spec: FigureSpec): BuiltFigure {
  const builder = FIGURE_KINDS[spec.kind];
  if (!builder) {
    throw new SchemaError(
      `unknown figure kind '${spec.kind}' (have: ${Object.keys(FIGURE_KINDS).join(", ")})`,
    );
  }
  return builder(spec);
}
