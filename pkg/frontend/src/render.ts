/**
 * SVG rendering of a plot spec with echarts in SSR mode.
 *
 * The visual layout mirrors the study's figures: one panel per sample size,
 * grouped boxes per feature with one box per signal-to-noise level, a solid
 * line segment at each box's Monte-Carlo mean, and a star at the theoretical
 * value of each feature group.
 */

import * as echarts from "echarts";

import { PlotSpec } from "./plotspec.js";

const SN_COLORS = ["#bdd7e7", "#6baed6", "#3182bd", "#08519c"];
const STAR_PATH =
  "path://M150 25 L179 111 L269 111 L197 165 L223 251 L150 200 L77 251 " +
  "L103 165 L31 111 L121 111 Z";

export function buildChartOption(spec: PlotSpec): echarts.EChartsCoreOption {
  const panels = spec.panels;
  const grids: object[] = [];
  const xAxes: object[] = [];
  const yAxes: object[] = [];
  const series: object[] = [];
  const titles: object[] = [{
    text: `${spec.figure}: ${spec.model} model`,
    left: "center",
    top: 2,
  }];

  const panelHeight = 100 / panels.length;
  panels.forEach((panel, pi) => {
    grids.push({
      left: 60,
      right: 30,
      top: `${panelHeight * pi + 8}%`,
      height: `${panelHeight - 14}%`,
    });
    titles.push({
      text: `n = ${panel.n}`,
      left: 70,
      top: `${panelHeight * pi + 3.2}%`,
      textStyle: { fontSize: 12 },
    });
    xAxes.push({
      gridIndex: pi,
      type: "category",
      data: panel.groups.map((g) => `x${g.feature}`),
      name: "feature",
      nameLocation: "middle",
      nameGap: 24,
    });
    yAxes.push({ gridIndex: pi, type: "value", name: "importance" });

    spec.snLevels.forEach((sn, si) => {
      series.push({
        name: `SN=${sn}`,
        type: "boxplot",
        xAxisIndex: pi,
        yAxisIndex: pi,
        itemStyle: { color: SN_COLORS[si % SN_COLORS.length], borderColor: "#333" },
        data: panel.groups.map((g) => {
          const s = g.boxes[si].stats;
          return [s.min, s.q1, s.median, s.q3, s.max];
        }),
      });
      // solid line at the Monte-Carlo mean, one mark per box
      series.push({
        name: `mean SN=${sn}`,
        type: "scatter",
        xAxisIndex: pi,
        yAxisIndex: pi,
        symbol: "rect",
        symbolSize: [14, 2.5],
        itemStyle: { color: "#000" },
        data: panel.groups.map((g, gi) => [gi, g.boxes[si].mean]),
        silent: true,
        z: 10,
      });
    });

    if (panel.groups.some((g) => g.oracle !== null)) {
      series.push({
        name: "oracle",
        type: "scatter",
        xAxisIndex: pi,
        yAxisIndex: pi,
        symbol: STAR_PATH,
        symbolSize: 12,
        itemStyle: { color: "#1f4fd8" },
        data: panel.groups
          .filter((g) => g.oracle !== null)
          .map((g) => [`x${g.feature}`, g.oracle]),
        z: 12,
      });
    }
  });

  return {
    title: titles,
    grid: grids,
    xAxis: xAxes,
    yAxis: yAxes,
    series,
    legend: { show: true, bottom: 0, data: spec.snLevels.map((sn) => `SN=${sn}`) },
    animation: false,
  };
}

export function renderSvg(spec: PlotSpec, width = 900, height?: number): string {
  const h = height ?? 140 + 260 * spec.panels.length;
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width,
    height: h,
  });
  try {
    chart.setOption(buildChartOption(spec));
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}
