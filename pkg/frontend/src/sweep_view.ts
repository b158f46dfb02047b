// Interpolation sweep chart: towards/sim means against λ, drawn as a
// dependency-free inline SVG. Every plotted value is a service response
// field from /v1/sweep.

import { ApiClient, SweepRow } from "./api.js";
import { SessionState } from "./state.js";

const WIDTH = 420;
const HEIGHT = 220;
const PAD = 30;

function svgEl(tag: string): SVGElement {
  return document.createElementNS("http://www.w3.org/2000/svg", tag) as SVGElement;
}

export class SweepView {
  readonly root: HTMLElement;
  readonly runButton: HTMLButtonElement;
  readonly chart: SVGElement;
  readonly status: HTMLElement;
  lamGrid: number[] = [0, 0.25, 0.5, 0.75, 1.0];
  lastRows: SweepRow[] = [];

  constructor(
    readonly api: ApiClient,
    readonly state: SessionState,
    mount: HTMLElement,
  ) {
    this.root = document.createElement("section");
    this.root.className = "sweep-view";
    const heading = document.createElement("h2");
    heading.textContent = "Strength sweep";
    this.runButton = document.createElement("button");
    this.runButton.className = "run-sweep";
    this.runButton.textContent = "Sweep λ grid";
    this.runButton.addEventListener("click", () => void this.run());
    this.status = document.createElement("div");
    this.status.className = "sweep-status";
    this.chart = svgEl("svg");
    this.chart.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.chart.setAttribute("class", "sweep-chart");
    this.root.append(heading, this.runButton, this.status, this.chart);
    mount.append(this.root);
  }

  async run(): Promise<SweepRow[] | null> {
    try {
      const req: Parameters<ApiClient["sweep"]>[0] = {
        source_text: this.state.sourceText,
        lam_grid: this.lamGrid,
        seed: this.state.seed,
      };
      if (this.state.exemplarSetId !== null) {
        req.exemplar_set_id = this.state.exemplarSetId;
      } else {
        req.target_exemplars = [...this.state.pastedExemplars];
      }
      const rows = await this.api.sweep(req);
      this.lastRows = rows;
      this.render(rows);
      this.status.textContent = "";
      return rows;
    } catch (err) {
      this.status.textContent =
        err instanceof Error ? err.message : String(err);
      return null;
    }
  }

  render(rows: SweepRow[]): void {
    this.chart.replaceChildren();
    if (rows.length === 0) return;

    const x = (lam: number) => PAD + lam * (WIDTH - 2 * PAD);
    const y = (value: number) => HEIGHT - PAD - value * (HEIGHT - 2 * PAD);

    const axis = svgEl("path");
    axis.setAttribute(
      "d",
      `M ${PAD} ${PAD} L ${PAD} ${HEIGHT - PAD} L ${WIDTH - PAD} ${HEIGHT - PAD}`,
    );
    axis.setAttribute("class", "axis");
    axis.setAttribute("fill", "none");
    axis.setAttribute("stroke", "#888");
    this.chart.append(axis);

    const series: Array<[keyof SweepRow & ("sim" | "towards"), string]> = [
      ["towards", "#c0392b"],
      ["sim", "#2980b9"],
    ];
    for (const [field, color] of series) {
      const path = svgEl("path");
      const d = rows
        .map((row, i) =>
          `${i === 0 ? "M" : "L"} ${x(row.lam)} ${y(row[field])}`)
        .join(" ");
      path.setAttribute("d", d);
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", color);
      path.setAttribute("stroke-width", "2");
      path.setAttribute("class", `series series-${field}`);
      this.chart.append(path);
      for (const row of rows) {
        const dot = svgEl("circle");
        dot.setAttribute("cx", String(x(row.lam)));
        dot.setAttribute("cy", String(y(row[field])));
        dot.setAttribute("r", "3");
        dot.setAttribute("fill", color);
        dot.setAttribute("class", `point point-${field}`);
        dot.setAttribute("data-lam", String(row.lam));
        dot.setAttribute("data-value", String(row[field]));
        this.chart.append(dot);
      }
    }
  }
}
