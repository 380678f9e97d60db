import { MeasuredPoint, RatePoint } from "./csv";
import { decadeDomain, linearScale, log10Scale, Scale } from "./scales";
import { SvgDocument } from "./svg";

const WIDTH = 800;
const HEIGHT = 520;
const MARGIN = { left: 78, right: 24, top: 36, bottom: 56 };

const CURVE_COLOR = "#1f5fbf";
const MARKER_COLOR = "#c43333";

/** Largest fiber length whose simulated secure rate is still positive. */
export function terminationKm(rows: RatePoint[]): number | null {
  let last: number | null = null;
  for (const row of rows) {
    if (!row.insecure && row.secure_rate_hz > 0) last = row.length_km;
  }
  return last;
}

function frame(doc: SvgDocument, x: Scale, y: Scale, yLabel: string, yTickLabel: (t: number) => string) {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  doc.line(x0, y0, x1, y0, "black");
  doc.line(x0, y0, x0, y1, "black");
  for (const t of x.ticks()) {
    const px = x(t);
    doc.line(px, y0, px, y0 + 5, "black");
    doc.text(px, y0 + 20, String(t), { anchor: "middle" });
  }
  for (const t of y.ticks()) {
    const py = y(t);
    doc.line(x0 - 5, py, x0, py, "black");
    doc.line(x0, py, x1, py, "#dddddd");
    doc.text(x0 - 8, py + 4, yTickLabel(t), { anchor: "end" });
  }
  doc.text((x0 + x1) / 2, HEIGHT - 14, "fiber length (km)", { anchor: "middle", size: 14 });
  doc.text(22, (y0 + y1) / 2, yLabel, { anchor: "middle", size: 14, rotate: true });
}

function legend(doc: SvgDocument, curveLabel: string) {
  const lx = WIDTH - MARGIN.right - 240;
  const ly = MARGIN.top + 10;
  doc.line(lx, ly, lx + 28, ly, CURVE_COLOR, 2);
  doc.text(lx + 34, ly + 4, curveLabel);
  doc.circle(lx + 14, ly + 20, 4, "none", MARKER_COLOR);
  doc.text(lx + 34, ly + 24, "measured");
}

function xDomain(rows: RatePoint[], measured: MeasuredPoint[]): [number, number] {
  const lengths = rows.map((r) => r.length_km).concat(measured.map((m) => m.length_km));
  const hi = Math.max(50, Math.ceil(Math.max(...lengths) / 50) * 50);
  return [0, hi];
}

export function buildRatesSvg(rows: RatePoint[], measured: MeasuredPoint[]): string {
  const curve = rows.filter((r) => !r.insecure && r.secure_rate_hz > 0);
  const markers = measured.filter((m) => m.rate_hz !== null && m.rate_hz > 0);
  if (curve.length === 0) {
    throw new Error("no secure points to plot: every row is flagged insecure");
  }
  const doc = new SvgDocument(WIDTH, HEIGHT);
  const x = linearScale(xDomain(rows, measured), [MARGIN.left, WIDTH - MARGIN.right], 50);
  const y = log10Scale(
    decadeDomain(curve.map((r) => r.secure_rate_hz).concat(markers.map((m) => m.rate_hz as number))),
    [HEIGHT - MARGIN.bottom, MARGIN.top],
  );
  frame(doc, x, y, "secure key rate (bit/s)", (t) => t.toExponential(0));
  doc.text(WIDTH / 2, 22, "Secure key rate vs fiber length", { anchor: "middle", size: 16 });

  const points: Array<[number, number]> = curve.map((r) => [x(r.length_km), y(r.secure_rate_hz)]);
  if (points.length > 1) doc.polyline(points, CURVE_COLOR);
  for (const [px, py] of points) doc.circle(px, py, 1.5, CURVE_COLOR);
  for (const m of markers) doc.circle(x(m.length_km), y(m.rate_hz as number), 4, "none", MARKER_COLOR);
  legend(doc, "model (optimal mean photon number)");

  const end = terminationKm(rows);
  if (end !== null) {
    doc.text(x(end), y(curve[curve.length - 1].secure_rate_hz) - 10,
      `${end} km`, { anchor: "middle", size: 11 });
  }
  return doc.render();
}

export function buildQberSvg(rows: RatePoint[], measured: MeasuredPoint[]): string {
  const markers = measured.filter((m) => m.qber !== null);
  const doc = new SvgDocument(WIDTH, HEIGHT);
  const maxPct = Math.max(
    ...rows.map((r) => r.qber * 100),
    ...markers.map((m) => (m.qber as number) * 100),
  );
  const x = linearScale(xDomain(rows, measured), [MARGIN.left, WIDTH - MARGIN.right], 50);
  const y = linearScale([0, Math.max(1, Math.ceil(maxPct))], [HEIGHT - MARGIN.bottom, MARGIN.top], 1);
  frame(doc, x, y, "QBER (%)", (t) => String(t));
  doc.text(WIDTH / 2, 22, "Quantum bit error rate vs fiber length", { anchor: "middle", size: 16 });

  const points: Array<[number, number]> = rows.map((r) => [x(r.length_km), y(r.qber * 100)]);
  if (points.length > 1) doc.polyline(points, CURVE_COLOR);
  for (const [px, py] of points) doc.circle(px, py, 1.5, CURVE_COLOR);
  for (const m of markers) doc.circle(x(m.length_km), y((m.qber as number) * 100), 4, "none", MARKER_COLOR);
  legend(doc, "model");
  return doc.render();
}
