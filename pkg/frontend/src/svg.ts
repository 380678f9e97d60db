/** Deterministic SVG assembly: pure string building, no DOM. */

const XMLNS = "http://www.w3.org/2000/svg";

export function fmt(value: number): string {
  // short, stable coordinate formatting
  const rounded = Number(value.toFixed(2));
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class SvgDocument {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 2): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polyline points="${path}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  circle(cx: number, cy: number, r: number, fill: string, stroke = "none"): void {
    this.add(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}" stroke="${stroke}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    options: { size?: number; anchor?: string; rotate?: boolean } = {},
  ): void {
    const size = options.size ?? 12;
    const anchor = options.anchor ?? "start";
    const transform = options.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" font-size="${size}" ` +
        `text-anchor="${anchor}"${transform}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="${XMLNS}" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}
