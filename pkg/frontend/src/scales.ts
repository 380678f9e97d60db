/** Minimal linear / log10 axis scales with decade or stepped ticks. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  tickStep: number,
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const scale = ((value: number) => r0 + ((value - d0) / (d1 - d0)) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const ticks: number[] = [];
    const start = Math.ceil(d0 / tickStep) * tickStep;
    for (let t = start; t <= d1 + 1e-9; t += tickStep) ticks.push(Number(t.toFixed(9)));
    return ticks;
  };
  return scale;
}

export function log10Scale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale domain must be positive, got [${d0}, ${d1}]`);
  }
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const scale = ((value: number) =>
    r0 + ((Math.log10(value) - l0) / (l1 - l0)) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= l1 + 1e-9; e += 1) ticks.push(10 ** e);
    return ticks;
  };
  return scale;
}

/** Decade bounds that enclose all positive values, e.g. [0.37, 8e5] -> [0.1, 1e6]. */
export function decadeDomain(values: number[]): [number, number] {
  const positive = values.filter((v) => v > 0 && Number.isFinite(v));
  if (positive.length === 0) {
    throw new Error("no positive values for a log-scale domain");
  }
  const lo = 10 ** Math.floor(Math.log10(Math.min(...positive)));
  const hi = 10 ** Math.ceil(Math.log10(Math.max(...positive)) - 1e-12);
  return [lo, hi === lo ? lo * 10 : hi];
}
