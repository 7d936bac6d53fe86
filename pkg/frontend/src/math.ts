/** Reference convergence exponent r = 1/(2p) - 1/4, always computed from
 * the CSV's own p column. */
export function referenceSlope(p: number): number {
  return 1 / (2 * p) - 0.25;
}

/** Riemann zeta for x > 1: partial sum plus Euler-Maclaurin tail,
 * accurate to ~1e-12; used only to reconstruct the field bounds
 * a_min/a_max = 1 -+ c*zeta(theta) for the legend. */
export function zeta(x: number): number {
  if (!(x > 1.001)) {
    throw new Error(`zeta exponent must exceed 1.001, got ${x}`);
  }
  const n = 128;
  let partial = 0;
  for (let k = n; k >= 1; k--) {
    partial += k ** -x;
  }
  let tail = n ** (1 - x) / (x - 1);
  tail -= 0.5 * n ** -x;
  tail += (x / 12) * n ** (-x - 1);
  tail -= ((x * (x + 1) * (x + 2)) / 720) * n ** (-x - 3);
  return partial + tail;
}

/** Least-squares slope of log(y) against log(x). */
export function logLogSlope(xs: number[], ys: number[]): number {
  if (xs.length < 2) {
    return NaN;
  }
  const lx = xs.map(Math.log);
  const ly = ys.map(Math.log);
  const mx = lx.reduce((a, b) => a + b, 0) / lx.length;
  const my = ly.reduce((a, b) => a + b, 0) / ly.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < lx.length; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) ** 2;
  }
  return num / den;
}
