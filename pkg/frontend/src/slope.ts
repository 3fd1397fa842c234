/** Log-log slope fitting for cumulative-regret curves. */

export class FitError extends Error {}

/**
 * Least-squares slope of log(reg) against log(t) over rounds with t >= tMin.
 * Only positive-regret points enter the fit; at least 20 are required.
 */
export function fitSlope(t: ArrayLike<number>, reg: ArrayLike<number>, tMin: number): number {
    if (t.length !== reg.length) {
        throw new FitError("t and reg must have the same length");
    }
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i < t.length; i++) {
        if (t[i] >= tMin && reg[i] > 0) {
            xs.push(Math.log(t[i]));
            ys.push(Math.log(reg[i]));
        }
    }
    if (xs.length < 20) {
        throw new FitError(`need at least 20 positive-regret points, got ${xs.length}`);
    }
    const n = xs.length;
    const xMean = xs.reduce((a, b) => a + b, 0) / n;
    const yMean = ys.reduce((a, b) => a + b, 0) / n;
    let sxy = 0;
    let sxx = 0;
    for (let i = 0; i < n; i++) {
        const dx = xs[i] - xMean;
        sxy += dx * (ys[i] - yMean);
        sxx += dx * dx;
    }
    if (sxx === 0) {
        throw new FitError("degenerate fit window");
    }
    return sxy / sxx;
}
