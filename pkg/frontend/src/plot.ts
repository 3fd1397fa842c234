/** SVG rendering of multi-seed regret curves on log-log axes. */

import type { TraceFrame } from "./trace.js";

export interface PlotOptions {
    width?: number;
    height?: number;
    title?: string;
    referenceExponent?: number; // slope of the dashed reference line
}

const MARGIN = { left: 64, right: 16, top: 28, bottom: 44 };

function niceLogTicks(lo: number, hi: number): number[] {
    const ticks: number[] = [];
    for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
        const value = 10 ** e;
        if (value >= lo * 0.999 && value <= hi * 1.001) ticks.push(value);
    }
    return ticks.length >= 2 ? ticks : [lo, hi];
}

function path(points: Array<[number, number]>): string {
    return points
        .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
        .join(" ");
}

/**
 * Render cumulative-regret curves for one or more seeds: the cross-seed mean,
 * a min/max envelope band, and a dashed reference power-law line anchored at
 * the mean curve's final point.
 */
export function renderRegretPlot(frames: TraceFrame[], options: PlotOptions = {}): string {
    if (frames.length === 0) {
        throw new Error("need at least one trace");
    }
    const width = options.width ?? 720;
    const height = options.height ?? 480;
    const exponent = options.referenceExponent ?? 2 / 3;
    const horizon = Math.min(...frames.map((f) => f.t.length));

    // sample on a log-spaced grid, skipping the noisy first few rounds
    const tLo = Math.max(10, Math.ceil(horizon / 10000));
    const grid: number[] = [];
    for (let i = 0; i < 300; i++) {
        const t = Math.round(tLo * (horizon / tLo) ** (i / 299));
        if (grid.length === 0 || t > grid[grid.length - 1]) grid.push(t);
    }
    const mean: number[] = [];
    const lo: number[] = [];
    const hi: number[] = [];
    for (const t of grid) {
        const values = frames.map((f) => f.cumRegret[t - 1]);
        mean.push(values.reduce((a, b) => a + b, 0) / values.length);
        lo.push(Math.min(...values));
        hi.push(Math.max(...values));
    }

    const positives = mean.filter((v) => v > 0);
    const yLo = Math.max(1e-3, Math.min(...positives) * 0.5);
    const yHi = Math.max(...hi) * 1.2;
    const x = (t: number) =>
        MARGIN.left +
        ((Math.log(t) - Math.log(tLo)) / (Math.log(horizon) - Math.log(tLo))) *
            (width - MARGIN.left - MARGIN.right);
    const y = (v: number) =>
        height -
        MARGIN.bottom -
        ((Math.log(Math.max(v, yLo)) - Math.log(yLo)) / (Math.log(yHi) - Math.log(yLo))) *
            (height - MARGIN.top - MARGIN.bottom);

    const anchorT = grid[grid.length - 1];
    const anchorR = Math.max(mean[mean.length - 1], yLo);
    const reference = grid.map(
        (t) => [x(t), y(anchorR * (t / anchorT) ** exponent)] as [number, number],
    );
    const band =
        path(grid.map((t, i) => [x(t), y(hi[i])] as [number, number])) +
        " " +
        path(grid.map((t, i) => [x(t), y(lo[i])] as [number, number]).reverse()).replace(
            /^M/,
            "L",
        ) +
        " Z";

    const parts: string[] = [];
    parts.push(
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    );
    parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
    if (options.title) {
        parts.push(
            `<text x="${width / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">${options.title}</text>`,
        );
    }
    for (const tick of niceLogTicks(tLo, horizon)) {
        const px = x(tick);
        parts.push(
            `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${height - MARGIN.bottom}" stroke="#ddd"/>`,
            `<text x="${px}" y="${height - MARGIN.bottom + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">${tick}</text>`,
        );
    }
    for (const tick of niceLogTicks(yLo, yHi)) {
        const py = y(tick);
        parts.push(
            `<line x1="${MARGIN.left}" y1="${py}" x2="${width - MARGIN.right}" y2="${py}" stroke="#ddd"/>`,
            `<text x="${MARGIN.left - 6}" y="${py + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${tick}</text>`,
        );
    }
    parts.push(`<path d="${band}" fill="#9ecae1" fill-opacity="0.35" stroke="none"/>`);
    if (frames.length > 1) {
        for (const frame of frames) {
            const curve = grid.map(
                (t) => [x(t), y(frame.cumRegret[t - 1])] as [number, number],
            );
            parts.push(
                `<path d="${path(curve)}" fill="none" stroke="#6baed6" stroke-width="0.8" stroke-opacity="0.7"/>`,
            );
        }
    }
    parts.push(
        `<path d="${path(grid.map((t, i) => [x(t), y(mean[i])] as [number, number]))}" fill="none" stroke="#08519c" stroke-width="2"/>`,
    );
    parts.push(
        `<path d="${path(reference)}" fill="none" stroke="#d94801" stroke-width="1.5" stroke-dasharray="6 4"/>`,
    );
    parts.push(
        `<text x="${width - MARGIN.right}" y="${MARGIN.top + 12}" text-anchor="end" font-family="sans-serif" font-size="11" fill="#d94801">reference t^${exponent.toFixed(2)}</text>`,
        `<text x="${width / 2}" y="${height - 8}" text-anchor="middle" font-family="sans-serif" font-size="12">round t</text>`,
        `<text x="14" y="${height / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 ${height / 2})">cumulative regret</text>`,
    );
    parts.push("</svg>");
    return parts.join("\n");
}
