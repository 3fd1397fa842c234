/** CLI: plot-regret <traces...> --out plot.svg | fit-slope <trace> [--t-min N] */

import { readFileSync, writeFileSync } from "node:fs";
import { parseTrace } from "./trace.js";
import { fitSlope } from "./slope.js";
import { renderRegretPlot } from "./plot.js";

function fail(message: string): never {
    process.stderr.write(message + "\n");
    process.exit(1);
}

function takeOption(args: string[], name: string): string | undefined {
    const index = args.indexOf(name);
    if (index < 0) return undefined;
    const value = args[index + 1];
    if (value === undefined) fail(`${name} needs a value`);
    args.splice(index, 2);
    return value;
}

export function main(argv: string[]): void {
    const args = [...argv];
    const command = args.shift();
    if (command === "plot-regret") {
        const out = takeOption(args, "--out") ?? "regret.svg";
        const title = takeOption(args, "--title");
        if (args.length === 0) fail("plot-regret needs at least one trace CSV");
        const frames = args.map((p) => parseTrace(readFileSync(p, "utf8")));
        writeFileSync(out, renderRegretPlot(frames, { title }));
        process.stdout.write(`wrote ${out} (${frames.length} seed${frames.length > 1 ? "s" : ""})\n`);
    } else if (command === "fit-slope") {
        const tMinRaw = takeOption(args, "--t-min");
        if (args.length !== 1) fail("fit-slope needs exactly one trace CSV");
        const frame = parseTrace(readFileSync(args[0], "utf8"));
        const tMin = tMinRaw ? Number(tMinRaw) : frame.t.length / 10;
        const slope = fitSlope(frame.t, frame.cumRegret, tMin);
        process.stdout.write(`slope ${slope.toFixed(6)} (t >= ${tMin})\n`);
    } else {
        fail("usage: infoacq-analysis plot-regret <traces...> [--out f.svg] | fit-slope <trace> [--t-min N]");
    }
}

main(process.argv.slice(2));
