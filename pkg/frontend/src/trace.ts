/** Parsing for the experiment harness's per-round trace CSV files. */

export const SCHEMA_VERSION = 1;
export const COLUMNS = [
    "t",
    "k_star",
    "k_t",
    "alpha",
    "profit",
    "cum_regret",
    "mode",
    "essential",
] as const;

export interface TraceMeta {
    schema: number;
    seed: number;
    instance: string;
    h_star: number;
    config?: Record<string, unknown>;
}

export interface TraceFrame {
    meta: TraceMeta;
    t: Float64Array;
    kStar: Float64Array;
    kT: Float64Array;
    alpha: Float64Array;
    profit: Float64Array;
    cumRegret: Float64Array;
    mode: Float64Array;
    essential: Float64Array;
}

export class SchemaError extends Error {}

const HEADER_PREFIX = "# infoacq-trace ";

export function parseTrace(text: string): TraceFrame {
    const lines = text.split("\n").filter((line) => line.length > 0);
    if (lines.length < 2 || !lines[0].startsWith(HEADER_PREFIX)) {
        throw new SchemaError("missing trace header line");
    }
    const meta = JSON.parse(lines[0].slice(HEADER_PREFIX.length)) as TraceMeta;
    if (meta.schema !== SCHEMA_VERSION) {
        throw new SchemaError(`unsupported schema version ${meta.schema}`);
    }
    const header = lines[1].split(",");
    if (header.length !== COLUMNS.length || !COLUMNS.every((c, i) => header[i] === c)) {
        throw new SchemaError(`unexpected columns: ${lines[1]}`);
    }
    const rows = lines.length - 2;
    const cols = COLUMNS.map(() => new Float64Array(rows));
    for (let r = 0; r < rows; r++) {
        const parts = lines[r + 2].split(",");
        if (parts.length !== COLUMNS.length) {
            throw new SchemaError(`row ${r + 1} has ${parts.length} fields`);
        }
        for (let c = 0; c < COLUMNS.length; c++) {
            const value = Number(parts[c]);
            if (!Number.isFinite(value)) {
                throw new SchemaError(`row ${r + 1}, column ${COLUMNS[c]}: ${parts[c]}`);
            }
            cols[c][r] = value;
        }
    }
    return {
        meta,
        t: cols[0],
        kStar: cols[1],
        kT: cols[2],
        alpha: cols[3],
        profit: cols[4],
        cumRegret: cols[5],
        mode: cols[6],
        essential: cols[7],
    };
}
