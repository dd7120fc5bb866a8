/* tslint:disable */
/* eslint-disable */

export class FitDemo {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    error_h: number;
    error_l2: number;
    estimate: Float64Array;
    grid: Float64Array;
    lambda: number;
    target: Float64Array;
    x: Float64Array;
    y: Float64Array;
}

/**
 * Columns of [`rate_table`], one entry per sample size.
 */
export class RateTable {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    effective_dimension: Float64Array;
    lambda: Float64Array;
    n: Float64Array;
    /**
     * Theoretical rate in `||.||_H` (`s = 0`).
     */
    rate_h: Float64Array;
    /**
     * Theoretical rate in `L^2` (`s = 1/2`).
     */
    rate_l2: Float64Array;
}

/**
 * `t` on `[1e-4, 1]` and `|r_lambda(t)|` for each of [`FILTER_NAMES`], in
 * that order, flattened row by row.
 */
export class Residuals {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    t: Float64Array;
    values: Float64Array;
}

export function filterResiduals(lambda: number, points: number): Residuals;

export function fitDemo(b: number, p: number, r: number, sigma: number, n: number, lambda_scale: number, filter: string, seed: number): FitDemo;

export function rateTable(b: number, p: number, r: number, sigma: number, radius: number, n_max: number): RateTable;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fitdemo_free: (a: number, b: number) => void;
    readonly __wbg_get_fitdemo_error_h: (a: number) => number;
    readonly __wbg_get_fitdemo_error_l2: (a: number) => number;
    readonly __wbg_get_fitdemo_estimate: (a: number) => [number, number];
    readonly __wbg_get_fitdemo_grid: (a: number) => [number, number];
    readonly __wbg_get_fitdemo_lambda: (a: number) => number;
    readonly __wbg_get_fitdemo_target: (a: number) => [number, number];
    readonly __wbg_get_fitdemo_x: (a: number) => [number, number];
    readonly __wbg_get_fitdemo_y: (a: number) => [number, number];
    readonly __wbg_get_ratetable_effective_dimension: (a: number) => [number, number];
    readonly __wbg_get_ratetable_lambda: (a: number) => [number, number];
    readonly __wbg_get_ratetable_n: (a: number) => [number, number];
    readonly __wbg_get_ratetable_rate_h: (a: number) => [number, number];
    readonly __wbg_get_ratetable_rate_l2: (a: number) => [number, number];
    readonly __wbg_get_residuals_t: (a: number) => [number, number];
    readonly __wbg_get_residuals_values: (a: number) => [number, number];
    readonly __wbg_ratetable_free: (a: number, b: number) => void;
    readonly __wbg_residuals_free: (a: number, b: number) => void;
    readonly __wbg_set_fitdemo_error_h: (a: number, b: number) => void;
    readonly __wbg_set_fitdemo_error_l2: (a: number, b: number) => void;
    readonly __wbg_set_fitdemo_estimate: (a: number, b: number, c: number) => void;
    readonly __wbg_set_fitdemo_grid: (a: number, b: number, c: number) => void;
    readonly __wbg_set_fitdemo_lambda: (a: number, b: number) => void;
    readonly __wbg_set_fitdemo_target: (a: number, b: number, c: number) => void;
    readonly __wbg_set_fitdemo_x: (a: number, b: number, c: number) => void;
    readonly __wbg_set_fitdemo_y: (a: number, b: number, c: number) => void;
    readonly __wbg_set_ratetable_effective_dimension: (a: number, b: number, c: number) => void;
    readonly __wbg_set_ratetable_lambda: (a: number, b: number, c: number) => void;
    readonly __wbg_set_ratetable_n: (a: number, b: number, c: number) => void;
    readonly __wbg_set_ratetable_rate_h: (a: number, b: number, c: number) => void;
    readonly __wbg_set_ratetable_rate_l2: (a: number, b: number, c: number) => void;
    readonly __wbg_set_residuals_t: (a: number, b: number, c: number) => void;
    readonly __wbg_set_residuals_values: (a: number, b: number, c: number) => void;
    readonly filterResiduals: (a: number, b: number) => [number, number, number];
    readonly fitDemo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly rateTable: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
