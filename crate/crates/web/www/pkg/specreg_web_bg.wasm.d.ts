/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fitdemo_free: (a: number, b: number) => void;
export const __wbg_get_fitdemo_error_h: (a: number) => number;
export const __wbg_get_fitdemo_error_l2: (a: number) => number;
export const __wbg_get_fitdemo_estimate: (a: number) => [number, number];
export const __wbg_get_fitdemo_grid: (a: number) => [number, number];
export const __wbg_get_fitdemo_lambda: (a: number) => number;
export const __wbg_get_fitdemo_target: (a: number) => [number, number];
export const __wbg_get_fitdemo_x: (a: number) => [number, number];
export const __wbg_get_fitdemo_y: (a: number) => [number, number];
export const __wbg_get_ratetable_effective_dimension: (a: number) => [number, number];
export const __wbg_get_ratetable_lambda: (a: number) => [number, number];
export const __wbg_get_ratetable_n: (a: number) => [number, number];
export const __wbg_get_ratetable_rate_h: (a: number) => [number, number];
export const __wbg_get_ratetable_rate_l2: (a: number) => [number, number];
export const __wbg_get_residuals_t: (a: number) => [number, number];
export const __wbg_get_residuals_values: (a: number) => [number, number];
export const __wbg_ratetable_free: (a: number, b: number) => void;
export const __wbg_residuals_free: (a: number, b: number) => void;
export const __wbg_set_fitdemo_error_h: (a: number, b: number) => void;
export const __wbg_set_fitdemo_error_l2: (a: number, b: number) => void;
export const __wbg_set_fitdemo_estimate: (a: number, b: number, c: number) => void;
export const __wbg_set_fitdemo_grid: (a: number, b: number, c: number) => void;
export const __wbg_set_fitdemo_lambda: (a: number, b: number) => void;
export const __wbg_set_fitdemo_target: (a: number, b: number, c: number) => void;
export const __wbg_set_fitdemo_x: (a: number, b: number, c: number) => void;
export const __wbg_set_fitdemo_y: (a: number, b: number, c: number) => void;
export const __wbg_set_ratetable_effective_dimension: (a: number, b: number, c: number) => void;
export const __wbg_set_ratetable_lambda: (a: number, b: number, c: number) => void;
export const __wbg_set_ratetable_n: (a: number, b: number, c: number) => void;
export const __wbg_set_ratetable_rate_h: (a: number, b: number, c: number) => void;
export const __wbg_set_ratetable_rate_l2: (a: number, b: number, c: number) => void;
export const __wbg_set_residuals_t: (a: number, b: number, c: number) => void;
export const __wbg_set_residuals_values: (a: number, b: number, c: number) => void;
export const filterResiduals: (a: number, b: number) => [number, number, number];
export const fitDemo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const rateTable: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
