/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const compare_schemes: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const damping_weights: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const demo_advance: (a: number, b: number) => [number, number];
export const demo_diagnostic_names: (a: number) => [number, number];
export const demo_dt: (a: number) => number;
export const demo_latest: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_steps: (a: number) => number;
export const demo_surface: (a: number) => [number, number];
export const demo_t: (a: number) => number;
export const demo_worst: (a: number) => [number, number];
export const demo_x: (a: number) => [number, number];
export const preset_names: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
