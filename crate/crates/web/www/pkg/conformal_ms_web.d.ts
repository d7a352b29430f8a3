/* tslint:disable */
/* eslint-disable */

/**
 * A preset advanced step by step.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Takes `steps` steps; on failure the state stays at the last good step.
     */
    advance(steps: number): void;
    diagnostic_names(): string[];
    dt(): number;
    /**
     * Diagnostics of the most recent step, in [`Demo::diagnostic_names`] order.
     */
    latest(): Float64Array;
    /**
     * `n_nodes = 0` and `dt = 0` keep the preset values.
     */
    constructor(name: string, scheme: string, n_nodes: number, dt: number);
    steps(): number;
    /**
     * `|ψ|` for NLS presets, `u` for Camassa-Holm presets.
     */
    surface(): Float64Array;
    t(): number;
    /**
     * Largest magnitude of each diagnostic so far.
     */
    worst(): Float64Array;
    x(): Float64Array;
}

/**
 * Runs `preset` for `steps` steps under its exponential scheme and under
 * the baseline. Returns rows `[t, exponential, baseline]` of the headline
 * residual, flattened.
 */
export function compare_schemes(name: string, steps: number, n_nodes: number, dt: number): Float64Array;

/**
 * Samples `θ(t) = ∫₀ᵗ a` for `a(t) = offset + amplitude·sin(frequency·t)`
 * together with the step weights `w₊, w₋` of the step starting at each
 * sample. Returns rows `[t, θ, w₊, w₋]`, flattened.
 */
export function damping_weights(offset: number, amplitude: number, frequency: number, dt: number, samples: number): Float64Array;

/**
 * Names accepted by [`Demo::new`] and [`compare_schemes`].
 */
export function preset_names(): string[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly compare_schemes: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly damping_weights: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_advance: (a: number, b: number) => [number, number];
    readonly demo_diagnostic_names: (a: number) => [number, number];
    readonly demo_dt: (a: number) => number;
    readonly demo_latest: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_steps: (a: number) => number;
    readonly demo_surface: (a: number) => [number, number];
    readonly demo_t: (a: number) => number;
    readonly demo_worst: (a: number) => [number, number];
    readonly demo_x: (a: number) => [number, number];
    readonly preset_names: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
