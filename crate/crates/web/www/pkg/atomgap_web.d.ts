/* tslint:disable */
/* eslint-disable */

/**
 * Two-level σ+ dispersion along Γ → M′ → R′ → Γ. Returns `[s0, ω0, s1, ω1, ...]`
 * with NaN energies at masked points.
 */
export function dispersion(spacing: number, a_ho_over_spacing: number, points_per_segment: number): Float64Array;

/**
 * Lower and upper branches of the toy photon-atom hybridization on a grid
 * of `points` wavenumbers in `(0, k_max]`, as `[k, lower, upper, ...]`.
 */
export function toy_bands(g1: number, omega0: number, k_max: number, points: number): Float64Array;

/**
 * Yukawa interaction `C e^{-r κ √Δ} / r` (r in units of a) for each entry of
 * `detunings`.
 */
export function yukawa_curve(r: number, kappa: number, coupling: number, detunings: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dispersion: (a: number, b: number, c: number) => [number, number, number, number];
    readonly toy_bands: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly yukawa_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
