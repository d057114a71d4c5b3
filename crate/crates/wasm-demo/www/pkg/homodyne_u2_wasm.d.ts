/* tslint:disable */
/* eslint-disable */

/**
 * `N² Tr[F⁻¹]` on a log grid of `points` photon numbers between `n_min` and
 * `n_max`: `[plateau, N, value, N, value, …]`. Singular `k` is an error
 * naming the locus.
 */
export function fisher_curve(k1: number, k2: number, k3: number, beta: number, n_min: number, n_max: number, points: number): Float64Array;

/**
 * Output statistics and `samples` simulated outcomes at the tuned
 * operating point: `[μ1, μ2, Σ11, Σ12, Σ22, x1, x2, x1, x2, …]`.
 */
export function output_cloud(phi0: number, phi1: number, phi2: number, phi3: number, k1: number, k2: number, n_total: number, beta: number, samples: number, seed: number): Float64Array;

/**
 * Smallest eigenvalue of the leading-order coefficient matrix on a
 * `resolution × resolution` grid over `(k1, k2) ∈ [−span, span]²`, row-major
 * with `k2` varying fastest.
 */
export function singularity_map(k3: number, beta: number, span: number, resolution: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fisher_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly output_cloud: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number, number];
    readonly singularity_map: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
