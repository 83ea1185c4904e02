/* tslint:disable */
/* eslint-disable */

/**
 * RGBA pixels (row 0 at the top) of a sampled `p_n` phase portrait.
 */
export function charpoly_portrait(family: string, n: number, seed: bigint, grid: number): Uint8Array;

/**
 * RGBA pixels of a limit-field phase portrait.
 */
export function limit_portrait(family: string, seed: bigint, grid: number): Uint8Array;

/**
 * JSON `{family, z, limit, values}` with `values[n-1] = E|p_n(z)|^2`.
 */
export function second_moment_curve(family: string, re: number, im: number, n_max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly charpoly_portrait: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
    readonly limit_portrait: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
    readonly second_moment_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
