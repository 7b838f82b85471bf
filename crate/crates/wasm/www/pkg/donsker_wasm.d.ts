/* tslint:disable */
/* eslint-disable */

/**
 * `{"walk", "correction", "bridge", "sign"}` for a walk of length `n`.
 */
export function coupled_paths(n: number, seed: number): string;

/**
 * `{"empirical", "bridge", "sup_empirical", "sup_bridge"}`: one `b_n` and
 * one reference bridge, both as `{"m", "values"}` grids.
 */
export function empirical_vs_bridge(n: number, seed: number): string;

/**
 * `{"walk", "bridge", "flipped"}`: positions of a simple walk of even length
 * `two_n`, of its flipped bridge, and the flipped step indices.
 */
export function flipped_walk(two_n: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coupled_paths: (a: number, b: number) => [number, number, number, number];
    readonly empirical_vs_bridge: (a: number, b: number) => [number, number, number, number];
    readonly flipped_walk: (a: number, b: number) => [number, number, number, number];
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
