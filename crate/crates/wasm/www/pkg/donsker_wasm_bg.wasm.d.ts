/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const coupled_paths: (a: number, b: number) => [number, number, number, number];
export const empirical_vs_bridge: (a: number, b: number) => [number, number, number, number];
export const flipped_walk: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
