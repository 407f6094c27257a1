/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_sinkdesign_free: (a: number, b: number) => void;
export const optimizeHeatSink: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const sinkdesign_changes: (a: number) => [number, number];
export const sinkdesign_converged: (a: number) => number;
export const sinkdesign_objectives: (a: number) => [number, number];
export const sinkdesign_rho: (a: number) => [number, number];
export const transientEigenvalue: (a: number, b: number, c: number, d: number) => [number, number, number];
export const twoDomainObjective: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
