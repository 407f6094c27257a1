/* tslint:disable */
/* eslint-disable */

/**
 * Result of a heat-sink optimization run.
 */
export class SinkDesign {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Design change per iteration.
     */
    readonly changes: Float64Array;
    readonly converged: boolean;
    /**
     * Objective per iteration, then the final objective.
     */
    readonly objectives: Float64Array;
    /**
     * Element densities from x = 0 to x = 1.
     */
    readonly rho: Float64Array;
}

export function optimizeHeatSink(elements: number, degree_t: number, p: number, volume: number, max_iters: number): SinkDesign;

/**
 * Decay rate of the slowest transient mode of the two-subdomain problem
 * (`branch = 0`) or of higher modes.
 */
export function transientEigenvalue(kappa1: number, kappa2: number, xi: number, branch: number): number;

/**
 * `[J_discrete, J_modal]` for the two-subdomain problem.
 */
export function twoDomainObjective(kappa1: number, degree: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_sinkdesign_free: (a: number, b: number) => void;
    readonly optimizeHeatSink: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly sinkdesign_changes: (a: number) => [number, number];
    readonly sinkdesign_converged: (a: number) => number;
    readonly sinkdesign_objectives: (a: number) => [number, number];
    readonly sinkdesign_rho: (a: number) => [number, number];
    readonly transientEigenvalue: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly twoDomainObjective: (a: number, b: number) => [number, number, number, number];
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
