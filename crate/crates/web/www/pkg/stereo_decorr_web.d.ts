/* tslint:disable */
/* eslint-disable */

export class AecView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly baseline_db: Float64Array;
    readonly block_secs: number;
    /**
     * Empty when no preset was applied.
     */
    readonly decorrelated_db: Float64Array;
}

export class CoherenceView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly bark_weighted: number;
    readonly freqs_hz: Float64Array;
    readonly gamma_sq: Float64Array;
    readonly snr_db: Float64Array;
}

export function aecTraces(preset: string, seconds: number, seed: number): AecView;

export function phaseDeviation(alpha: number, beta: number, order: number, n_points: number): Float64Array;

export function presetCoherence(preset: string, seconds: number, seed: number): CoherenceView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_aecview_free: (a: number, b: number) => void;
    readonly __wbg_coherenceview_free: (a: number, b: number) => void;
    readonly aecTraces: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly aecview_baseline_db: (a: number) => [number, number];
    readonly aecview_block_secs: (a: number) => number;
    readonly aecview_decorrelated_db: (a: number) => [number, number];
    readonly coherenceview_bark_weighted: (a: number) => number;
    readonly coherenceview_freqs_hz: (a: number) => [number, number];
    readonly coherenceview_gamma_sq: (a: number) => [number, number];
    readonly coherenceview_snr_db: (a: number) => [number, number];
    readonly phaseDeviation: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly presetCoherence: (a: number, b: number, c: number, d: number) => [number, number, number];
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
