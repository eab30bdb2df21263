/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_aecview_free: (a: number, b: number) => void;
export const __wbg_coherenceview_free: (a: number, b: number) => void;
export const aecTraces: (a: number, b: number, c: number, d: number) => [number, number, number];
export const aecview_baseline_db: (a: number) => [number, number];
export const aecview_block_secs: (a: number) => number;
export const aecview_decorrelated_db: (a: number) => [number, number];
export const coherenceview_bark_weighted: (a: number) => number;
export const coherenceview_freqs_hz: (a: number) => [number, number];
export const coherenceview_gamma_sq: (a: number) => [number, number];
export const coherenceview_snr_db: (a: number) => [number, number];
export const phaseDeviation: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const presetCoherence: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
