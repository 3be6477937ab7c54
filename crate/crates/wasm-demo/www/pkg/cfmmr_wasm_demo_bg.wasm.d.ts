/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_frameview_free: (a: number, b: number) => void;
export const __wbg_idealview_free: (a: number, b: number) => void;
export const __wbg_runview_free: (a: number, b: number) => void;
export const frame_shape: (a: number) => [number, number, number];
export const frameview_arc: (a: number) => [number, number];
export const frameview_axles: (a: number) => [number, number];
export const frameview_psi: (a: number) => number;
export const ideal_path: (a: number, b: number, c: number, d: number) => number;
export const idealview_conforming: (a: number) => number;
export const idealview_manifold: (a: number) => [number, number];
export const idealview_path: (a: number) => [number, number];
export const runview_aborted: (a: number) => [number, number];
export const runview_center: (a: number) => [number, number];
export const runview_kappa: (a: number) => [number, number];
export const runview_odometry: (a: number) => [number, number];
export const runview_summary: (a: number) => [number, number];
export const runview_wheels: (a: number) => [number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
