/* tslint:disable */
/* eslint-disable */

/**
 * Frame bent to a commanded curvature, in the center's body frame.
 */
export class FrameView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Frame centerline from the rear axle to the front axle.
     */
    arc(): Float64Array;
    /**
     * `x, y, φ` of the front then the rear axle.
     */
    axles(): Float64Array;
    psi(): number;
}

/**
 * Kinematic layer alone around an ideal unicycle, with the path manifold
 * it steers onto.
 */
export class IdealView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Whether the start needed no escape maneuver.
     */
    conforming(): boolean;
    /**
     * Manifold points in the world frame, one branch per side of the
     * target, separated by a `NaN` pair.
     */
    manifold(): Float64Array;
    path(): Float64Array;
}

/**
 * Closed-loop run reduced to what the page draws.
 */
export class RunView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    aborted(): string | undefined;
    /**
     * True center path.
     */
    center(): Float64Array;
    /**
     * Interleaved `t, κ` command samples.
     */
    kappa(): Float64Array;
    /**
     * Odometric center path.
     */
    odometry(): Float64Array;
    /**
     * `[‖(Xt, Yt)‖, φt, DEV, t]` at the end of the run.
     */
    summary(): Float64Array;
    /**
     * Four wheel paths, concatenated: front right, front left, rear right,
     * rear left. Each has the same length as `center`.
     */
    wheels(): Float64Array;
}

/**
 * Frame shape for a center curvature.
 */
export function frame_shape(kappa: number): FrameView;

/**
 * Ideal-unicycle path from `(x, y, φ)` and the path manifold.
 */
export function ideal_path(x: number, y: number, phi: number, duration: number): IdealView;

/**
 * Run the full two-axle loop from `(x, y, φ)` toward the origin.
 */
export function simulate(_case: number, x: number, y: number, phi: number, duration: number, noise: boolean, disturbance: boolean, seed: number): RunView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_frameview_free: (a: number, b: number) => void;
    readonly __wbg_idealview_free: (a: number, b: number) => void;
    readonly __wbg_runview_free: (a: number, b: number) => void;
    readonly frame_shape: (a: number) => [number, number, number];
    readonly frameview_arc: (a: number) => [number, number];
    readonly frameview_axles: (a: number) => [number, number];
    readonly frameview_psi: (a: number) => number;
    readonly ideal_path: (a: number, b: number, c: number, d: number) => number;
    readonly idealview_conforming: (a: number) => number;
    readonly idealview_manifold: (a: number) => [number, number];
    readonly idealview_path: (a: number) => [number, number];
    readonly runview_aborted: (a: number) => [number, number];
    readonly runview_center: (a: number) => [number, number];
    readonly runview_kappa: (a: number) => [number, number];
    readonly runview_odometry: (a: number) => [number, number];
    readonly runview_summary: (a: number) => [number, number];
    readonly runview_wheels: (a: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
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
