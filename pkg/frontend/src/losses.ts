/** Training objective: distance-weighted BCE plus a Hausdorff surrogate.
 *
 * Every loss exists twice: a float64 scalar form (the reference semantics,
 * used for metrics and oracles) and a tfjs form with the same math in
 * float32 (used inside the training gradient). The two agree to float32
 * rounding; tests pin that bound.
 */

import * as tf from '@tensorflow/tfjs';
import type { Dims } from './formats.js';
import { flooredDistanceTransform, squaredDistanceTransform } from './edt.js';

export const CLAMP = 1e-6;
const SOFTMIN_TAU = 1.0;
const SOFTMIN_EPS = 1e-12;
/** term2 of the surrogate averages over at most this many label voxels. */
export const GT_SUBSET_CAP = 64;

export interface LossParams {
  lambdaW: number;
  alpha1: number;
  alpha2: number;
}

export const DEFAULT_LOSS_PARAMS: LossParams = { lambdaW: 10, alpha1: 1.0, alpha2: 0.1 };

export function checkLossParams(p: LossParams) {
  if (!(p.lambdaW >= 0) || !(p.alpha1 >= 0) || !(p.alpha2 >= 0)) {
    throw new Error(`loss params must be nonnegative, got ${JSON.stringify(p)}`);
  }
}

/** Per-sample constants derived from the label once, reused every step. */
export interface SampleAux {
  dims: Dims;
  /** floored EDT to the label mask, for the BCE weights */
  weightDist: Float64Array;
  /** unfloored EDT to the label mask, for surrogate term 1 */
  gtDist: Float64Array;
  /** [gtCount * n] distances from each kept label voxel to every voxel */
  pairDist: Float32Array;
  gtCount: number;
  labelCount: number;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function buildSampleAux(label: Uint8Array, dims: Dims, seed = 0): SampleAux {
  const [nx, ny] = dims;
  const n = label.length;
  const labelIdx: number[] = [];
  for (let i = 0; i < n; i++) {
    if (label[i]) labelIdx.push(i);
  }
  if (labelIdx.length === 0) {
    throw new Error('label mask is empty');
  }
  // Seeded subset keeps the surrogate's memory linear in grid size.
  const rand = mulberry32(seed ^ 0x9e3779b9);
  const kept = labelIdx.slice();
  for (let i = kept.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [kept[i], kept[j]] = [kept[j], kept[i]];
  }
  kept.length = Math.min(kept.length, GT_SUBSET_CAP);
  kept.sort((a, b) => a - b);

  const pairDist = new Float32Array(kept.length * n);
  for (let g = 0; g < kept.length; g++) {
    const gi = kept[g];
    const gx = gi % nx;
    const gy = Math.floor(gi / nx) % ny;
    const gz = Math.floor(gi / (nx * ny));
    for (let i = 0; i < n; i++) {
      const dx = (i % nx) - gx;
      const dy = (Math.floor(i / nx) % ny) - gy;
      const dz = Math.floor(i / (nx * ny)) - gz;
      pairDist[g * n + i] = Math.sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  const sq = squaredDistanceTransform(label, dims);
  const gtDist = new Float64Array(n);
  for (let i = 0; i < n; i++) gtDist[i] = Math.sqrt(sq[i]);
  return {
    dims,
    weightDist: flooredDistanceTransform(label, dims),
    gtDist,
    pairDist,
    gtCount: kept.length,
    labelCount: labelIdx.length,
  };
}

const clamp = (p: number) => Math.min(1 - CLAMP, Math.max(CLAMP, p));

/** Distance-weighted binary cross-entropy, summed over voxels (float64). */
export function lossPathValue(
  pred: ArrayLike<number>,
  gt: ArrayLike<number>,
  weightDist: ArrayLike<number>,
  lambdaW: number,
): number {
  if (pred.length !== gt.length || pred.length !== weightDist.length) {
    throw new Error(
      `shape mismatch: pred ${pred.length}, gt ${gt.length}, dist ${weightDist.length}`,
    );
  }
  let total = 0;
  for (let i = 0; i < pred.length; i++) {
    const p = clamp(pred[i]);
    const w = 1 + lambdaW / weightDist[i];
    total -= w * (gt[i] * Math.log(p) + (1 - gt[i]) * Math.log(1 - p));
  }
  return total;
}

/** Shape-similarity surrogate (float64): predicted mass should sit near the
 * label, and every label voxel should have predicted mass nearby. */
export function lossHausSurrogateValue(pred: ArrayLike<number>, aux: SampleAux): number {
  const n = pred.length;
  if (n !== aux.gtDist.length) {
    throw new Error(`shape mismatch: pred ${n}, aux ${aux.gtDist.length}`);
  }
  let mass = 0;
  let weighted = 0;
  for (let i = 0; i < n; i++) {
    const p = clamp(pred[i]);
    mass += p;
    weighted += p * aux.gtDist[i];
  }
  const term1 = weighted / mass;
  let term2 = 0;
  for (let g = 0; g < aux.gtCount; g++) {
    let acc = 0;
    for (let i = 0; i < n; i++) {
      acc += clamp(pred[i]) * Math.exp(-aux.pairDist[g * n + i] / SOFTMIN_TAU);
    }
    term2 -= SOFTMIN_TAU * Math.log(acc + SOFTMIN_EPS);
  }
  return term1 + term2 / aux.gtCount;
}

export function lossTotalValue(
  pred: ArrayLike<number>,
  gt: ArrayLike<number>,
  aux: SampleAux,
  params: LossParams,
): number {
  checkLossParams(params);
  return (
    params.alpha1 * lossPathValue(pred, gt, aux.weightDist, params.lambdaW) +
    params.alpha2 * lossHausSurrogateValue(pred, aux)
  );
}

/* ------------------------- tf (training) forms ------------------------- */

const clampTf = (p: tf.Tensor) => tf.clipByValue(p, CLAMP, 1 - CLAMP);

export interface SampleAuxTensors {
  gt: tf.Tensor1D;
  weights: tf.Tensor1D;
  gtDist: tf.Tensor1D;
  pairDist: tf.Tensor2D;
}

export function auxToTensors(
  label: Uint8Array,
  aux: SampleAux,
  lambdaW: number,
): SampleAuxTensors {
  const n = label.length;
  const w = new Float32Array(n);
  for (let i = 0; i < n; i++) w[i] = 1 + lambdaW / aux.weightDist[i];
  return {
    gt: tf.tensor1d(Float32Array.from(label)),
    weights: tf.tensor1d(w),
    gtDist: tf.tensor1d(Float32Array.from(aux.gtDist)),
    pairDist: tf.tensor2d(aux.pairDist, [aux.gtCount, n]),
  };
}

export function lossPathTf(pred: tf.Tensor1D, t: SampleAuxTensors): tf.Scalar {
  return tf.tidy(() => {
    const p = clampTf(pred);
    const ce = tf.add(
      tf.mul(t.gt, tf.log(p)),
      tf.mul(tf.sub(1, t.gt), tf.log(tf.sub(1, p))),
    );
    return tf.neg(tf.sum(tf.mul(t.weights, ce))) as tf.Scalar;
  });
}

export function lossHausSurrogateTf(pred: tf.Tensor1D, t: SampleAuxTensors): tf.Scalar {
  return tf.tidy(() => {
    const p = clampTf(pred);
    const term1 = tf.div(tf.sum(tf.mul(p, t.gtDist)), tf.sum(p));
    const kernel = tf.exp(tf.neg(tf.div(t.pairDist, SOFTMIN_TAU)));
    const perGt = tf.matMul(kernel, p.reshape([-1, 1])).reshape([-1]);
    const term2 = tf.mean(
      tf.mul(-SOFTMIN_TAU, tf.log(tf.add(perGt, SOFTMIN_EPS))),
    );
    return tf.add(term1, term2) as tf.Scalar;
  });
}

export function lossTotalTf(
  pred: tf.Tensor1D,
  t: SampleAuxTensors,
  params: LossParams,
): tf.Scalar {
  checkLossParams(params);
  return tf.tidy(
    () =>
      tf.add(
        tf.mul(params.alpha1, lossPathTf(pred, t)),
        tf.mul(params.alpha2, lossHausSurrogateTf(pred, t)),
      ) as tf.Scalar,
  );
}

/* ------------------------------ evaluation ------------------------------ */

/** Exact symmetric Hausdorff distance between the thresholded prediction and
 * the label, on voxel-center point sets; null when either set is empty. */
export function exactHausdorff(
  pred: ArrayLike<number>,
  label: Uint8Array,
  dims: Dims,
  threshold = 0.5,
): number | null {
  const [nx, ny] = dims;
  const a: number[][] = [];
  const b: number[][] = [];
  for (let i = 0; i < pred.length; i++) {
    const coord = [i % nx, Math.floor(i / nx) % ny, Math.floor(i / (nx * ny))];
    if (pred[i] >= threshold) a.push(coord);
    if (label[i]) b.push(coord);
  }
  if (a.length === 0 || b.length === 0) return null;
  const directed = (src: number[][], dst: number[][]) => {
    let worst = 0;
    for (const s of src) {
      let best = Infinity;
      for (const d of dst) {
        const dx = s[0] - d[0];
        const dy = s[1] - d[1];
        const dz = s[2] - d[2];
        const v = dx * dx + dy * dy + dz * dz;
        if (v < best) best = v;
      }
      if (best > worst) worst = best;
    }
    return worst;
  };
  return Math.sqrt(Math.max(directed(a, b), directed(b, a)));
}
