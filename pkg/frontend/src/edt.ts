/** Exact Euclidean distance transform on a voxel grid.
 *
 * Felzenszwalb-Huttenlocher lower-envelope scan per axis: three 1D passes
 * over squared distances give the exact 3D squared EDT, independent of axis
 * order. Distances are measured between voxel centers in voxel units.
 */

import type { Dims } from './formats.js';

const INF = 1e20;

/** 1D squared-distance transform of f, written into out (both length n). */
function dt1d(f: Float64Array, n: number, out: Float64Array, v: Int32Array, z: Float64Array) {
  let k = 0;
  v[0] = 0;
  z[0] = -INF;
  z[1] = INF;
  for (let q = 1; q < n; q++) {
    let s = (f[q] + q * q - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k]);
    while (s <= z[k]) {
      k--;
      s = (f[q] + q * q - (f[v[k]] + v[k] * v[k])) / (2 * q - 2 * v[k]);
    }
    k++;
    v[k] = q;
    z[k] = s;
    z[k + 1] = INF;
  }
  k = 0;
  for (let q = 0; q < n; q++) {
    while (z[k + 1] < q) k++;
    const d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

/**
 * Squared EDT to the set bits of mask (x-fastest layout).
 * Voxels inside the mask get 0.
 */
export function squaredDistanceTransform(mask: Uint8Array, dims: Dims): Float64Array {
  const [nx, ny, nz] = dims;
  const n = nx * ny * nz;
  const dist = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    dist[i] = mask[i] ? 0 : INF;
  }
  const longest = Math.max(nx, ny, nz);
  const f = new Float64Array(longest);
  const out = new Float64Array(longest);
  const v = new Int32Array(longest);
  const z = new Float64Array(longest + 1);

  // x pass
  for (let zz = 0; zz < nz; zz++) {
    for (let y = 0; y < ny; y++) {
      const base = nx * (y + ny * zz);
      for (let x = 0; x < nx; x++) f[x] = dist[base + x];
      dt1d(f, nx, out, v, z);
      for (let x = 0; x < nx; x++) dist[base + x] = out[x];
    }
  }
  // y pass
  for (let zz = 0; zz < nz; zz++) {
    for (let x = 0; x < nx; x++) {
      const base = x + nx * ny * zz;
      for (let y = 0; y < ny; y++) f[y] = dist[base + nx * y];
      dt1d(f, ny, out, v, z);
      for (let y = 0; y < ny; y++) dist[base + nx * y] = out[y];
    }
  }
  // z pass
  for (let y = 0; y < ny; y++) {
    for (let x = 0; x < nx; x++) {
      const base = x + nx * y;
      for (let zz = 0; zz < nz; zz++) f[zz] = dist[base + nx * ny * zz];
      dt1d(f, nz, out, v, z);
      for (let zz = 0; zz < nz; zz++) dist[base + nx * ny * zz] = out[zz];
    }
  }
  return dist;
}

/** Euclidean EDT floored at 1: mask voxels and their 1-neighborhood weight alike. */
export function flooredDistanceTransform(mask: Uint8Array, dims: Dims): Float64Array {
  const sq = squaredDistanceTransform(mask, dims);
  const out = new Float64Array(sq.length);
  for (let i = 0; i < sq.length; i++) {
    out[i] = Math.max(1, Math.sqrt(sq[i]));
  }
  return out;
}
