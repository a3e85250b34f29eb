/** Inference + serialization: a trained net's probabilities as region bytes. */

import type { Dims } from './formats.js';
import { writeRegion } from './formats.js';
import type { RegionNet } from './model.js';

export interface ProblemGrids {
  dims: Dims;
  voxelSize: number;
  e1: Uint8Array;
  e2: Uint8Array;
}

export interface ExportResult {
  bytes: Buffer;
  /** forward-pass wall time; informational */
  milliseconds: number;
}

export function exportRegion(net: RegionNet, grids: ProblemGrids, threshold = 0.5): ExportResult {
  if (!(threshold > 0 && threshold < 1)) {
    throw new Error(`threshold must be inside (0, 1), got ${threshold}`);
  }
  const t0 = Date.now();
  const probs = net.predict(grids);
  const milliseconds = Date.now() - t0;
  return { bytes: writeRegion(probs, grids.dims, threshold), milliseconds };
}
