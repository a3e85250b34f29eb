/** Binary IO for the planner's grid formats.
 *
 * All integers little-endian. Voxel payloads are x-fastest:
 * index = x + dimsX * (y + dimsY * z).
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

const GRID_MAGIC = Buffer.from('PGRID\x01', 'latin1');
const SAMPLE_MAGIC = Buffer.from('PSAMP\x01', 'latin1');
const REGION_MAGIC = Buffer.from('PHEUR\x01', 'latin1');

export type Dims = [number, number, number];

export interface VoxelGrid {
  dims: Dims;
  voxelSize: number;
  /** x-fastest, dimsX*dimsY*dimsZ entries */
  data: Uint8Array;
}

export interface TrainingSample {
  /** endpoint channel: 0 free, 1 init voxel, 2 goal voxel */
  e1: Uint8Array;
  /** occupancy channel: 0 free, 1 occupied */
  e2: Uint8Array;
  /** target region mask */
  label: Uint8Array;
  dims: Dims;
  voxelSize: number;
}

export class FormatError extends Error {}

export function voxelCount(dims: Dims): number {
  return dims[0] * dims[1] * dims[2];
}

function readGridPayload(buf: Buffer, offset: number): { grid: VoxelGrid; next: number } {
  if (!buf.subarray(offset, offset + 6).equals(GRID_MAGIC)) {
    throw new FormatError(`bad grid magic at offset ${offset}`);
  }
  const dims: Dims = [
    buf.readUInt32LE(offset + 6),
    buf.readUInt32LE(offset + 10),
    buf.readUInt32LE(offset + 14),
  ];
  const voxelSize = buf.readDoubleLE(offset + 18);
  const start = offset + 26;
  const count = voxelCount(dims);
  if (buf.length < start + count) {
    throw new FormatError(`grid payload truncated: need ${count} voxels`);
  }
  const data = new Uint8Array(buf.subarray(start, start + count));
  return { grid: { dims, voxelSize, data }, next: start + count };
}

export function readSample(buf: Buffer): TrainingSample {
  if (!buf.subarray(0, 6).equals(SAMPLE_MAGIC)) {
    throw new FormatError('not a sample file');
  }
  const count = buf.readUInt32LE(6);
  if (count !== 3) {
    throw new FormatError(`expected 3 channels, header says ${count}`);
  }
  let offset = 10;
  const grids: VoxelGrid[] = [];
  for (let i = 0; i < 3; i++) {
    const { grid, next } = readGridPayload(buf, offset);
    grids.push(grid);
    offset = next;
  }
  if (offset !== buf.length) {
    throw new FormatError(`${buf.length - offset} trailing bytes`);
  }
  const [e1, e2, label] = grids;
  for (const g of grids) {
    if (g.dims[0] !== e1.dims[0] || g.dims[1] !== e1.dims[1] || g.dims[2] !== e1.dims[2]) {
      throw new FormatError('channel dims disagree');
    }
  }
  return { e1: e1.data, e2: e2.data, label: label.data, dims: e1.dims, voxelSize: e1.voxelSize };
}

export function writeRegion(probs: Float32Array, dims: Dims, threshold: number): Buffer {
  const count = voxelCount(dims);
  if (probs.length !== count) {
    throw new FormatError(`probs length ${probs.length} != ${count}`);
  }
  // the planner's reader requires a strictly interior threshold
  if (!(threshold > 0 && threshold < 1)) {
    throw new FormatError(`threshold outside (0, 1): ${threshold}`);
  }
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i];
    if (!(p >= 0 && p <= 1)) {
      throw new FormatError(`probability out of range at voxel ${i}: ${p}`);
    }
  }
  const buf = Buffer.alloc(6 + 12 + 8 + 4 * count);
  REGION_MAGIC.copy(buf, 0);
  buf.writeUInt32LE(dims[0], 6);
  buf.writeUInt32LE(dims[1], 10);
  buf.writeUInt32LE(dims[2], 14);
  buf.writeDoubleLE(threshold, 18);
  Buffer.from(probs.buffer, probs.byteOffset, probs.byteLength).copy(buf, 26);
  return buf;
}

export function readRegion(buf: Buffer): { probs: Float32Array; dims: Dims; threshold: number } {
  if (!buf.subarray(0, 6).equals(REGION_MAGIC)) {
    throw new FormatError('not a region file');
  }
  const dims: Dims = [buf.readUInt32LE(6), buf.readUInt32LE(10), buf.readUInt32LE(14)];
  const threshold = buf.readDoubleLE(18);
  const count = voxelCount(dims);
  if (buf.length !== 26 + 4 * count) {
    throw new FormatError(`region payload size ${buf.length} != ${26 + 4 * count}`);
  }
  const probs = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    probs[i] = buf.readFloatLE(26 + 4 * i);
  }
  return { probs, dims, threshold };
}

export interface ManifestEntry {
  file: string;
  [key: string]: unknown;
}

export function readManifest(dir: string): ManifestEntry[] {
  const raw = JSON.parse(fs.readFileSync(path.join(dir, 'manifest.json'), 'utf8'));
  if (!Array.isArray(raw.files)) {
    throw new FormatError('manifest has no files list');
  }
  return raw.files as ManifestEntry[];
}

export function loadDataset(dir: string): { name: string; sample: TrainingSample }[] {
  const entries = readManifest(dir);
  if (entries.length === 0) {
    throw new FormatError(`dataset at ${dir} is empty`);
  }
  return entries.map((entry) => ({
    name: path.parse(entry.file).name,
    sample: readSample(fs.readFileSync(path.join(dir, entry.file))),
  }));
}
