/** Encoder-decoder over voxel grids with multi-rate context and one
 * self-attention stage, emitting a per-voxel region probability.
 *
 * Layout contract: grids are x-fastest flat arrays, viewed here as
 * [1, z, y, x, c] tensors so the flat order is preserved end to end.
 *
 * CPU-backend notes baked into the architecture: conv3d has no gradient for
 * dilation rates above 1, so the context branches inflate small kernels with
 * zeros (differentiable concat) and convolve at rate 1; there is no 3-D
 * upsampling layer, so the decoder tiles (nearest neighbour), which does have
 * a registered gradient.
 */

import * as tf from '@tensorflow/tfjs';
import type { Dims } from './formats.js';

/** The model only consumes the two input channels; labels stay in the loss. */
export interface InputGrids {
  dims: Dims;
  e1: Uint8Array;
  e2: Uint8Array;
}

export interface ModelConfig {
  baseChannels: number;
  asppRates: number[];
}

export const DEFAULT_MODEL_CONFIG: ModelConfig = { baseChannels: 8, asppRates: [1, 2, 4] };

interface VarSpec {
  shape: number[];
  fanIn: number;
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

/** tfjs registers variable names globally per engine, so each net instance
 * prefixes its variables to stay re-creatable within one process. */
let netInstanceCounter = 0;

function heNormal(spec: VarSpec, rand: () => number): Float32Array {
  const n = spec.shape.reduce((a, b) => a * b, 1);
  const std = Math.sqrt(2 / spec.fanIn);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i += 2) {
    const u1 = Math.max(rand(), 1e-12);
    const u2 = rand();
    const r = Math.sqrt(-2 * Math.log(u1));
    out[i] = r * Math.cos(2 * Math.PI * u2) * std;
    if (i + 1 < n) out[i + 1] = r * Math.sin(2 * Math.PI * u2) * std;
  }
  return out;
}

/** Spread a [3,3,3,ci,co] kernel onto a (2r+1)^3 support by inserting zero
 * planes between taps, keeping the op differentiable in the kernel. */
export function inflateKernel(kernel: tf.Tensor, rate: number): tf.Tensor {
  if (rate === 1) return kernel;
  const gap = rate - 1;
  let k = kernel;
  for (let axis = 0; axis < 3; axis++) {
    const parts: tf.Tensor[] = [];
    const shape = k.shape.slice();
    shape[axis] = gap;
    const zeros = tf.zeros(shape);
    for (let tap = 0; tap < 3; tap++) {
      const begin = k.shape.map(() => 0);
      const size = k.shape.slice();
      begin[axis] = tap;
      size[axis] = 1;
      parts.push(tf.slice(k, begin, size));
      if (tap < 2) parts.push(zeros);
    }
    k = tf.concat(parts, axis);
  }
  return k;
}

export class RegionNet {
  readonly config: ModelConfig;
  readonly vars = new Map<string, tf.Variable>();

  constructor(config: ModelConfig = DEFAULT_MODEL_CONFIG, seed = 0) {
    this.config = config;
    const c = config.baseChannels;
    if (c < 2 || c % 2 !== 0) {
      throw new Error(`baseChannels must be an even number >= 2, got ${c}`);
    }
    const rand = mulberry32((seed ^ 0x51f15eed) >>> 0);
    const specs: Record<string, VarSpec> = {};
    const conv = (name: string, ci: number, co: number, k = 3) => {
      specs[`${name}/w`] = { shape: [k, k, k, ci, co], fanIn: k * k * k * ci };
      specs[`${name}/b`] = { shape: [co], fanIn: 1 };
    };
    const norm = (name: string, co: number) => {
      specs[`${name}/g`] = { shape: [co], fanIn: 1 };
      specs[`${name}/o`] = { shape: [co], fanIn: 1 };
    };
    const block = (name: string, ci: number, co: number, k = 3) => {
      conv(name, ci, co, k);
      norm(name, co);
    };
    block('stem_e1', 1, c / 2);
    block('stem_e2', 1, c / 2);
    block('enc0', c, c);
    block('down1', c, 2 * c); // stride 2
    block('enc1', 2 * c, 2 * c);
    block('down2', 2 * c, 4 * c); // stride 2
    block('enc2', 4 * c, 4 * c);
    for (const rate of config.asppRates) block(`aspp_r${rate}`, 4 * c, c);
    block('aspp_merge', config.asppRates.length * c, 4 * c, 1);
    block('up1', 4 * c + 2 * c, 2 * c);
    const dk = 2 * c;
    for (const nm of ['q', 'k', 'v', 'o']) {
      specs[`attn/${nm}`] = { shape: [2 * c, dk], fanIn: 2 * c };
    }
    block('up0', 2 * c + c, c);
    conv('head', c, 1, 1);
    const prefix = `net${netInstanceCounter++}`;
    for (const [name, spec] of Object.entries(specs)) {
      // Zero-init head: training starts from p = 0.5 everywhere, which keeps
      // the first steps of the summed BCE from swinging on init noise.
      // Norm scales start at one, everything else bias-like starts at zero.
      let init: Float32Array;
      if (name.endsWith('/g')) {
        init = new Float32Array(spec.shape[0]).fill(1);
      } else if (name.endsWith('/b') || name.endsWith('/o') || name.startsWith('head/')) {
        init = new Float32Array(spec.shape.reduce((a, b) => a * b, 1));
      } else {
        init = heNormal(spec, rand);
      }
      this.vars.set(name, tf.variable(tf.tensor(init, spec.shape), true, `${prefix}/${name}`));
    }
  }

  private w(name: string): tf.Tensor {
    const v = this.vars.get(name);
    if (!v) throw new Error(`unknown variable ${name}`);
    return v;
  }

  private conv(name: string, x: tf.Tensor5D, stride: number, rate = 1): tf.Tensor5D {
    const kernel = inflateKernel(this.w(`${name}/w`), rate);
    const y = tf.conv3d(x, kernel as tf.Tensor5D, [stride, stride, stride], 'same');
    return tf.add(y, this.w(`${name}/b`)) as tf.Tensor5D;
  }

  /** Conv, then per-sample per-channel normalization over the spatial axes.
   * Instance-style statistics keep samples in a batch independent. */
  private block(name: string, x: tf.Tensor5D, stride: number, rate = 1): tf.Tensor5D {
    const y = this.conv(name, x, stride, rate);
    const { mean, variance } = tf.moments(y, [1, 2, 3], true);
    const normed = tf.div(tf.sub(y, mean), tf.sqrt(tf.add(variance, 1e-5)));
    return tf.add(tf.mul(normed, this.w(`${name}/g`)), this.w(`${name}/o`)) as tf.Tensor5D;
  }

  /** Global self-attention within each sample. Projections act per token, so
   * they run as flat 2-D matmuls; only the token-token product is batched. */
  private attention(x: tf.Tensor5D): tf.Tensor5D {
    const [b, d, h, wdt, c] = x.shape;
    const nTok = d * h * wdt;
    const flat = tf.reshape(x, [b * nTok, c]);
    const proj = (name: string) =>
      tf.reshape(tf.matMul(flat, this.w(`attn/${name}`) as tf.Tensor2D), [b, nTok, c]);
    const q = proj('q');
    const k = proj('k');
    const v = proj('v');
    const scale = 1 / Math.sqrt(c);
    const weights = tf.softmax(tf.mul(tf.matMul(q, k, false, true), scale));
    const mixed = tf.matMul(
      tf.reshape(tf.matMul(weights, v), [b * nTok, c]),
      this.w('attn/o') as tf.Tensor2D,
    );
    return tf.add(x, tf.reshape(mixed, x.shape)) as tf.Tensor5D;
  }

  /** Nearest-neighbour 2x via per-axis duplication. tile has no gradient
   * past rank 4, but concat's gradient is slice, which is rank-generic. */
  private upsample2(x: tf.Tensor5D): tf.Tensor5D {
    const [b, d, h, wdt, c] = x.shape;
    let y: tf.Tensor = tf.reshape(x, [b, d, 1, h, wdt, c]);
    y = tf.reshape(tf.concat([y, y], 2), [b, 2 * d, h, 1, wdt, c]);
    y = tf.reshape(tf.concat([y, y], 3), [b, 2 * d, 2 * h, wdt, 1, c]);
    y = tf.concat([y, y], 4);
    return tf.reshape(y, [b, 2 * d, 2 * h, 2 * wdt, c]) as tf.Tensor5D;
  }

  /** [1,z,y,x,1] inputs to [1,z,y,x,1] probabilities. */
  forward(e1: tf.Tensor5D, e2: tf.Tensor5D): tf.Tensor5D {
    for (let axis = 1; axis <= 3; axis++) {
      if (e1.shape[axis] % 4 !== 0) {
        throw new Error(
          `grid dims must be divisible by 4, got ${e1.shape.slice(1, 4).join('x')}`,
        );
      }
    }
    return tf.tidy(() => {
      const s1 = tf.relu(this.block('stem_e1', e1, 1));
      const s2 = tf.relu(this.block('stem_e2', e2, 1));
      const f0 = tf.relu(this.block('enc0', tf.concat([s1, s2], 4) as tf.Tensor5D, 1));
      const f1 = tf.relu(this.block('enc1', tf.relu(this.block('down1', f0, 2)), 1));
      const f2 = tf.relu(this.block('enc2', tf.relu(this.block('down2', f1, 2)), 1));
      const branches = this.config.asppRates.map((r) =>
        tf.relu(this.block(`aspp_r${r}`, f2, 1, r)),
      );
      const ctx = tf.relu(this.block('aspp_merge', tf.concat(branches, 4) as tf.Tensor5D, 1));
      let d1 = tf.concat([this.upsample2(ctx), f1], 4) as tf.Tensor5D;
      d1 = tf.relu(this.block('up1', d1, 1));
      d1 = this.attention(d1);
      let d0 = tf.concat([this.upsample2(d1), f0], 4) as tf.Tensor5D;
      d0 = tf.relu(this.block('up0', d0, 1));
      return tf.sigmoid(this.conv('head', d0, 1)) as tf.Tensor5D;
    });
  }

  /** Flat x-fastest probabilities for one sample. */
  predict(sample: InputGrids): Float32Array {
    const [e1, e2] = sampleToTensors(sample);
    const out = this.forward(e1, e2);
    const probs = out.dataSync() as Float32Array;
    tf.dispose([e1, e2, out]);
    return probs;
  }

  trainableVariables(): tf.Variable[] {
    return [...this.vars.values()];
  }

  dispose() {
    for (const v of this.vars.values()) v.dispose();
    this.vars.clear();
  }
}

/** Endpoint codes are {0 free, 1 init, 2 goal}; halve so inputs stay O(1). */
export function sampleToTensors(sample: InputGrids): [tf.Tensor5D, tf.Tensor5D] {
  const [nx, ny, nz] = sample.dims;
  const n = nx * ny * nz;
  const a = new Float32Array(n);
  const b = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    a[i] = sample.e1[i] / 2;
    b[i] = sample.e2[i];
  }
  const shape: [number, number, number, number, number] = [1, nz, ny, nx, 1];
  return [tf.tensor5d(a, shape), tf.tensor5d(b, shape)];
}

/* ------------------------------ checkpoints ------------------------------ */

interface CheckpointJson {
  format: 'region-net-checkpoint';
  version: 1;
  config: ModelConfig;
  variables: Record<string, { shape: number[]; data: string }>;
}

export function saveCheckpoint(net: RegionNet): string {
  const variables: CheckpointJson['variables'] = {};
  for (const [name, v] of net.vars) {
    const data = v.dataSync() as Float32Array;
    variables[name] = {
      shape: v.shape.slice(),
      data: Buffer.from(data.buffer, data.byteOffset, data.byteLength).toString('base64'),
    };
  }
  const doc: CheckpointJson = {
    format: 'region-net-checkpoint',
    version: 1,
    config: net.config,
    variables,
  };
  return JSON.stringify(doc);
}

export function loadCheckpoint(text: string): RegionNet {
  let doc: CheckpointJson;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new Error(`checkpoint is not valid JSON: ${(err as Error).message}`);
  }
  if (doc.format !== 'region-net-checkpoint' || doc.version !== 1) {
    throw new Error('unrecognized checkpoint format');
  }
  const net = new RegionNet(doc.config, 0);
  for (const [name, v] of net.vars) {
    const entry = doc.variables[name];
    if (!entry) throw new Error(`checkpoint is missing variable ${name}`);
    const raw = Buffer.from(entry.data, 'base64');
    const data = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
    if (data.length !== v.size) {
      throw new Error(`checkpoint variable ${name} has wrong size`);
    }
    v.assign(tf.tensor(data, entry.shape));
  }
  return net;
}
