/** Training loop: seeded, minibatched Adam over a PSAMP corpus.
 *
 * The gradient descends the float32 tf loss; the logged metrics are float64
 * recomputations on the same predictions, so the metrics file is comparable
 * across runs and backends. Epoch metrics average the per-batch values taken
 * before each update, which makes "epoch 1" reflect the freshly initialized
 * model.
 */

import * as tf from '@tensorflow/tfjs';
import type { TrainingSample } from './formats.js';
import {
  DEFAULT_LOSS_PARAMS,
  LossParams,
  SampleAux,
  SampleAuxTensors,
  auxToTensors,
  buildSampleAux,
  checkLossParams,
  exactHausdorff,
  lossHausSurrogateValue,
  lossPathValue,
  lossTotalTf,
} from './losses.js';
import {
  DEFAULT_MODEL_CONFIG,
  ModelConfig,
  RegionNet,
  sampleToTensors,
  saveCheckpoint,
} from './model.js';

export interface TrainConfig {
  epochs: number;
  seed: number;
  learningRate: number;
  batchSize: number;
  model: ModelConfig;
  loss: LossParams;
  /** threshold for the exact Hausdorff evaluation metric */
  hausdorffThreshold: number;
}

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  epochs: 20,
  seed: 0,
  learningRate: 0.005,
  batchSize: 8,
  model: DEFAULT_MODEL_CONFIG,
  loss: DEFAULT_LOSS_PARAMS,
  hausdorffThreshold: 0.5,
};

export interface EpochMetrics {
  epoch: number;
  lossPath: number;
  lossHausSurrogate: number;
  lossTotal: number;
  /** mean exact symmetric Hausdorff; null when every thresholded set was empty */
  exactHausdorffMean: number | null;
  exactHausdorffCount: number;
  seconds: number;
}

export interface TrainResult {
  checkpoint: string;
  metrics: EpochMetrics[];
}

export interface NamedSample {
  name: string;
  sample: TrainingSample;
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

interface PreparedSample {
  name: string;
  sample: TrainingSample;
  aux: SampleAux;
  auxT: SampleAuxTensors;
  e1: tf.Tensor5D;
  e2: tf.Tensor5D;
}

function prepare(entries: NamedSample[], loss: LossParams): PreparedSample[] {
  if (entries.length === 0) throw new Error('dataset is empty');
  const dims = entries[0].sample.dims;
  return entries.map((entry, idx) => {
    const s = entry.sample;
    if (s.dims[0] !== dims[0] || s.dims[1] !== dims[1] || s.dims[2] !== dims[2]) {
      throw new Error(
        `sample ${entry.name} has dims ${s.dims.join('x')}, expected ${dims.join('x')}`,
      );
    }
    let aux: SampleAux;
    try {
      aux = buildSampleAux(s.label, s.dims, idx);
    } catch (err) {
      throw new Error(`sample ${entry.name}: ${(err as Error).message}`);
    }
    const [e1, e2] = sampleToTensors(s);
    return { name: entry.name, sample: s, aux, auxT: auxToTensors(s.label, aux, loss.lambdaW), e1, e2 };
  });
}

export function trainModel(
  entries: NamedSample[],
  config: TrainConfig,
  onEpoch?: (m: EpochMetrics) => void,
): TrainResult {
  checkLossParams(config.loss);
  if (!Number.isInteger(config.epochs) || config.epochs < 1) {
    throw new Error(`epochs must be a positive integer, got ${config.epochs}`);
  }
  if (!Number.isInteger(config.batchSize) || config.batchSize < 1) {
    throw new Error(`batchSize must be a positive integer, got ${config.batchSize}`);
  }
  const prepared = prepare(entries, config.loss);
  const net = new RegionNet(config.model, config.seed);
  const optimizer = tf.train.adam(config.learningRate);
  const shuffleRand = mulberry32((config.seed ^ 0x5eed5) >>> 0);
  const order = prepared.map((_, i) => i);
  const metrics: EpochMetrics[] = [];

  try {
    for (let epoch = 1; epoch <= config.epochs; epoch++) {
      const t0 = Date.now();
      for (let i = order.length - 1; i > 0; i--) {
        const j = Math.floor(shuffleRand() * (i + 1));
        [order[i], order[j]] = [order[j], order[i]];
      }
      let pathSum = 0;
      let hausSum = 0;
      let hdSum = 0;
      let hdCount = 0;
      for (let start = 0; start < order.length; start += config.batchSize) {
        const batch = order.slice(start, start + config.batchSize).map((i) => prepared[i]);
        const e1 = tf.concat(batch.map((b) => b.e1), 0) as tf.Tensor5D;
        const e2 = tf.concat(batch.map((b) => b.e2), 0) as tf.Tensor5D;
        let flatPreds: Float32Array | null = null;
        const varList = net.trainableVariables();
        const { grads } = tf.variableGrads(() => {
          const out = net.forward(e1, e2);
          flatPreds = out.dataSync() as Float32Array;
          const perSample = batch.map((b, k) => {
            const pred = tf.slice(out, [k, 0, 0, 0, 0], [1, -1, -1, -1, -1]).reshape([-1]);
            return lossTotalTf(pred as tf.Tensor1D, b.auxT, config.loss);
          });
          return tf.div(tf.addN(perSample), batch.length) as tf.Scalar;
        }, varList);
        // variableGrads keys the map by variable name, which is exactly what
        // applyGradients resolves against; the declared types just disagree.
        optimizer.applyGradients(grads as Record<string, tf.Variable>);
        tf.dispose(Object.values(grads));
        tf.dispose([e1, e2]);

        const n = batch[0].sample.label.length;
        for (let k = 0; k < batch.length; k++) {
          const pred = (flatPreds as unknown as Float32Array).subarray(k * n, (k + 1) * n);
          const b = batch[k];
          pathSum += lossPathValue(pred, b.sample.label, b.aux.weightDist, config.loss.lambdaW);
          hausSum += lossHausSurrogateValue(pred, b.aux);
          const hd = exactHausdorff(pred, b.sample.label, b.sample.dims, config.hausdorffThreshold);
          if (hd !== null) {
            hdSum += hd;
            hdCount++;
          }
        }
      }
      const count = prepared.length;
      const lossPath = pathSum / count;
      const lossHausSurrogate = hausSum / count;
      const epochMetrics: EpochMetrics = {
        epoch,
        lossPath,
        lossHausSurrogate,
        lossTotal: config.loss.alpha1 * lossPath + config.loss.alpha2 * lossHausSurrogate,
        exactHausdorffMean: hdCount > 0 ? hdSum / hdCount : null,
        exactHausdorffCount: hdCount,
        seconds: (Date.now() - t0) / 1000,
      };
      metrics.push(epochMetrics);
      onEpoch?.(epochMetrics);
    }
    return { checkpoint: saveCheckpoint(net), metrics };
  } finally {
    net.dispose();
    optimizer.dispose();
    for (const p of prepared) {
      tf.dispose([p.e1, p.e2, p.auxT.gt, p.auxT.weights, p.auxT.gtDist, p.auxT.pairDist]);
    }
  }
}
