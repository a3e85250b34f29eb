import { beforeAll, describe, expect, it } from 'vitest';
import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { loadDataset } from '../src/formats.js';
import { DEFAULT_TRAIN_CONFIG, NamedSample, TrainConfig, trainModel } from '../src/train.js';

let entries: NamedSample[];

const TINY: TrainConfig = {
  ...DEFAULT_TRAIN_CONFIG,
  epochs: 2,
  batchSize: 2,
  model: { baseChannels: 4, asppRates: [1, 2] },
};

beforeAll(() => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'train-fixtures-'));
  const gen = spawnSync(
    'python3',
    ['-m', 'pierguard.cli', 'dataset', '--out', dir, '--count', '4', '--dims', '8', '--seed', '11'],
    { encoding: 'utf8' },
  );
  if (gen.status !== 0) throw new Error(`fixture generation failed: ${gen.stderr}`);
  entries = loadDataset(dir);
});

describe('training loop', () => {
  it('is reproducible for a fixed seed and varies across seeds', () => {
    const a = trainModel(entries, { ...TINY, seed: 3 });
    const b = trainModel(entries, { ...TINY, seed: 3 });
    const c = trainModel(entries, { ...TINY, seed: 4 });
    expect(a.checkpoint).toBe(b.checkpoint);
    expect(a.metrics).toEqual(b.metrics.map((m, i) => ({ ...m, seconds: a.metrics[i].seconds })));
    expect(c.checkpoint).not.toBe(a.checkpoint);
  });

  it('logs one finite metrics row per epoch with the stated combination', () => {
    const { metrics } = trainModel(entries, { ...TINY, seed: 6 });
    expect(metrics.length).toBe(TINY.epochs);
    for (const m of metrics) {
      expect(Number.isFinite(m.lossPath)).toBe(true);
      expect(Number.isFinite(m.lossHausSurrogate)).toBe(true);
      const expected = TINY.loss.alpha1 * m.lossPath + TINY.loss.alpha2 * m.lossHausSurrogate;
      expect(Math.abs(m.lossTotal - expected)).toBeLessThanOrEqual(1e-9);
      expect(m.exactHausdorffCount).toBeGreaterThanOrEqual(0);
      expect(m.exactHausdorffCount).toBeLessThanOrEqual(entries.length);
    }
  });

  it('rejects an empty dataset', () => {
    expect(() => trainModel([], TINY)).toThrow(/empty/);
  });

  it('rejects mixed grid sizes', () => {
    const twisted = entries.map((e) => ({ ...e }));
    twisted[1] = {
      name: twisted[1].name,
      sample: {
        dims: [12, 12, 12],
        voxelSize: 1,
        e1: new Uint8Array(12 * 12 * 12),
        e2: new Uint8Array(12 * 12 * 12),
        label: (() => {
          const l = new Uint8Array(12 * 12 * 12);
          l[0] = 1;
          return l;
        })(),
      },
    };
    expect(() => trainModel(twisted, TINY)).toThrow(/dims/);
  });

  it('names the offending sample when a label is empty', () => {
    const broken = entries.map((e) => ({ ...e }));
    broken[2] = {
      name: 'sample_bad',
      sample: { ...broken[2].sample, label: new Uint8Array(broken[2].sample.label.length) },
    };
    expect(() => trainModel(broken, TINY)).toThrow(/sample_bad/);
  });

  it('rejects nonsense epoch and batch settings', () => {
    expect(() => trainModel(entries, { ...TINY, epochs: 0 })).toThrow(/epochs/);
    expect(() => trainModel(entries, { ...TINY, batchSize: 0 })).toThrow(/batchSize/);
    expect(() => trainModel(entries, { ...TINY, epochs: 1.5 })).toThrow(/epochs/);
  });
});
