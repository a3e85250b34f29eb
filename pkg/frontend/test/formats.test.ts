import { beforeAll, describe, expect, it } from 'vitest';
import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import {
  FormatError,
  loadDataset,
  readRegion,
  readSample,
  writeRegion,
} from '../src/formats.js';

let fixtureDir: string;

beforeAll(() => {
  fixtureDir = fs.mkdtempSync(path.join(os.tmpdir(), 'psamp-fixtures-'));
  const gen = spawnSync(
    'python3',
    ['-m', 'pierguard.cli', 'dataset', '--out', fixtureDir, '--count', '3', '--dims', '8', '--seed', '3'],
    { encoding: 'utf8' },
  );
  if (gen.status !== 0) {
    throw new Error(`fixture generation failed: ${gen.stderr}`);
  }
});

describe('sample files', () => {
  it('reads generated samples with agreeing channel shapes', () => {
    const entries = loadDataset(fixtureDir);
    expect(entries.length).toBe(3);
    for (const { name, sample } of entries) {
      expect(name).toMatch(/^sample_\d+$/);
      expect(sample.dims).toEqual([8, 8, 8]);
      const n = 512;
      expect(sample.e1.length).toBe(n);
      expect(sample.e2.length).toBe(n);
      expect(sample.label.length).toBe(n);
      // endpoint channel carries exactly one init and one goal marker
      expect([...sample.e1].filter((v) => v === 1).length).toBe(1);
      expect([...sample.e1].filter((v) => v === 2).length).toBe(1);
      expect([...sample.e1].every((v) => v <= 2)).toBe(true);
      expect([...sample.e2].every((v) => v <= 1)).toBe(true);
      // the region label marks free voxels only
      let overlap = 0;
      for (let i = 0; i < n; i++) if (sample.label[i] && sample.e2[i]) overlap++;
      expect(overlap).toBe(0);
      expect([...sample.label].some((v) => v === 1)).toBe(true);
    }
  });

  it('rejects corrupted inputs', () => {
    const file = path.join(fixtureDir, 'sample_00000.psamp');
    const good = fs.readFileSync(file);
    const badMagic = Buffer.from(good);
    badMagic[0] = 0x58;
    expect(() => readSample(badMagic)).toThrow(FormatError);
    expect(() => readSample(good.subarray(0, good.length - 1))).toThrow(/truncated|length/);
    expect(() => readSample(Buffer.concat([good, Buffer.from([0])]))).toThrow(/trailing/);
  });

  it('rejects a dataset directory without a manifest', () => {
    const empty = fs.mkdtempSync(path.join(os.tmpdir(), 'no-manifest-'));
    expect(() => loadDataset(empty)).toThrow();
  });
});

describe('region files', () => {
  it('round-trips probabilities bit-exactly', () => {
    const dims: [number, number, number] = [3, 4, 2];
    const probs = new Float32Array(24);
    for (let i = 0; i < probs.length; i++) probs[i] = (i + 0.25) / 24.25;
    const bytes = writeRegion(probs, dims, 0.5);
    const back = readRegion(bytes);
    expect(back.dims).toEqual(dims);
    expect(back.threshold).toBe(0.5);
    for (let i = 0; i < probs.length; i++) expect(back.probs[i]).toBe(probs[i]);
  });

  it('rejects out-of-range probabilities and wrong lengths', () => {
    const dims: [number, number, number] = [2, 2, 2];
    expect(() => writeRegion(new Float32Array(7), dims, 0.5)).toThrow(/length/);
    const bad = new Float32Array(8);
    bad[3] = 1.5;
    expect(() => writeRegion(bad, dims, 0.5)).toThrow(/range|\[0, 1\]/);
  });

  it('writes files the planning package loads bit-exactly', () => {
    const dims: [number, number, number] = [4, 4, 4];
    const probs = new Float32Array(64);
    for (let i = 0; i < 64; i++) probs[i] = i / 63;
    const file = path.join(fixtureDir, 'interop.pheur');
    fs.writeFileSync(file, writeRegion(probs, dims, 0.5));
    const py = spawnSync(
      'python3',
      [
        '-c',
        [
          'import sys, json',
          'from pierguard.heuristics import load_region',
          'r = load_region(open(sys.argv[1], "rb").read())',
          'print(json.dumps({"dims": list(r.dims), "threshold": r.threshold, "probs": [float(v) for v in r.probs.ravel(order="F")]}))',
        ].join('\n'),
        file,
      ],
      { encoding: 'utf8' },
    );
    expect(py.status, py.stderr).toBe(0);
    const parsed = JSON.parse(py.stdout);
    expect(parsed.dims).toEqual([4, 4, 4]);
    expect(parsed.threshold).toBe(0.5);
    for (let i = 0; i < 64; i++) expect(parsed.probs[i]).toBe(probs[i]);
  });
});
