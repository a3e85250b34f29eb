#!/usr/bin/env node
/** Command-line front end: train on a sample directory, export regions. */

import * as fs from 'node:fs';
import * as path from 'node:path';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { loadDataset } from './formats.js';
import { exportRegion } from './export.js';
import { loadCheckpoint } from './model.js';
import { DEFAULT_TRAIN_CONFIG, TrainConfig, trainModel } from './train.js';

function runTrain(argv: Record<string, unknown>) {
  const config: TrainConfig = {
    epochs: argv.epochs as number,
    seed: argv.seed as number,
    learningRate: argv.learningRate as number,
    batchSize: argv.batchSize as number,
    model: {
      baseChannels: argv.baseChannels as number,
      asppRates: DEFAULT_TRAIN_CONFIG.model.asppRates,
    },
    loss: {
      lambdaW: argv.lambda as number,
      alpha1: argv.alpha1 as number,
      alpha2: argv.alpha2 as number,
    },
    hausdorffThreshold: argv.hausThreshold as number,
  };
  const entries = loadDataset(argv.dataset as string);
  console.log(`training on ${entries.length} samples for ${config.epochs} epochs`);
  const result = trainModel(entries, config, (m) => {
    const hd = m.exactHausdorffMean === null ? 'n/a' : m.exactHausdorffMean.toFixed(3);
    console.log(
      `epoch ${m.epoch}: L_total ${m.lossTotal.toFixed(3)} ` +
        `(path ${m.lossPath.toFixed(3)}, haus ${m.lossHausSurrogate.toFixed(3)}, ` +
        `exact-hd ${hd}) in ${m.seconds.toFixed(1)}s`,
    );
  });
  fs.writeFileSync(argv.checkpoint as string, result.checkpoint);
  if (argv.metrics) {
    fs.writeFileSync(argv.metrics as string, JSON.stringify(result.metrics, null, 2));
  }
}

function runExport(argv: Record<string, unknown>) {
  const net = loadCheckpoint(fs.readFileSync(argv.checkpoint as string, 'utf8'));
  const entries = loadDataset(argv.dataset as string);
  const outDir = argv.out as string;
  fs.mkdirSync(outDir, { recursive: true });
  let totalMs = 0;
  for (const entry of entries) {
    const { bytes, milliseconds } = exportRegion(net, entry.sample, argv.threshold as number);
    fs.writeFileSync(path.join(outDir, `${entry.name}.pheur`), bytes);
    totalMs += milliseconds;
  }
  console.log(
    `exported ${entries.length} regions to ${outDir} ` +
      `(mean inference ${(totalMs / entries.length).toFixed(1)}ms)`,
  );
}

yargs(hideBin(process.argv))
  .command(
    'train',
    'train a region model on a sample directory',
    (y) =>
      y
        .option('dataset', { type: 'string', demandOption: true, describe: 'sample directory with manifest.json' })
        .option('checkpoint', { type: 'string', demandOption: true, describe: 'output checkpoint path' })
        .option('metrics', { type: 'string', describe: 'output path for per-epoch metrics JSON' })
        .option('epochs', { type: 'number', default: DEFAULT_TRAIN_CONFIG.epochs })
        .option('seed', { type: 'number', default: DEFAULT_TRAIN_CONFIG.seed })
        .option('learning-rate', { type: 'number', default: DEFAULT_TRAIN_CONFIG.learningRate })
        .option('batch-size', { type: 'number', default: DEFAULT_TRAIN_CONFIG.batchSize })
        .option('base-channels', { type: 'number', default: DEFAULT_TRAIN_CONFIG.model.baseChannels })
        .option('lambda', { type: 'number', default: DEFAULT_TRAIN_CONFIG.loss.lambdaW, describe: 'distance weighting strength in the path loss' })
        .option('alpha1', { type: 'number', default: DEFAULT_TRAIN_CONFIG.loss.alpha1 })
        .option('alpha2', { type: 'number', default: DEFAULT_TRAIN_CONFIG.loss.alpha2 })
        .option('haus-threshold', { type: 'number', default: DEFAULT_TRAIN_CONFIG.hausdorffThreshold, describe: 'probability threshold for the exact Hausdorff metric' }),
    runTrain,
  )
  .command(
    'export',
    'write one region file per dataset sample from a checkpoint',
    (y) =>
      y
        .option('checkpoint', { type: 'string', demandOption: true })
        .option('dataset', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true, describe: 'output directory for .pheur files' })
        .option('threshold', { type: 'number', default: 0.5, describe: 'threshold recorded in the region header' }),
    runExport,
  )
  .demandCommand(1)
  .strict()
  .parse();
