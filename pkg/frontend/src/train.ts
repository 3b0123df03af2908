/**
 * Training loop: MSE on raw permittivity values, Adam starting at 3e-4 with
 * the learning rate multiplied by 0.8 every decayEvery epochs, per-epoch
 * train/val losses logged, best-validation checkpoint kept.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { saveCheckpoint } from './checkpoint.js';
import { CorpusManifest, Sample, gridShape, paddedSize, readManifest,
         readSplit, seededShuffle, toTensors } from './corpus.js';
import { NetworkConfig, buildModel, describeArchitecture } from './model.js';

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  initialLearningRate: number; // 3e-4
  decayRate: number;           // 0.8
  decayEvery: number;          // epochs between decay events (40 over 400)
  seed: number;
}

export const DEFAULT_TRAIN: TrainConfig = {
  epochs: 400,
  batchSize: 16,
  initialLearningRate: 3e-4,
  decayRate: 0.8,
  decayEvery: 40,
  seed: 0,
};

export function learningRateAt(cfg: TrainConfig, epoch: number): number {
  const decays = Math.floor(epoch / cfg.decayEvery);
  return cfg.initialLearningRate * cfg.decayRate ** decays;
}

/** Trailing moving average (the loss-curve smoothing used for comparisons). */
export function smooth(values: number[], window: number): number[] {
  const out: number[] = [];
  let acc = 0;
  for (let i = 0; i < values.length; i++) {
    acc += values[i];
    if (i >= window) acc -= values[i - window];
    out.push(acc / Math.min(i + 1, window));
  }
  return out;
}

export interface EpochLog {
  epoch: number;
  learningRate: number;
  trainMse: number;
  valMse: number;
}

export interface TrainResult {
  log: EpochLog[];
  bestValMse: number;
  bestEpoch: number;
}

export async function trainModel(model: tf.LayersModel, cfg: TrainConfig,
                                 data: { x: tf.Tensor4D; y: tf.Tensor4D },
                                 val: { x: tf.Tensor4D; y: tf.Tensor4D },
                                 onBest?: (model: tf.LayersModel) => Promise<void>,
                                 verbose = false): Promise<TrainResult> {
  const optimizer = tf.train.adam(cfg.initialLearningRate);
  model.compile({ optimizer, loss: 'meanSquaredError' });
  const n = data.x.shape[0];
  const log: EpochLog[] = [];
  let bestValMse = Infinity;
  let bestEpoch = -1;

  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    const lr = learningRateAt(cfg, epoch);
    // tfjs keeps the Adam step size in a plain property; assigning it is the
    // supported way to schedule without resetting the moment estimates
    (optimizer as unknown as { learningRate: number }).learningRate = lr;

    const order = seededShuffle([...Array(n).keys()], cfg.seed * 7919 + epoch);
    let lossSum = 0;
    let batches = 0;
    for (let start = 0; start < n; start += cfg.batchSize) {
      const idx = order.slice(start, start + cfg.batchSize);
      const { bx, by } = tf.tidy(() => ({
        bx: tf.gather(data.x, idx),
        by: tf.gather(data.y, idx),
      }));
      const loss = await model.trainOnBatch(bx, by) as number;
      bx.dispose(); by.dispose();
      lossSum += loss;
      batches++;
      if (Number.isNaN(loss)) {
        throw new Error(`training diverged: NaN loss at epoch ${epoch}`);
      }
    }

    const valLoss = tf.tidy(() => {
      const scalar = model.evaluate(val.x, val.y,
                                    { batchSize: cfg.batchSize }) as tf.Scalar;
      return scalar.dataSync()[0];
    });
    if (Number.isNaN(valLoss)) {
      throw new Error(`training diverged: NaN validation loss at epoch ${epoch}`);
    }
    log.push({ epoch, learningRate: lr, trainMse: lossSum / batches,
               valMse: valLoss });
    if (verbose) {
      console.log(`epoch ${epoch}: lr=${lr.toExponential(2)} ` +
        `train=${(lossSum / batches).toFixed(4)} val=${valLoss.toFixed(4)}`);
    }
    if (valLoss < bestValMse) {
      bestValMse = valLoss;
      bestEpoch = epoch;
      if (onBest) await onBest(model);
    }
  }
  return { log, bestValMse, bestEpoch };
}

export interface TrainRunOptions {
  corpusDir: string;
  outDir: string;
  network: NetworkConfig;
  training: TrainConfig;
  verbose?: boolean;
}

/** Full corpus-to-checkpoint run; returns the per-epoch log. */
export async function runTraining(opts: TrainRunOptions): Promise<TrainResult> {
  const manifest = readManifest(opts.corpusDir);
  const shape = gridShape(manifest);
  const network = { ...opts.network,
                    inputSize: paddedSize(Math.max(...shape),
                                          opts.network.depth),
                    seed: opts.network.seed ?? opts.training.seed };
  const trainSamples = readSplit(opts.corpusDir, manifest, 'train');
  const valSamples = readSplit(opts.corpusDir, manifest, 'val');
  if (trainSamples.length === 0 || valSamples.length === 0) {
    throw new Error('corpus train/val splits must be nonempty');
  }
  const data = toTensors(trainSamples, shape, network.depth);
  const val = toTensors(valSamples, shape, network.depth);

  const model = buildModel(network);
  const arch = describeArchitecture(network, model);
  fs.mkdirSync(opts.outDir, { recursive: true });
  const result = await trainModel(
    model, opts.training, data, val,
    async (m) => saveCheckpoint(path.join(opts.outDir, 'best'), m, arch),
    opts.verbose);

  fs.writeFileSync(path.join(opts.outDir, 'training_log.json'),
                   JSON.stringify({ network: arch, training: opts.training,
                                    corpus: corpusSummary(manifest),
                                    ...result }, null, 2) + '\n');
  const csv = ['epoch,learning_rate,train_mse,val_mse',
               ...result.log.map((r) =>
                 `${r.epoch},${r.learningRate},${r.trainMse},${r.valMse}`)];
  fs.writeFileSync(path.join(opts.outDir, 'loss_curves.csv'),
                   csv.join('\n') + '\n');
  data.x.dispose(); data.y.dispose(); val.x.dispose(); val.y.dispose();
  return result;
}

function corpusSummary(manifest: CorpusManifest) {
  return {
    provenance_hash: manifest.provenance_hash,
    n_train: manifest.splits.train.length,
    n_val: manifest.splits.val.length,
    n_test: manifest.splits.test.length,
  };
}

/** Linear-model baseline: clip(Re(chi) + 1, >= 1), the floor the network
 * must beat. */
export function baselinePrediction(sample: Sample): Float32Array {
  const out = new Float32Array(sample.chiRe.length);
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.max(sample.chiRe[i] + 1.0, 1.0);
  }
  return out;
}
