import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { loadCheckpoint } from '../src/checkpoint.js';
import { gridShape, readManifest, readSplit, toTensors } from '../src/corpus.js';
import { inferSamples } from '../src/infer.js';
import { median, psnr } from '../src/metrics.js';
import { buildModel } from '../src/model.js';
import { baselinePrediction, runTraining, trainModel } from '../src/train.js';
import { writeSyntheticCorpus } from './synthetic.js';

let dir: string;
let out: string;

const NETWORK = { depth: 2, baseChannels: 4, variant: 'modified' as const,
                  inputSize: 0, seed: 5 };
const TRAINING = { epochs: 80, batchSize: 8, initialLearningRate: 1e-2,
                   decayRate: 0.8, decayEvery: 40, seed: 5 };

beforeAll(async () => {
  await tf.setBackend('cpu');
  await tf.ready();
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'train-corpus-'));
  out = fs.mkdtempSync(path.join(os.tmpdir(), 'train-out-'));
  writeSyntheticCorpus(dir, { n: 60, grid: 12, seed: 11 });
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
  fs.rmSync(out, { recursive: true, force: true });
});

describe('training', () => {
  it('improves validation MSE, checkpoints the best epoch, and beats the '
     + 'linear baseline by 3 dB', async () => {
    const result = await runTraining({
      corpusDir: dir, outDir: out, network: NETWORK, training: TRAINING,
    });
    expect(result.log.length).toBe(TRAINING.epochs);
    const first = result.log[0].valMse;
    const last = result.log[result.log.length - 1].valMse;
    expect(last).toBeLessThan(first);
    expect(result.bestValMse).toBeLessThanOrEqual(last);
    expect(fs.existsSync(path.join(out, 'best', 'weights.bin'))).toBe(true);
    expect(fs.existsSync(path.join(out, 'loss_curves.csv'))).toBe(true);

    // learning-rate column follows the schedule
    const log = JSON.parse(
      fs.readFileSync(path.join(out, 'training_log.json'), 'utf-8'));
    expect(log.log[39].learningRate).toBeCloseTo(1e-2, 12);
    expect(log.log[40].learningRate).toBeCloseTo(1e-2 * 0.8, 12);

    // the trained network must beat max(Re(chi)+1, 1) by 3 dB median PSNR
    const manifest = readManifest(dir);
    const test = readSplit(dir, manifest, 'test');
    const { model, arch } = await loadCheckpoint(path.join(out, 'best'));
    const preds = await inferSamples(model, arch.depth, test,
                                     gridShape(manifest));
    const netPsnr = median(test.map((s, k) => psnr(preds[k], s.gtEps)));
    const basePsnr = median(test.map((s) => psnr(baselinePrediction(s),
                                                 s.gtEps)));
    expect(netPsnr).toBeGreaterThanOrEqual(basePsnr + 3.0);
  }, 600_000);

  it('reproduces loss curves exactly under a fixed seed', async () => {
    const manifest = readManifest(dir);
    const shape = gridShape(manifest);
    const train = readSplit(dir, manifest, 'train').slice(0, 8);
    const val = readSplit(dir, manifest, 'val');
    const cfg = { ...TRAINING, epochs: 2 };
    const curves: number[][] = [];
    for (let run = 0; run < 2; run++) {
      const data = toTensors(train, shape, 2);
      const v = toTensors(val, shape, 2);
      const model = buildModel({ ...NETWORK, inputSize: 12 });
      const result = await trainModel(model, cfg, data, v);
      curves.push(result.log.map((r) => r.valMse));
      data.x.dispose(); data.y.dispose(); v.x.dispose(); v.y.dispose();
    }
    expect(curves[0]).toEqual(curves[1]);
  }, 300_000);

  it('aborts with a divergence error on NaN loss', async () => {
    const x = tf.ones([4, 12, 12, 2]).mul(NaN) as tf.Tensor4D;
    const y = tf.ones([4, 12, 12, 1]) as tf.Tensor4D;
    const model = buildModel({ ...NETWORK, inputSize: 12 });
    await expect(trainModel(model, { ...TRAINING, epochs: 1 },
                            { x, y }, { x, y }))
      .rejects.toThrow(/diverged/);
    x.dispose(); y.dispose();
  }, 120_000);

  it('rejects an empty split', async () => {
    const emptyDir = fs.mkdtempSync(path.join(os.tmpdir(), 'empty-'));
    writeSyntheticCorpus(emptyDir, { n: 2, grid: 12, seed: 1 });
    const manifest = JSON.parse(
      fs.readFileSync(path.join(emptyDir, 'manifest.json'), 'utf-8'));
    manifest.splits.train = [];
    fs.writeFileSync(path.join(emptyDir, 'manifest.json'),
                     JSON.stringify(manifest));
    await expect(runTraining({
      corpusDir: emptyDir, outDir: path.join(emptyDir, 'out'),
      network: NETWORK, training: TRAINING,
    })).rejects.toThrow(/nonempty/);
    fs.rmSync(emptyDir, { recursive: true, force: true });
  }, 120_000);
});
