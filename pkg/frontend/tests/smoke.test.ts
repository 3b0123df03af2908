/**
 * Real-corpus smoke test, gated behind RYTOV_CORPUS (path to a corpus
 * produced by the imaging pipeline's `dataset` command). Conv training on
 * the pure-JS cpu backend is slow, so the default scale here is small;
 * RYTOV_SMOKE_EPOCHS / RYTOV_SMOKE_BASE / RYTOV_SMOKE_DEPTH raise it toward
 * the full 50-epoch configuration when time allows.
 */

import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { beforeAll, describe, expect, it } from 'vitest';

import { loadCheckpoint } from '../src/checkpoint.js';
import { gridShape, readManifest, readSplit } from '../src/corpus.js';
import { inferSamples } from '../src/infer.js';
import { median, psnr } from '../src/metrics.js';
import { baselinePrediction, runTraining, smooth } from '../src/train.js';

const corpusDir = process.env.RYTOV_CORPUS;

const TRAINING = {
  epochs: Number(process.env.RYTOV_SMOKE_EPOCHS ?? 10),
  batchSize: 8,
  initialLearningRate: Number(process.env.RYTOV_SMOKE_LR ?? 3e-4),
  decayRate: 0.8,
  decayEvery: Math.max(1, Math.floor(
    Number(process.env.RYTOV_SMOKE_EPOCHS ?? 10) / 2)),
  seed: 0,
};
const NETWORK = {
  depth: Number(process.env.RYTOV_SMOKE_DEPTH ?? 2),
  baseChannels: Number(process.env.RYTOV_SMOKE_BASE ?? 8),
  variant: 'modified' as const,
  inputSize: 0,
  seed: 0,
};

describe.skipIf(!corpusDir)('real-corpus training smoke', () => {
  beforeAll(async () => {
    await tf.setBackend('cpu');
    await tf.ready();
  });

  it('validation MSE improves and the network beats the linear baseline '
     + 'by 3 dB median test PSNR', async () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'smoke-'));
    const result = await runTraining({
      corpusDir: corpusDir!, outDir: out,
      network: NETWORK, training: TRAINING, verbose: true,
    });
    const valCurve = result.log.map((r) => r.valMse);
    expect(valCurve[valCurve.length - 1]).toBeLessThan(valCurve[0]);

    const manifest = readManifest(corpusDir!);
    const test = readSplit(corpusDir!, manifest, 'test');
    const { model, arch } = await loadCheckpoint(path.join(out, 'best'));
    const preds = await inferSamples(model, arch.depth, test,
                                     gridShape(manifest));
    const netPsnr = median(test.map((s, k) => psnr(preds[k], s.gtEps)));
    const basePsnr = median(test.map((s) => psnr(baselinePrediction(s),
                                                 s.gtEps)));
    console.log(`network median PSNR ${netPsnr.toFixed(2)} dB vs baseline ` +
      `${basePsnr.toFixed(2)} dB on ${test.length} test samples`);
    expect(netPsnr).toBeGreaterThanOrEqual(basePsnr + 3.0);
    fs.rmSync(out, { recursive: true, force: true });
  }, 7_200_000);

  it('modified variant ends at or below the plain variant in smoothed '
     + 'validation loss under the same budget', async () => {
    const finals: Record<string, number> = {};
    for (const variant of ['modified', 'plain'] as const) {
      const out = fs.mkdtempSync(path.join(os.tmpdir(), `cmp-${variant}-`));
      const result = await runTraining({
        corpusDir: corpusDir!, outDir: out,
        network: { ...NETWORK, variant }, training: TRAINING,
      });
      const val = result.log.map((r) => r.valMse);
      const smoothed = smooth(val, Math.min(50, val.length));
      finals[variant] = smoothed[smoothed.length - 1];
      fs.rmSync(out, { recursive: true, force: true });
    }
    console.log(`final smoothed val MSE: modified ${finals.modified}, ` +
      `plain ${finals.plain}`);
    expect(finals.modified).toBeLessThanOrEqual(finals.plain);
  }, 14_400_000);
});
