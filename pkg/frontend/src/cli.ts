/**
 * Command line: train a permittivity-regression network on a corpus, run
 * inference for evaluation or for the imaging pipeline's --unet-cmd hook,
 * and compare the modified against the plain skip-connection variant.
 */

import * as fs from 'fs';
import * as path from 'path';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { useCpu, useInferenceBackend } from './backend.js';
import { readManifest, readSplit, gridShape } from './corpus.js';
import { inferContrastDir, inferCorpus } from './infer.js';
import { median, psnr } from './metrics.js';
import { DEFAULT_CONFIG, Variant } from './model.js';
import { DEFAULT_TRAIN, baselinePrediction, runTraining, smooth } from './train.js';

const networkOptions = {
  depth: { type: 'number', default: DEFAULT_CONFIG.depth },
  'base-channels': { type: 'number', default: DEFAULT_CONFIG.baseChannels },
  variant: { choices: ['modified', 'plain'] as const, default: 'modified' },
} as const;

const trainingOptions = {
  epochs: { type: 'number', default: DEFAULT_TRAIN.epochs },
  'batch-size': { type: 'number', default: DEFAULT_TRAIN.batchSize },
  lr: { type: 'number', default: DEFAULT_TRAIN.initialLearningRate },
  'decay-rate': { type: 'number', default: DEFAULT_TRAIN.decayRate },
  'decay-every': { type: 'number', default: DEFAULT_TRAIN.decayEvery },
  seed: { type: 'number', default: 0 },
} as const;

function trainConfigFrom(argv: Record<string, unknown>) {
  return {
    epochs: argv.epochs as number,
    batchSize: argv['batch-size'] as number,
    initialLearningRate: argv.lr as number,
    decayRate: argv['decay-rate'] as number,
    decayEvery: argv['decay-every'] as number,
    seed: argv.seed as number,
  };
}

function networkConfigFrom(argv: Record<string, unknown>, variant?: Variant) {
  return {
    depth: argv.depth as number,
    baseChannels: argv['base-channels'] as number,
    variant: variant ?? (argv.variant as Variant),
    inputSize: 0, // derived from the corpus grid in runTraining
    seed: argv.seed as number,
  };
}

await yargs(hideBin(process.argv))
  .command('train', 'train on a corpus and keep the best-validation checkpoint',
    { corpus: { type: 'string', demandOption: true },
      out: { type: 'string', demandOption: true },
      ...networkOptions, ...trainingOptions },
    async (argv) => {
      await useCpu();
      const result = await runTraining({
        corpusDir: argv.corpus, outDir: argv.out,
        network: networkConfigFrom(argv),
        training: trainConfigFrom(argv),
        verbose: true,
      });
      console.log(`best val MSE ${result.bestValMse.toFixed(5)} at epoch ` +
        `${result.bestEpoch}; checkpoint in ${path.join(argv.out, 'best')}`);
    })
  .command('infer', 'write per-sample predictions for a corpus split',
    { checkpoint: { type: 'string', demandOption: true },
      corpus: { type: 'string', demandOption: true },
      out: { type: 'string', demandOption: true },
      split: { choices: ['train', 'val', 'test'] as const, default: 'test' },
      backend: { choices: ['wasm', 'cpu'] as const, default: 'wasm' } },
    async (argv) => {
      const backend = await useInferenceBackend(argv.backend as 'wasm' | 'cpu');
      const t0 = Date.now();
      const n = await inferCorpus(argv.checkpoint, argv.corpus, argv.out,
                                  argv.split as 'train' | 'val' | 'test');
      const dt = (Date.now() - t0) / 1000;
      console.log(`${n} predictions in ${dt.toFixed(1)} s ` +
        `(${(1000 * dt / n).toFixed(0)} ms/sample, ${backend} backend)`);
    })
  .command('infer-dir', 'predict permittivity for one contrast directory ' +
      '(invoked by the pipeline as: <cmd> <contrast_dir> <out_dir>)',
    (y) => y
      .option('checkpoint', { type: 'string', demandOption: true })
      .option('backend', { choices: ['wasm', 'cpu'] as const, default: 'wasm' })
      .positional('in', { type: 'string' })
      .positional('out', { type: 'string' }),
    async (argv) => {
      const [inDir, outDir] = argv._.slice(1) as string[];
      if (!inDir || !outDir) {
        throw new Error('usage: infer-dir --checkpoint DIR <in_dir> <out_dir>');
      }
      await useInferenceBackend(argv.backend as 'wasm' | 'cpu');
      await inferContrastDir(argv.checkpoint, inDir, outDir);
      console.log(`wrote ${path.join(outDir, 'eps_pred.f32')}`);
    })
  .command('eval-baseline', 'median test PSNR of the linear baseline and of ' +
      'checkpoint predictions, for the smoke comparison',
    { corpus: { type: 'string', demandOption: true },
      pred: { type: 'string',
              describe: 'directory of <sample_id>.f32 predictions' },
      split: { choices: ['train', 'val', 'test'] as const, default: 'test' } },
    async (argv) => {
      const manifest = readManifest(argv.corpus);
      const samples = readSplit(argv.corpus, manifest,
                                argv.split as 'train' | 'val' | 'test');
      const base = samples.map((s) => psnr(baselinePrediction(s), s.gtEps));
      console.log(`baseline median PSNR: ${median(base).toFixed(2)} dB ` +
        `over ${samples.length} samples`);
      if (argv.pred) {
        const shape = gridShape(manifest);
        const net = samples.map((s) => {
          const buf = fs.readFileSync(path.join(argv.pred!, `${s.id}.f32`));
          const pred = new Float32Array(buf.buffer, buf.byteOffset,
                                        shape[0] * shape[1]);
          return psnr(pred, s.gtEps);
        });
        console.log(`network median PSNR: ${median(net).toFixed(2)} dB`);
      }
    })
  .command('compare', 'train modified and plain variants on the same ' +
      'corpus/seed/budget and report final smoothed validation losses',
    { corpus: { type: 'string', demandOption: true },
      out: { type: 'string', demandOption: true },
      window: { type: 'number', default: 50,
                describe: 'moving-average window for loss smoothing' },
      ...networkOptions, ...trainingOptions },
    async (argv) => {
      await useCpu();
      const results: Record<string, number> = {};
      for (const variant of ['modified', 'plain'] as const) {
        const res = await runTraining({
          corpusDir: argv.corpus,
          outDir: path.join(argv.out, variant),
          network: networkConfigFrom(argv, variant),
          training: trainConfigFrom(argv),
          verbose: true,
        });
        const val = res.log.map((r) => r.valMse);
        const smoothed = smooth(val, Math.min(argv.window, val.length));
        results[variant] = smoothed[smoothed.length - 1];
        console.log(`${variant}: final smoothed val MSE ` +
          `${results[variant].toFixed(5)}`);
      }
      fs.mkdirSync(argv.out, { recursive: true });
      fs.writeFileSync(path.join(argv.out, 'comparison.json'),
                       JSON.stringify(results, null, 2) + '\n');
      const better = results.modified <= results.plain;
      console.log(better
        ? 'modified variant matches or beats plain'
        : 'WARNING: plain variant ended lower than modified');
    })
  .demandCommand(1)
  .strict()
  .parse();
