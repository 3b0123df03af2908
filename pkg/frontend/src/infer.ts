/**
 * Inference: run a trained checkpoint over corpus samples (writing
 * <sample_id>.f32 predictions the pipeline's eval command consumes) or over
 * a single contrast directory (the `reconstruct --unet-cmd` contract:
 * read chi_re.f32 / chi_im.f32 / contrast.json, write eps_pred.f32).
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { loadCheckpoint } from './checkpoint.js';
import { Sample, cropTo, gridShape, paddedSize, readManifest, readSample,
         toTensors, writeF32 } from './corpus.js';

export async function inferSamples(model: tf.LayersModel, depth: number,
                                   samples: Sample[], shape: [number, number],
                                   batchSize = 32): Promise<Float32Array[]> {
  const [h, w] = shape;
  const out: Float32Array[] = [];
  for (let start = 0; start < samples.length; start += batchSize) {
    const batch = samples.slice(start, start + batchSize);
    const { x, y } = toTensors(batch, shape, depth);
    y.dispose();
    const pred = tf.tidy(() =>
      cropTo(model.predict(x, { batchSize }) as tf.Tensor4D, h, w));
    x.dispose();
    const data = pred.dataSync() as Float32Array;
    pred.dispose();
    for (let k = 0; k < batch.length; k++) {
      out.push(data.slice(k * h * w, (k + 1) * h * w));
    }
  }
  return out;
}

export async function inferCorpus(checkpointDir: string, corpusDir: string,
                                  outDir: string,
                                  split: 'train' | 'val' | 'test',
                                  batchSize = 32): Promise<number> {
  const { model, arch } = await loadCheckpoint(checkpointDir);
  const manifest = readManifest(corpusDir);
  const shape = gridShape(manifest);
  checkSize(arch.inputSize, shape, arch.depth);
  const ids = manifest.splits[split];
  fs.mkdirSync(outDir, { recursive: true });
  for (let start = 0; start < ids.length; start += batchSize) {
    const chunk = ids.slice(start, start + batchSize);
    const samples = chunk.map((id) => readSample(corpusDir, id, shape));
    const preds = await inferSamples(model, arch.depth, samples, shape,
                                     batchSize);
    chunk.forEach((id, k) =>
      writeF32(path.join(outDir, `${id}.f32`), preds[k]));
  }
  return ids.length;
}

export async function inferContrastDir(checkpointDir: string, inDir: string,
                                       outDir: string): Promise<void> {
  const { model, arch } = await loadCheckpoint(checkpointDir);
  const sidecar = JSON.parse(
    fs.readFileSync(path.join(inDir, 'contrast.json'), 'utf-8'));
  const shape: [number, number] = [sidecar.grid.ny, sidecar.grid.nx];
  checkSize(arch.inputSize, shape, arch.depth);
  const n = shape[0] * shape[1];
  const read = (name: string) => {
    const buf = fs.readFileSync(path.join(inDir, name));
    return new Float32Array(buf.buffer, buf.byteOffset, n).slice();
  };
  const sample: Sample = { id: 'contrast', chiRe: read('chi_re.f32'),
                           chiIm: read('chi_im.f32'),
                           gtEps: new Float32Array(n) };
  const [pred] = await inferSamples(model, arch.depth, [sample], shape, 1);
  writeF32(path.join(outDir, 'eps_pred.f32'), pred);
}

function checkSize(inputSize: number, shape: [number, number], depth: number) {
  const padded = paddedSize(Math.max(...shape), depth);
  if (padded !== inputSize) {
    throw new Error(
      `checkpoint expects ${inputSize}x${inputSize} inputs but the ` +
      `${shape[1]}x${shape[0]} grid pads to ${padded}`);
  }
}
