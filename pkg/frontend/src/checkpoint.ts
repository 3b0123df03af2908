/**
 * Checkpoint IO without the native filesystem handlers: model topology and
 * weight specs go to model.json, raw weights to weights.bin, and the
 * architecture descriptor to arch.json next to them.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { ArchitectureDescriptor } from './model.js';

export async function saveCheckpoint(dir: string, model: tf.LayersModel,
                                     arch: ArchitectureDescriptor): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(tf.io.withSaveHandler(async (artifacts) => {
    const weightData = artifacts.weightData as ArrayBuffer;
    fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
    fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify({
      modelTopology: artifacts.modelTopology,
      weightSpecs: artifacts.weightSpecs,
    }));
    return {
      modelArtifactsInfo: {
        dateSaved: new Date(),
        modelTopologyType: 'JSON',
      },
    };
  }));
  fs.writeFileSync(path.join(dir, 'arch.json'),
                   JSON.stringify(arch, null, 2) + '\n');
}

export async function loadCheckpoint(dir: string): Promise<{
  model: tf.LayersModel; arch: ArchitectureDescriptor;
}> {
  const meta = JSON.parse(
    fs.readFileSync(path.join(dir, 'model.json'), 'utf-8'));
  const weights = fs.readFileSync(path.join(dir, 'weights.bin'));
  const model = await tf.loadLayersModel(tf.io.fromMemory({
    modelTopology: meta.modelTopology,
    weightSpecs: meta.weightSpecs,
    weightData: weights.buffer.slice(weights.byteOffset,
                                     weights.byteOffset + weights.byteLength),
  }));
  const arch = JSON.parse(
    fs.readFileSync(path.join(dir, 'arch.json'), 'utf-8'));
  return { model, arch };
}
