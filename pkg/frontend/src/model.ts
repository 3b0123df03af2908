/**
 * Symmetric encoder-decoder regression network mapping the two reconstructed
 * contrast channels to a permittivity image.
 *
 * Encoder stage: two (3x3 conv + batch norm + ReLU) blocks, then 2x2 max
 * pool; channels double per stage. Decoder stage: 2x2 upsample, 3x3 conv
 * halving the channels, concatenation with the skip path, then two conv
 * blocks. Head: 1x1 conv + ReLU (outputs are nonnegative permittivities).
 *
 * The "modified" variant inserts n-i extra conv blocks into the skip
 * connection from encoder level i (1-based) to decoder level n-i, narrowing
 * the semantic gap between shallow encoder features and deep decoder
 * features; "plain" uses bare skips, so both variants come from one config.
 */

import * as tf from '@tensorflow/tfjs';

export type Variant = 'modified' | 'plain';

export interface NetworkConfig {
  depth: number;          // encoder/decoder stages (n)
  baseChannels: number;   // channels at the first encoder stage
  variant: Variant;
  inputSize: number;      // padded square input size; divisible by 2^depth
  inputChannels?: number; // default 2 (re, im)
  seed?: number;          // weight-init seed for reproducible runs
}

export const DEFAULT_CONFIG: NetworkConfig = {
  depth: 4,
  baseChannels: 32,
  variant: 'modified',
  inputSize: 64,
};

export function skipConvCount(cfg: NetworkConfig, level: number): number {
  // level is 1-based encoder level; the outermost skip gets the most blocks
  return cfg.variant === 'modified' ? cfg.depth - level : 0;
}

export function buildModel(cfg: NetworkConfig): tf.LayersModel {
  const inputChannels = cfg.inputChannels ?? 2;
  if (cfg.inputSize % 2 ** cfg.depth !== 0) {
    throw new Error(
      `input size ${cfg.inputSize} not divisible by 2^${cfg.depth}`);
  }
  let seedCounter = cfg.seed;
  const nextSeed = () => (seedCounter === undefined ? undefined : seedCounter++);

  const convBlock = (x: tf.SymbolicTensor, filters: number,
                     name: string): tf.SymbolicTensor => {
    let y = tf.layers.conv2d({
      filters, kernelSize: 3, padding: 'same', useBias: false,
      kernelInitializer: tf.initializers.heNormal({ seed: nextSeed() }),
      name: `${name}_conv`,
    }).apply(x) as tf.SymbolicTensor;
    y = tf.layers.batchNormalization({ name: `${name}_bn` })
      .apply(y) as tf.SymbolicTensor;
    return tf.layers.reLU({ name: `${name}_relu` })
      .apply(y) as tf.SymbolicTensor;
  };

  const input = tf.input({
    shape: [cfg.inputSize, cfg.inputSize, inputChannels], name: 'contrast',
  });
  const skips: tf.SymbolicTensor[] = [];
  let x = input;
  let filters = cfg.baseChannels;
  for (let level = 1; level <= cfg.depth; level++) {
    x = convBlock(x, filters, `enc${level}a`);
    x = convBlock(x, filters, `enc${level}b`);
    let skip = x;
    for (let k = 0; k < skipConvCount(cfg, level); k++) {
      skip = convBlock(skip, filters, `skip${level}_${k}`);
    }
    skips.push(skip);
    x = tf.layers.maxPooling2d({ poolSize: [2, 2], name: `pool${level}` })
      .apply(x) as tf.SymbolicTensor;
    filters *= 2;
  }

  x = convBlock(x, filters, 'bottleneck_a');
  x = convBlock(x, filters, 'bottleneck_b');

  for (let level = cfg.depth; level >= 1; level--) {
    filters = Math.floor(filters / 2);
    x = tf.layers.upSampling2d({ size: [2, 2], name: `up${level}` })
      .apply(x) as tf.SymbolicTensor;
    x = tf.layers.conv2d({
      filters, kernelSize: 3, padding: 'same',
      kernelInitializer: tf.initializers.heNormal({ seed: nextSeed() }),
      name: `up${level}_conv`,
    }).apply(x) as tf.SymbolicTensor;
    x = tf.layers.concatenate({ name: `cat${level}` })
      .apply([x, skips[level - 1]]) as tf.SymbolicTensor;
    x = convBlock(x, filters, `dec${level}a`);
    x = convBlock(x, filters, `dec${level}b`);
  }

  const output = tf.layers.conv2d({
    filters: 1, kernelSize: 1, activation: 'relu',
    kernelInitializer: tf.initializers.heNormal({ seed: nextSeed() }),
    name: 'permittivity',
  }).apply(x) as tf.SymbolicTensor;

  return tf.model({ inputs: input, outputs: output, name: `unet_${cfg.variant}` });
}

export interface ArchitectureDescriptor {
  depth: number;
  baseChannels: number;
  variant: Variant;
  inputSize: number;
  inputChannels: number;
  outputChannels: number;
  skipConvsPerLevel: number[];
  parameters: number;
}

export function describeArchitecture(cfg: NetworkConfig,
                                     model: tf.LayersModel): ArchitectureDescriptor {
  return {
    depth: cfg.depth,
    baseChannels: cfg.baseChannels,
    variant: cfg.variant,
    inputSize: cfg.inputSize,
    inputChannels: cfg.inputChannels ?? 2,
    outputChannels: 1,
    skipConvsPerLevel: Array.from({ length: cfg.depth },
                                  (_, i) => skipConvCount(cfg, i + 1)),
    parameters: model.countParams(),
  };
}
