import * as tf from '@tensorflow/tfjs';
import { beforeAll, describe, expect, it } from 'vitest';

import { buildModel, describeArchitecture, skipConvCount,
         NetworkConfig } from '../src/model.js';

beforeAll(async () => {
  await tf.setBackend('cpu');
  await tf.ready();
});

const small: NetworkConfig = {
  depth: 2, baseChannels: 4, variant: 'modified', inputSize: 16, seed: 1,
};

describe('network architecture', () => {
  it('maps 2x64x64 input to 1x64x64 output', () => {
    const model = buildModel({ depth: 4, baseChannels: 4,
                               variant: 'modified', inputSize: 64, seed: 1 });
    const out = model.predict(tf.zeros([1, 64, 64, 2])) as tf.Tensor4D;
    expect(out.shape).toEqual([1, 64, 64, 1]);
    out.dispose();
  });

  it('adds n-i conv blocks to the skip at encoder level i', () => {
    const cfg: NetworkConfig = { depth: 4, baseChannels: 4,
                                 variant: 'modified', inputSize: 64 };
    expect(skipConvCount(cfg, 1)).toBe(3);
    expect(skipConvCount(cfg, 3)).toBe(1);
    expect(skipConvCount(cfg, 4)).toBe(0);
    const model = buildModel(cfg);
    const skipConvs = model.layers.filter(
      (l) => /^skip(\d+)_\d+_conv$/.test(l.name));
    // sum over levels of (n - i) = 3 + 2 + 1 + 0
    expect(skipConvs.length).toBe(6);
    for (let level = 1; level <= 4; level++) {
      const atLevel = skipConvs.filter(
        (l) => l.name.startsWith(`skip${level}_`));
      expect(atLevel.length).toBe(4 - level);
    }
  });

  it('channel count doubles per encoder stage and halves per decoder stage', () => {
    const model = buildModel({ depth: 3, baseChannels: 8,
                               variant: 'plain', inputSize: 32 });
    const filtersOf = (name: string) =>
      (model.getLayer(name) as unknown as { filters: number }).filters;
    expect(filtersOf('enc1a_conv')).toBe(8);
    expect(filtersOf('enc2a_conv')).toBe(16);
    expect(filtersOf('enc3a_conv')).toBe(32);
    expect(filtersOf('bottleneck_a_conv')).toBe(64);
    expect(filtersOf('dec3a_conv')).toBe(32);
    expect(filtersOf('dec1a_conv')).toBe(8);
  });

  it('produces nonnegative outputs for random inputs (ReLU head)', () => {
    const model = buildModel(small);
    const out = model.predict(
      tf.randomNormal([3, 16, 16, 2], 0, 5, 'float32', 7)) as tf.Tensor4D;
    expect(out.min().dataSync()[0]).toBeGreaterThanOrEqual(0);
    out.dispose();
  });

  it('plain variant comes from the same config with fewer parameters', () => {
    const modified = buildModel(small);
    const plain = buildModel({ ...small, variant: 'plain' });
    expect(plain.countParams()).toBeLessThan(modified.countParams());
    const plainSkips = plain.layers.filter((l) => l.name.startsWith('skip'));
    expect(plainSkips.length).toBe(0);
  });

  it('rejects input sizes the pooling cannot divide', () => {
    expect(() => buildModel({ ...small, inputSize: 50 })).toThrow(/divisible/);
  });

  it('exports a faithful architecture descriptor', () => {
    const model = buildModel(small);
    const arch = describeArchitecture(small, model);
    expect(arch.skipConvsPerLevel).toEqual([1, 0]);
    expect(arch.inputChannels).toBe(2);
    expect(arch.outputChannels).toBe(1);
    expect(arch.parameters).toBe(model.countParams());
  });
});
