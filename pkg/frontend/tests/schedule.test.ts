import { describe, expect, it } from 'vitest';

import { DEFAULT_TRAIN, learningRateAt, smooth } from '../src/train.js';

describe('learning-rate schedule', () => {
  it('multiplies by the decay rate every decay interval', () => {
    const cfg = { ...DEFAULT_TRAIN };
    expect(learningRateAt(cfg, 0)).toBeCloseTo(3e-4, 12);
    expect(learningRateAt(cfg, 39)).toBeCloseTo(3e-4, 12);
    expect(learningRateAt(cfg, 40)).toBeCloseTo(3e-4 * 0.8, 12);
    // after k decay events the rate is 3e-4 * 0.8^k
    for (const k of [1, 2, 5, 10]) {
      expect(learningRateAt(cfg, 40 * k)).toBeCloseTo(3e-4 * 0.8 ** k, 14);
    }
  });

  it('is strictly decreasing across decay events', () => {
    const cfg = { ...DEFAULT_TRAIN };
    const rates = Array.from({ length: 10 },
                             (_, k) => learningRateAt(cfg, k * cfg.decayEvery));
    for (let i = 1; i < rates.length; i++) {
      expect(rates[i]).toBeLessThan(rates[i - 1]);
    }
  });
});

describe('loss smoothing', () => {
  it('computes a trailing moving average', () => {
    expect(smooth([1, 2, 3, 4], 2)).toEqual([1, 1.5, 2.5, 3.5]);
    expect(smooth([5, 5, 5], 50)).toEqual([5, 5, 5]);
  });
});
