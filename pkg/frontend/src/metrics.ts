/** Evaluation helpers mirroring the imaging pipeline's PSNR definition. */

export function psnr(pred: Float32Array, truth: Float32Array): number {
  if (pred.length !== truth.length) {
    throw new Error(`length mismatch: ${pred.length} vs ${truth.length}`);
  }
  let mse = 0;
  let peak = -Infinity;
  for (let i = 0; i < pred.length; i++) {
    const d = pred[i] - truth[i];
    mse += d * d;
    if (truth[i] > peak) peak = truth[i];
  }
  mse /= pred.length;
  if (mse < 1e-12) return 99.0;
  return Math.min(10 * Math.log10((peak * peak) / mse), 99.0);
}

export function median(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 ? sorted[mid]
    : 0.5 * (sorted[mid - 1] + sorted[mid]);
}
