/**
 * Reader for the training-corpus directory layout produced by the imaging
 * pipeline: manifest.json plus sample_%05d/ directories holding little-endian
 * f32 images (chi_re, chi_im, gt_eps) on the inverse grid.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

export interface CorpusManifest {
  version: number;
  geometry: {
    inverse_grid: [number, number];
    doi_size_m: [number, number];
    node_count: number;
  };
  alpha: number;
  seed: number;
  splits: { train: string[]; val: string[]; test: string[] };
  format: string;
  provenance_hash: string;
  partial: boolean;
}

export interface Sample {
  id: string;
  chiRe: Float32Array;
  chiIm: Float32Array;
  gtEps: Float32Array;
}

export function readManifest(corpusDir: string): CorpusManifest {
  const raw = JSON.parse(
    fs.readFileSync(path.join(corpusDir, 'manifest.json'), 'utf-8'));
  if (raw.format !== 'f32le-rowmajor') {
    throw new Error(`unsupported corpus format: ${raw.format}`);
  }
  return raw as CorpusManifest;
}

export function gridShape(manifest: CorpusManifest): [number, number] {
  const [nx, ny] = manifest.geometry.inverse_grid;
  return [ny, nx]; // row-major images
}

function readF32(file: string, count: number): Float32Array {
  const buf = fs.readFileSync(file);
  if (buf.byteLength !== 4 * count) {
    throw new Error(`${file}: expected ${4 * count} bytes, got ${buf.byteLength}`);
  }
  // node Buffers are little-endian views already on every supported platform
  return new Float32Array(buf.buffer, buf.byteOffset, count).slice();
}

export function readSample(corpusDir: string, id: string,
                           shape: [number, number]): Sample {
  const dir = path.join(corpusDir, id);
  const n = shape[0] * shape[1];
  return {
    id,
    chiRe: readF32(path.join(dir, 'chi_re.f32'), n),
    chiIm: readF32(path.join(dir, 'chi_im.f32'), n),
    gtEps: readF32(path.join(dir, 'gt_eps.f32'), n),
  };
}

export function readSplit(corpusDir: string, manifest: CorpusManifest,
                          split: 'train' | 'val' | 'test'): Sample[] {
  const shape = gridShape(manifest);
  return manifest.splits[split].map((id) => readSample(corpusDir, id, shape));
}

/** Smallest multiple of 2^depth that fits the image (50 -> 64 at depth 4). */
export function paddedSize(size: number, depth: number): number {
  const unit = 2 ** depth;
  return Math.ceil(size / unit) * unit;
}

/**
 * Stack samples into NHWC tensors, reflect-padding each image up to a
 * pooling-compatible size. Channel order: [re, im]; labels get one channel.
 */
export function toTensors(samples: Sample[], shape: [number, number],
                          depth: number): { x: tf.Tensor4D; y: tf.Tensor4D } {
  const [h, w] = shape;
  const ph = paddedSize(h, depth);
  const pw = paddedSize(w, depth);
  return tf.tidy(() => {
    const re = tf.tensor4d(
      concatenate(samples.map((s) => s.chiRe)), [samples.length, h, w, 1]);
    const im = tf.tensor4d(
      concatenate(samples.map((s) => s.chiIm)), [samples.length, h, w, 1]);
    const eps = tf.tensor4d(
      concatenate(samples.map((s) => s.gtEps)), [samples.length, h, w, 1]);
    const x = reflectPad(tf.concat([re, im], 3), ph, pw);
    const y = reflectPad(eps, ph, pw);
    return { x: x as tf.Tensor4D, y: y as tf.Tensor4D };
  });
}

export function reflectPad(t: tf.Tensor4D, toH: number, toW: number): tf.Tensor4D {
  const [, h, w] = t.shape;
  if (h === toH && w === toW) return t.clone() as tf.Tensor4D;
  return tf.mirrorPad(t, [[0, 0], [0, toH - h], [0, toW - w], [0, 0]],
                      'reflect') as tf.Tensor4D;
}

/** Undo the padding: crop network output back to the corpus grid. */
export function cropTo(t: tf.Tensor4D, h: number, w: number): tf.Tensor4D {
  return tf.slice(t, [0, 0, 0, 0], [t.shape[0], h, w, t.shape[3]]) as tf.Tensor4D;
}

function concatenate(arrays: Float32Array[]): Float32Array {
  const out = new Float32Array(arrays.reduce((n, a) => n + a.length, 0));
  let offset = 0;
  for (const a of arrays) {
    out.set(a, offset);
    offset += a.length;
  }
  return out;
}

export function writeF32(file: string, data: Float32Array): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, Buffer.from(data.buffer, data.byteOffset,
                                     data.byteLength));
}

/** Deterministic in-place shuffle (mulberry32 PRNG). */
export function seededShuffle<T>(items: T[], seed: number): T[] {
  let a = (seed >>> 0) || 1;
  const rand = () => {
    a |= 0; a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  for (let i = items.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [items[i], items[j]] = [items[j], items[i]];
  }
  return items;
}
