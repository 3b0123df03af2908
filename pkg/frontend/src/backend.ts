/**
 * Backend selection: training needs conv gradient kernels, which only the
 * JS cpu backend provides in this runtime; forward-only inference can use
 * the faster wasm backend when requested.
 */

import * as tf from '@tensorflow/tfjs';

export async function useCpu(): Promise<void> {
  await tf.setBackend('cpu');
  await tf.ready();
}

export async function useInferenceBackend(prefer: 'wasm' | 'cpu'): Promise<string> {
  if (prefer === 'wasm') {
    try {
      const wasm = await import('@tensorflow/tfjs-backend-wasm');
      const url = new URL('../node_modules/@tensorflow/tfjs-backend-wasm/dist/',
                          import.meta.url);
      wasm.setWasmPaths(url.pathname);
      if (await tf.setBackend('wasm')) {
        await tf.ready();
        return 'wasm';
      }
    } catch {
      // fall through to cpu
    }
  }
  await useCpu();
  return 'cpu';
}
