import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    testTimeout: 300_000,
    hookTimeout: 120_000,
    // conv training on the JS cpu backend is single-threaded and heavy;
    // run files sequentially so timings stay predictable
    fileParallelism: false,
  },
});
