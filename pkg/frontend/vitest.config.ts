import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    globalSetup: ["tests/setup/service.ts"],
    environment: "node",
    testTimeout: 30_000,
    hookTimeout: 30_000,
    // tests share one live service and publish increasing checkpoints,
    // so files must not interleave
    fileParallelism: false,
  },
});
