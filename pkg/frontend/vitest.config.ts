import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // the end-to-end test boots the real HTTP service and replays the
    // whole pipeline through it
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
