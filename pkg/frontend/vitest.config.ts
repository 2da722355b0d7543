import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // the flow test boots the HTTP service in a subprocess
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
