import { defineConfig } from "vitest/config";

export default defineConfig({
  // Relative asset paths so dist/ can be served by `learnsim serve --static`.
  base: "./",
  build: { outDir: "dist" },
  test: { environment: "node", include: ["src/**/*.test.ts"] },
});
