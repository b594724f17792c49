import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    projects: [
      {
        test: {
          name: "unit",
          environment: "happy-dom",
          include: ["test/unit/**/*.test.ts"],
        },
      },
      {
        test: {
          name: "integration",
          environment: "happy-dom",
          // the deployed UI is served by the API process itself, so the
          // scripted browser runs same-origin against it
          environmentOptions: {
            happyDOM: { url: "http://127.0.0.1:8931" },
          },
          include: ["test/integration.test.ts"],
          globalSetup: "./test/global-setup.ts",
          testTimeout: 120_000,
          hookTimeout: 240_000,
        },
      },
    ],
  },
});
