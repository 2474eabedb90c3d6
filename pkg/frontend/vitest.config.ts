import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: {
        // Download anchors must not navigate the page, as in real browsers.
        settings: { navigation: { disableMainFrameNavigation: true } },
      },
    },
    globalSetup: ["tests/setup/service.ts"],
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
