import { describe, expect, it } from "vitest";
import { decodePng, encodeGrayPng } from "./helpers/png.js";

describe("test PNG codec", () => {
  it("round-trips grayscale data", () => {
    const pixels = Uint8Array.from({ length: 24 }, (_, i) => (i * 37) % 256);
    const png = encodeGrayPng(6, 4, pixels);
    const decoded = decodePng(png);
    expect(decoded.width).toBe(6);
    expect(decoded.height).toBe(4);
    expect(decoded.channels).toBe(1);
    expect([...decoded.pixels]).toEqual([...pixels]);
  });

  it("rejects garbage", () => {
    expect(() => decodePng(Uint8Array.from([1, 2, 3]))).toThrow("not a PNG");
  });
});
