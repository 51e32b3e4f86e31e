import { classColor } from "./palette.js";
import type { OverlayMode } from "./types.js";

/** Pure pixel compositors for the overlay canvas. All buffers are RGBA,
 * row-major, length 4*width*height. */

export function noOverlay(base: Uint8ClampedArray): Uint8ClampedArray {
  return base.slice();
}

/** Alpha-blend the palette color of each segmented class over the image;
 * class 0 stays fully transparent (raw image shows through). */
export function segmentationOverlay(
  base: Uint8ClampedArray,
  classIds: Uint8Array,
  opacity = 0.55,
): Uint8ClampedArray {
  if (base.length !== classIds.length * 4) throw new Error("buffer sizes disagree");
  const out = base.slice();
  for (let i = 0; i < classIds.length; i++) {
    const cls = classIds[i];
    if (cls === 0) continue;
    const [r, g, b] = classColor(cls);
    const o = i * 4;
    out[o] = Math.round(base[o] * (1 - opacity) + r * opacity);
    out[o + 1] = Math.round(base[o + 1] * (1 - opacity) + g * opacity);
    out[o + 2] = Math.round(base[o + 2] * (1 - opacity) + b * opacity);
    out[o + 3] = 255;
  }
  return out;
}

/** Show the image content only where the segmentation says `classId`;
 * everything else goes white. This is the "remove the bleedthrough" view. */
export function isolateClassOverlay(
  base: Uint8ClampedArray,
  classIds: Uint8Array,
  classId: number,
): Uint8ClampedArray {
  if (base.length !== classIds.length * 4) throw new Error("buffer sizes disagree");
  const out = new Uint8ClampedArray(base.length);
  for (let i = 0; i < classIds.length; i++) {
    const o = i * 4;
    if (classIds[i] === classId) {
      out[o] = base[o];
      out[o + 1] = base[o + 1];
      out[o + 2] = base[o + 2];
    } else {
      out[o] = out[o + 1] = out[o + 2] = 255;
    }
    out[o + 3] = 255;
  }
  return out;
}

export function composite(
  base: Uint8ClampedArray,
  classIds: Uint8Array | null,
  mode: OverlayMode,
): Uint8ClampedArray {
  switch (mode.kind) {
    case "none":
      return noOverlay(base);
    case "segmentation":
      if (!classIds) throw new Error("segmentation not available yet");
      return segmentationOverlay(base, classIds);
    case "single-class":
      if (!classIds) throw new Error("segmentation not available yet");
      return isolateClassOverlay(base, classIds, mode.classId);
  }
}
