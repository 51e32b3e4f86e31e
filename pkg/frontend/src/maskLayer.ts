import type { Stroke } from "./types.js";

export interface PixelChange {
  index: number;
  previous: number;
  next: number;
}

/** The local paint layer: one byte per pixel, 0 = unlabeled. Paint calls
 * return the exact changes so a rejected batch can be rolled back. */
export class MaskLayer {
  readonly data: Uint8Array;

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    if (width < 1 || height < 1) throw new Error("mask needs positive dimensions");
    this.data = new Uint8Array(width * height);
  }

  inBounds(x: number, y: number): boolean {
    return x >= 0 && x < this.width && y >= 0 && y < this.height;
  }

  at(x: number, y: number): number {
    return this.data[y * this.width + x];
  }

  /** Stamp a round brush at every path point. Returns the net changes and
   * the per-pixel strokes to send (deduplicated, last write wins). */
  paint(path: Array<{ x: number; y: number }>, classId: number, brushSize = 1): {
    changes: PixelChange[];
    strokes: Stroke[];
  } {
    const radius = Math.max(0, Math.floor(brushSize / 2));
    const touched = new Map<number, number>(); // index -> previous value
    for (const point of path) {
      for (let dy = -radius; dy <= radius; dy++) {
        for (let dx = -radius; dx <= radius; dx++) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const x = point.x + dx;
          const y = point.y + dy;
          if (!this.inBounds(x, y)) continue;
          const index = y * this.width + x;
          if (!touched.has(index)) touched.set(index, this.data[index]);
          this.data[index] = classId;
        }
      }
    }
    const changes: PixelChange[] = [];
    const strokes: Stroke[] = [];
    for (const [index, previous] of touched) {
      const next = this.data[index];
      if (next !== previous) changes.push({ index, previous, next });
      strokes.push({ x: index % this.width, y: Math.floor(index / this.width), class_id: next });
    }
    return { changes, strokes };
  }

  revert(changes: PixelChange[]): void {
    for (const change of changes) this.data[change.index] = change.previous;
  }

  labeledClassIds(): number[] {
    const seen = new Set<number>();
    for (const value of this.data) if (value > 0) seen.add(value);
    return [...seen].sort((a, b) => a - b);
  }

  bytes(): Uint8Array {
    return this.data.slice();
  }
}
