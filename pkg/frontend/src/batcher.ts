import type { Stroke } from "./types.js";
import type { PixelChange } from "./maskLayer.js";

export interface BatchOutcome {
  revision: number;
  strokes: Stroke[];
}

/** One in-flight stroke batch at a time; strokes queued while a batch is on
 * the wire coalesce into the next one. A rejected batch hands its pixel
 * changes back for rollback and drops them from the queue. */
export class StrokeBatcher {
  private pendingStrokes: Stroke[] = [];
  private pendingChanges: PixelChange[] = [];
  private inFlight = false;
  private waiters: Array<() => void> = [];

  constructor(
    private readonly send: (strokes: Stroke[]) => Promise<number>,
    private readonly onAck: (outcome: BatchOutcome) => void,
    private readonly onReject: (changes: PixelChange[], error: unknown) => void,
  ) {}

  add(strokes: Stroke[], changes: PixelChange[]): void {
    this.pendingStrokes.push(...strokes);
    this.pendingChanges.push(...changes);
    void this.pump();
  }

  get busy(): boolean {
    return this.inFlight || this.pendingStrokes.length > 0;
  }

  /** Resolves once the queue is drained and nothing is in flight. */
  idle(): Promise<void> {
    if (!this.busy) return Promise.resolve();
    return new Promise((resolve) => this.waiters.push(resolve));
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.pendingStrokes.length === 0) return;
    this.inFlight = true;
    const strokes = this.pendingStrokes;
    const changes = this.pendingChanges;
    this.pendingStrokes = [];
    this.pendingChanges = [];
    try {
      const revision = await this.send(strokes);
      this.onAck({ revision, strokes });
    } catch (error) {
      this.onReject(changes, error);
    } finally {
      this.inFlight = false;
      if (this.pendingStrokes.length > 0) {
        void this.pump();
      } else {
        const waiters = this.waiters;
        this.waiters = [];
        for (const resolve of waiters) resolve();
      }
    }
  }
}
