import { ApiClient, ApiError } from "./api.js";
import { MaskLayer, type PixelChange } from "./maskLayer.js";
import { StrokeBatcher } from "./batcher.js";
import type { MetricsResults, SessionSettings } from "./types.js";

export interface ControllerState {
  revision: number;
  report: MetricsResults | null;
  reportRevision: number | null;
  reportClassIds: number[];
  insufficientLabels: boolean;
  /** True when the displayed report is older than the mask (local edits
   * pending or a newer revision acked). */
  stale: boolean;
  lastError: string | null;
}

const METRICS_DEBOUNCE_MS = 250;

/** Session controller: owns the local mask layer, coalesces edits into
 * batches, and keeps the metrics panel state in sync with the service.
 * No DOM here; the browser shell and the tests drive the same object. */
export class UiSession {
  readonly mask: MaskLayer;
  private readonly batcher: StrokeBatcher;
  private metricsTimer: ReturnType<typeof setTimeout> | null = null;
  private revision = 0;
  private report: MetricsResults | null = null;
  private reportRevision: number | null = null;
  private reportClassIds: number[] = [];
  private insufficientLabels = false;
  private lastError: string | null = null;
  private metricsInFlight: Promise<void> | null = null;
  private undoStack: PixelChange[][] = [];

  onChange: (state: ControllerState) => void = () => {};

  private constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly width: number,
    readonly height: number,
  ) {
    this.mask = new MaskLayer(width, height);
    this.batcher = new StrokeBatcher(
      (strokes) => this.api.postLabels(this.sessionId, strokes),
      ({ revision }) => {
        this.revision = revision;
        this.scheduleMetricsRefresh();
        this.emit();
      },
      (changes, error) => this.rollback(changes, error),
    );
  }

  static async create(
    api: ApiClient,
    image: Blob,
    settings: SessionSettings = {},
  ): Promise<UiSession> {
    const info = await api.createSession(image, settings);
    return new UiSession(api, info.id, info.width, info.height);
  }

  get state(): ControllerState {
    return {
      revision: this.revision,
      report: this.report,
      reportRevision: this.reportRevision,
      reportClassIds: this.reportClassIds,
      insufficientLabels: this.insufficientLabels,
      stale:
        this.batcher.busy ||
        (this.report !== null && this.reportRevision !== this.revision),
      lastError: this.lastError,
    };
  }

  /** Paint immediately into the local layer and queue the server batch. */
  paint(path: Array<{ x: number; y: number }>, classId: number, brushSize = 1): void {
    const { changes, strokes } = this.mask.paint(path, classId, brushSize);
    if (strokes.length === 0) return;
    if (changes.length > 0) this.undoStack.push(changes);
    this.batcher.add(strokes, changes);
    this.emit();
  }

  /** Revert the most recent stroke locally and send the correction. */
  undo(): void {
    const changes = this.undoStack.pop();
    if (!changes) return;
    this.mask.revert(changes);
    const strokes = changes.map((c) => ({
      x: c.index % this.width,
      y: Math.floor(c.index / this.width),
      class_id: c.previous,
    }));
    const inverse = changes.map((c) => ({ index: c.index, previous: c.next, next: c.previous }));
    this.batcher.add(strokes, inverse);
    this.emit();
  }

  private rollback(changes: PixelChange[], error: unknown): void {
    this.mask.revert(changes);
    this.lastError = error instanceof ApiError ? error.detail : String(error);
    this.emit();
  }

  private scheduleMetricsRefresh(): void {
    if (this.metricsTimer !== null) clearTimeout(this.metricsTimer);
    this.metricsTimer = setTimeout(() => {
      this.metricsTimer = null;
      void this.refreshMetrics();
    }, METRICS_DEBOUNCE_MS);
  }

  refreshMetrics(): Promise<void> {
    // Serialize refreshes; the newest always runs after in-flight ones.
    const run = async () => {
      try {
        const body = await this.api.getMetrics(this.sessionId);
        this.report = body.results;
        this.reportRevision = body.revision;
        this.reportClassIds = body.class_ids;
        this.insufficientLabels = false;
        this.lastError = null;
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          this.report = null;
          this.reportRevision = this.revision;
          this.reportClassIds = [];
          this.insufficientLabels = true;
        } else {
          this.lastError = error instanceof ApiError ? error.detail : String(error);
        }
      }
      this.emit();
    };
    const chained = (this.metricsInFlight ?? Promise.resolve()).then(run);
    this.metricsInFlight = chained;
    return chained;
  }

  /** Drain the edit queue and fetch metrics for the final revision.
   * Resolves once the panel reflects every local edit. */
  async sync(): Promise<void> {
    await this.batcher.idle();
    if (this.metricsTimer !== null) {
      clearTimeout(this.metricsTimer);
      this.metricsTimer = null;
    }
    await this.refreshMetrics();
  }

  downloadMaskPng(): Promise<{ bytes: Uint8Array; revision: number | null }> {
    return this.api.getMask(this.sessionId);
  }

  fetchSegmentation(format: "ids" | "color") {
    return this.api.getSegmentation(this.sessionId, format);
  }

  fetchImage() {
    return this.api.getImage(this.sessionId);
  }

  private emit(): void {
    this.onChange(this.state);
  }
}
