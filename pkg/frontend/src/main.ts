import { ApiClient } from "./api.js";
import { UiSession, type ControllerState } from "./controller.js";
import { metricsRows } from "./metricsFormat.js";
import { composite } from "./overlay.js";
import { classColor, cssColor } from "./palette.js";
import type { OverlayMode } from "./types.js";

const N_PALETTE_CLASSES = 6;
const MASK_ALPHA = 150;

const api = new ApiClient("");
let session: UiSession | null = null;
let activeClass = 1;
let brushSize = 3;
let overlayMode: OverlayMode = { kind: "none" };
let baseImage: ImageData | null = null;
let segmentationIds: Uint8Array | null = null;
let classNames = new Map<number, string>();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

const imageCanvas = $("image-canvas") as unknown as HTMLCanvasElement;
const overlayCanvas = $("overlay-canvas") as unknown as HTMLCanvasElement;
const maskCanvas = $("mask-canvas") as unknown as HTMLCanvasElement;

function ctx(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const c = canvas.getContext("2d");
  if (!c) throw new Error("2d context unavailable");
  return c;
}

async function pngToImageData(bytes: Uint8Array): Promise<ImageData> {
  const bitmap = await createImageBitmap(new Blob([bytes.buffer as ArrayBuffer], { type: "image/png" }));
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const c = ctx(scratch as HTMLCanvasElement);
  c.drawImage(bitmap, 0, 0);
  return c.getImageData(0, 0, bitmap.width, bitmap.height);
}

async function openImage(file: File): Promise<void> {
  const settings: Record<string, string> = {};
  const channel = ($("channel-select") as HTMLSelectElement).value;
  if (channel) settings["channel"] = channel;
  session = await UiSession.create(api, file, settings);
  session.onChange = render;
  classNames = new Map();
  segmentationIds = null;

  for (const canvas of [imageCanvas, overlayCanvas, maskCanvas]) {
    canvas.width = session.width;
    canvas.height = session.height;
  }
  const served = await session.fetchImage();
  baseImage = await pngToImageData(served.bytes);
  ctx(imageCanvas).putImageData(baseImage, 0, 0);
  $("editor").classList.remove("hidden");
  render(session.state);
}

function renderMaskLayer(): void {
  if (!session) return;
  const { width, height } = session;
  const out = new ImageData(width, height);
  const data = session.mask.data;
  for (let i = 0; i < data.length; i++) {
    const cls = data[i];
    if (cls === 0) continue;
    const [r, g, b] = classColor(cls);
    const o = i * 4;
    out.data[o] = r;
    out.data[o + 1] = g;
    out.data[o + 2] = b;
    out.data[o + 3] = MASK_ALPHA;
  }
  ctx(maskCanvas).putImageData(out, 0, 0);
}

async function renderOverlay(): Promise<void> {
  const canvas = ctx(overlayCanvas);
  if (!session || !baseImage || overlayMode.kind === "none") {
    canvas.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
    return;
  }
  if (!segmentationIds) {
    try {
      const payload = await session.fetchSegmentation("ids");
      const decoded = await pngToImageData(payload.bytes);
      // grayscale PNG: the class id sits in the red channel
      const ids = new Uint8Array(decoded.width * decoded.height);
      for (let i = 0; i < ids.length; i++) ids[i] = decoded.data[i * 4];
      segmentationIds = ids;
    } catch {
      canvas.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
      return;
    }
  }
  const blended = composite(
    new Uint8ClampedArray(baseImage.data),
    segmentationIds,
    overlayMode,
  );
  const frame = new ImageData(baseImage.width, baseImage.height);
  frame.data.set(blended);
  canvas.putImageData(frame, 0, 0);
}

function render(state: ControllerState): void {
  renderMaskLayer();
  const panel = $("metrics-body");
  const status = $("status-line");
  status.textContent = state.lastError
    ? `error: ${state.lastError}`
    : `revision ${state.revision}${state.stale ? " (updating…)" : ""}`;

  if (state.insufficientLabels) {
    panel.innerHTML = `<p class="notice">Label at least two classes to measure contrast.</p>`;
    $("metrics").classList.remove("stale");
    return;
  }
  if (!state.report) {
    panel.innerHTML = `<p class="notice">Paint some labels to begin.</p>`;
    return;
  }
  $("metrics").classList.toggle("stale", state.stale);
  const rows = metricsRows(state.report, state.reportClassIds)
    .map(
      (row) =>
        `<tr><td>${row.label}</td><td class="value" title="${row.title}">${row.display}</td></tr>`,
    )
    .join("");
  let pairwise = "";
  if (state.report.pairwise) {
    const ids = state.report.pairwise_class_ids ?? state.reportClassIds;
    const header = ids.map((i) => `<th>${className(i)}</th>`).join("");
    const body = state.report.pairwise
      .map(
        (row, r) =>
          `<tr><th>${className(ids[r])}</th>${row
            .map((v) => `<td class="value" title="${v}">${v.toFixed(3)}</td>`)
            .join("")}</tr>`,
      )
      .join("");
    pairwise = `<h3>pairwise NPC</h3><table class="pairwise"><tr><th></th>${header}</tr>${body}</table>`;
  }
  panel.innerHTML =
    `<table class="scores">${rows}</table>` +
    `<p class="fine">computed at revision ${state.reportRevision}</p>` +
    pairwise;
  segmentationIds = null; // labels changed; next overlay paint refetches
  void renderOverlay();
}

function className(id: number): string {
  return classNames.get(id) ?? `class ${id}`;
}

function buildPaletteButtons(): void {
  const host = $("palette");
  host.innerHTML = "";
  for (let id = 1; id <= N_PALETTE_CLASSES; id++) {
    const btn = document.createElement("button");
    btn.className = "class-btn";
    btn.style.setProperty("--swatch", cssColor(id));
    btn.dataset["classId"] = String(id);
    btn.textContent = className(id);
    btn.title = "click to paint, double-click to rename";
    btn.addEventListener("click", () => {
      activeClass = id;
      highlightActive();
    });
    btn.addEventListener("dblclick", () => {
      const name = prompt(`Name for class ${id}`, className(id));
      if (name) {
        classNames.set(id, name);
        btn.textContent = name;
      }
    });
    host.appendChild(btn);
  }
  const eraser = document.createElement("button");
  eraser.className = "class-btn eraser";
  eraser.dataset["classId"] = "0";
  eraser.textContent = "eraser";
  eraser.addEventListener("click", () => {
    activeClass = 0;
    highlightActive();
  });
  host.appendChild(eraser);
  highlightActive();
}

function highlightActive(): void {
  document.querySelectorAll<HTMLButtonElement>(".class-btn").forEach((btn) => {
    btn.classList.toggle("active", btn.dataset["classId"] === String(activeClass));
  });
}

function canvasPoint(event: MouseEvent): { x: number; y: number } | null {
  if (!session) return null;
  const rect = maskCanvas.getBoundingClientRect();
  const x = Math.floor(((event.clientX - rect.left) / rect.width) * session.width);
  const y = Math.floor(((event.clientY - rect.top) / rect.height) * session.height);
  return session.mask.inBounds(x, y) ? { x, y } : null;
}

function wirePainting(): void {
  let painting = false;
  maskCanvas.addEventListener("mousedown", (event) => {
    painting = true;
    const p = canvasPoint(event);
    if (p && session) session.paint([p], activeClass, brushSize);
  });
  window.addEventListener("mousemove", (event) => {
    if (!painting) return;
    const p = canvasPoint(event);
    if (p && session) session.paint([p], activeClass, brushSize);
  });
  window.addEventListener("mouseup", () => {
    painting = false;
  });
}

function wireControls(): void {
  ($("file-input") as HTMLInputElement).addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (file) void openImage(file);
  });
  ($("brush-size") as HTMLInputElement).addEventListener("input", (event) => {
    brushSize = Number((event.target as HTMLInputElement).value);
    $("brush-size-label").textContent = String(brushSize);
  });
  ($("overlay-mode") as HTMLSelectElement).addEventListener("change", (event) => {
    const value = (event.target as HTMLSelectElement).value;
    if (value === "none") overlayMode = { kind: "none" };
    else if (value === "segmentation") overlayMode = { kind: "segmentation" };
    else overlayMode = { kind: "single-class", classId: Number(value.split(":")[1]) };
    void renderOverlay();
  });
  $("undo-btn").addEventListener("click", () => session?.undo());
  const modeSelect = $("overlay-mode") as HTMLSelectElement;
  for (let id = 1; id <= N_PALETTE_CLASSES; id++) {
    const opt = document.createElement("option");
    opt.value = `class:${id}`;
    opt.textContent = `only class ${id}`;
    modeSelect.appendChild(opt);
  }
}

buildPaletteButtons();
wirePainting();
wireControls();
