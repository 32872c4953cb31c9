import { ApiClient } from "./api.js";
import { boundaryMask } from "./boundaries.js";
import { decodeRuns } from "./rle.js";
import { openSession, UiSession } from "./overlay.js";
import type { LabelState } from "./types.js";

// class colors follow the red-foreground / blue-background convention;
// extra classes rotate through the tail of the palette
const CLASS_COLORS: Record<string, string> = { f: "#e03131", b: "#1c7ed6" };
const EXTRA_COLORS = ["#2f9e44", "#f08c00", "#9c36b5", "#0ca678"];

function classColor(cls: string, index: number): string {
  return CLASS_COLORS[cls] ?? EXTRA_COLORS[index % EXTRA_COLORS.length];
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private api = new ApiClient("");
  private session: UiSession | null = null;
  private imageBitmap: ImageBitmap | null = null;

  private imageCanvas = el<HTMLCanvasElement>("image-layer");
  private classCanvas = el<HTMLCanvasElement>("class-layer");
  private lineCanvas = el<HTMLCanvasElement>("line-layer");
  private glyphCanvas = el<HTMLCanvasElement>("glyph-layer");
  private status = el<HTMLElement>("status");
  private classSelect = el<HTMLSelectElement>("class-select");

  constructor() {
    el<HTMLInputElement>("file-input").addEventListener("change", (ev) => {
      const input = ev.target as HTMLInputElement;
      if (input.files && input.files[0]) void this.upload(input.files[0]);
    });
    el<HTMLButtonElement>("undo-button").addEventListener("click", () => {
      void this.undo();
    });
    this.glyphCanvas.addEventListener("click", (ev) => {
      void this.click(ev);
    });
  }

  private say(text: string) {
    this.status.textContent = text;
  }

  private resize(width: number, height: number) {
    for (const canvas of [
      this.imageCanvas,
      this.classCanvas,
      this.lineCanvas,
      this.glyphCanvas,
    ]) {
      canvas.width = width;
      canvas.height = height;
    }
  }

  async upload(file: File) {
    this.say("computing superpixels...");
    const m = Number(el<HTMLInputElement>("superpixel-input").value) || 300;
    try {
      this.session = await openSession(this.api, file, { m });
    } catch (err) {
      this.say(`upload failed: ${err}`);
      return;
    }
    this.resize(this.session.width, this.session.height);
    this.imageBitmap = await createImageBitmap(file);
    const ctx = this.imageCanvas.getContext("2d")!;
    ctx.drawImage(this.imageBitmap, 0, 0);
    this.render(this.session.state);
    this.say(
      `session ready: ${this.session.state.num_regions} superpixels; ` +
        "click to place markers",
    );
  }

  private render(state: LabelState) {
    if (!this.session) return;
    const { width, height } = this.session;

    // class-map tint
    const classCtx = this.classCanvas.getContext("2d")!;
    classCtx.clearRect(0, 0, width, height);
    if (state.kind === "classes") {
      const labels = decodeRuns(state.labels);
      const img = classCtx.createImageData(width, height);
      const byInt = new Map<number, [number, number, number]>();
      Object.entries(state.classes).forEach(([cls, value], idx) => {
        const hex = classColor(cls, idx);
        byInt.set(value, [
          parseInt(hex.slice(1, 3), 16),
          parseInt(hex.slice(3, 5), 16),
          parseInt(hex.slice(5, 7), 16),
        ]);
      });
      for (let i = 0; i < labels.length; i++) {
        const rgb = byInt.get(labels[i]);
        if (!rgb) continue;
        img.data[i * 4] = rgb[0];
        img.data[i * 4 + 1] = rgb[1];
        img.data[i * 4 + 2] = rgb[2];
        img.data[i * 4 + 3] = 110;
      }
      classCtx.putImageData(img, 0, 0);
    }

    // 1-px boundaries
    const lineCtx = this.lineCanvas.getContext("2d")!;
    lineCtx.clearRect(0, 0, width, height);
    const mask = boundaryMask(state.labels);
    const lineImg = lineCtx.createImageData(width, height);
    for (let i = 0; i < mask.length; i++) {
      if (mask[i]) {
        lineImg.data[i * 4 + 0] = 255;
        lineImg.data[i * 4 + 1] = 214;
        lineImg.data[i * 4 + 2] = 0;
        lineImg.data[i * 4 + 3] = 200;
      }
    }
    lineCtx.putImageData(lineImg, 0, 0);

    // marker glyphs with placement-order labels
    const glyphCtx = this.glyphCanvas.getContext("2d")!;
    glyphCtx.clearRect(0, 0, width, height);
    glyphCtx.font = "11px sans-serif";
    this.session.glyphs.forEach((glyph, idx) => {
      const color = classColor(glyph.cls, idx);
      glyphCtx.fillStyle = color;
      glyphCtx.beginPath();
      glyphCtx.arc(glyph.x, glyph.y, 3.5, 0, Math.PI * 2);
      glyphCtx.fill();
      glyphCtx.fillText(glyph.label, glyph.x + 5, glyph.y - 5);
    });
  }

  async click(ev: MouseEvent) {
    if (!this.session) return;
    const rect = this.glyphCanvas.getBoundingClientRect();
    const x = Math.floor(ev.clientX - rect.left);
    const y = Math.floor(ev.clientY - rect.top);
    const cls = this.classSelect.value;
    this.say("merging...");
    const ok = await this.session.placeMarker(x, y, cls);
    this.render(this.session.state);
    this.say(
      ok
        ? `placed ${this.session.glyphs[this.session.glyphs.length - 1].label}`
        : `rejected: ${this.session.lastError ?? "outside image"}`,
    );
  }

  async undo() {
    if (!this.session) return;
    const ok = await this.session.undo();
    this.render(this.session.state);
    this.say(ok ? "undone" : "nothing to undo");
  }
}

new App();
