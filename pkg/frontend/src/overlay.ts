import { ApiClient, ServiceError } from "./api.js";
import type { LabelState, SessionCreated } from "./types.js";

export interface Glyph {
  x: number;
  y: number;
  cls: string;
  label: string; // placement-order label: f1, b1, f2, ...
}

export interface OverlaySnapshot {
  state: LabelState;
  glyphs: Glyph[];
}

/** FNV-1a over the canonical JSON of a snapshot; stable across runs. */
export function overlayHash(snapshot: OverlaySnapshot): string {
  const canonical = JSON.stringify({
    kind: snapshot.state.kind,
    labels: snapshot.state.labels,
    classes: snapshot.state.classes,
    glyphs: snapshot.glyphs,
  });
  let hash = 0x811c9dc5;
  for (let i = 0; i < canonical.length; i++) {
    hash ^= canonical.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
}

/**
 * Client-side session state: marker glyph history, optimistic placement
 * with rollback on rejection, and serialized mutations (one in flight; the
 * service recomputes from its snapshot, so queued clicks apply in order).
 * All segmentation decisions happen on the server.
 */
export class UiSession {
  glyphs: Glyph[] = [];
  state: LabelState;
  lastError: string | null = null;
  private counters = new Map<string, number>();
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private api: ApiClient,
    private info: SessionCreated,
    initial: LabelState,
  ) {
    this.state = initial;
  }

  get sessionId(): string {
    return this.info.session_id;
  }

  get width(): number {
    return this.info.width;
  }

  get height(): number {
    return this.info.height;
  }

  snapshot(): OverlaySnapshot {
    return {
      state: this.state,
      glyphs: this.glyphs.map((g) => ({ ...g })),
    };
  }

  private nextLabel(cls: string): string {
    const n = (this.counters.get(cls) ?? 0) + 1;
    return `${cls}${n}`;
  }

  private enqueue<T>(op: () => Promise<T>): Promise<T> {
    const next = this.queue.then(op, op);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /**
   * Place a marker. Out-of-bounds clicks are ignored client-side; service
   * rejections roll the optimistic glyph back and surface the message.
   * Returns true when the marker was accepted.
   */
  placeMarker(x: number, y: number, cls: string): Promise<boolean> {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      return Promise.resolve(false);
    }
    return this.enqueue(async () => {
      const glyph: Glyph = { x, y, cls, label: this.nextLabel(cls) };
      this.glyphs.push(glyph); // optimistic
      this.counters.set(cls, (this.counters.get(cls) ?? 0) + 1);
      try {
        this.state = await this.api.addMarker(this.sessionId, x, y, cls);
        this.lastError = null;
        return true;
      } catch (err) {
        this.glyphs.pop(); // rollback
        this.counters.set(cls, (this.counters.get(cls) ?? 1) - 1);
        this.lastError =
          err instanceof ServiceError ? err.detail : String(err);
        return false;
      }
    });
  }

  undo(): Promise<boolean> {
    return this.enqueue(async () => {
      if (this.glyphs.length === 0) return false;
      const popped = this.glyphs[this.glyphs.length - 1];
      this.state = await this.api.undoMarker(this.sessionId);
      this.glyphs.pop();
      this.counters.set(popped.cls, (this.counters.get(popped.cls) ?? 1) - 1);
      this.lastError = null;
      return true;
    });
  }
}

export async function openSession(
  api: ApiClient,
  image: Blob,
  params: { m: number; k?: number; alpha?: number },
): Promise<UiSession> {
  const created = await api.createSession(image, params);
  const initial = await api.getLabels(created.session_id);
  return new UiSession(api, created, initial);
}
