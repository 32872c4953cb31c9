import type { RleLabels } from "./types.js";

/** Decode run-length labels into a row-major Int32Array of width*height. */
export function decodeRuns(payload: RleLabels): Int32Array {
  const { width, height, runs } = payload;
  const out = new Int32Array(width * height);
  let pos = 0;
  for (const [label, length] of runs) {
    if (length < 0) throw new Error("negative run length");
    out.fill(label, pos, pos + length);
    pos += length;
  }
  if (pos !== out.length) {
    throw new Error(`runs cover ${pos} pixels, expected ${out.length}`);
  }
  return out;
}

/** Encode a row-major label array back into runs (test helper). */
export function encodeRuns(
  labels: Int32Array,
  width: number,
  height: number,
): RleLabels {
  if (labels.length !== width * height) throw new Error("size mismatch");
  const runs: [number, number][] = [];
  let start = 0;
  for (let i = 1; i <= labels.length; i++) {
    if (i === labels.length || labels[i] !== labels[start]) {
      runs.push([labels[start], i - start]);
      start = i;
    }
  }
  return { width, height, runs };
}
