import { decodeRuns } from "./rle.js";
import type { RleLabels } from "./types.js";

/**
 * 1-px boundary mask between differing 4-neighbors, decoded from runs.
 * Returns a Uint8Array of width*height where 1 marks a boundary pixel.
 */
export function boundaryMask(payload: RleLabels): Uint8Array {
  const { width, height } = payload;
  const labels = decodeRuns(payload);
  const mask = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const row = y * width;
    for (let x = 0; x < width; x++) {
      const here = labels[row + x];
      if (x + 1 < width && labels[row + x + 1] !== here) {
        mask[row + x] = 1;
        mask[row + x + 1] = 1;
      }
      if (y + 1 < height && labels[row + width + x] !== here) {
        mask[row + x] = 1;
        mask[row + width + x] = 1;
      }
    }
  }
  return mask;
}

export function countBoundaryPixels(mask: Uint8Array): number {
  let n = 0;
  for (const v of mask) n += v;
  return n;
}
