/** Client-side series store: monotone reconciliation of sinceSample pages.
 *
 * Pages may arrive out of order or overlap after retries; the store keeps a
 * single gap-free, append-only view keyed by sample index.
 */

import type { Sample, SeriesPage } from "./api.js";

export class SeriesStore {
  private readonly samples: Sample[] = [];

  /** Index to pass as sinceSample on the next poll. */
  get nextIndex(): number {
    return this.samples.length;
  }

  get all(): readonly Sample[] {
    return this.samples;
  }

  /** Merge one API page; ignores duplicates, rejects gaps. Returns the
   * number of newly appended samples. */
  merge(page: SeriesPage): number {
    let appended = 0;
    for (const sample of page.samples) {
      if (sample.index < this.samples.length) continue; // duplicate from overlap
      if (sample.index > this.samples.length) {
        throw new Error(
          `series gap: expected index ${this.samples.length}, got ${sample.index}`,
        );
      }
      this.samples.push(sample);
      appended += 1;
    }
    return appended;
  }

  /** The most recent n samples, oldest first. */
  window(n: number): Sample[] {
    return this.samples.slice(Math.max(this.samples.length - n, 0));
  }

  /**
   * True when any sample in the trailing window deviates from the rest
   * level (taken from the first `restCount` samples) by more than
   * `thresholdOhm` in either component.
   */
  hasDeviation(thresholdOhm: number, restCount = 5): boolean {
    if (this.samples.length <= restCount) return false;
    const rest = this.samples.slice(0, restCount);
    const restR = rest.reduce((s, x) => s + x.R_ohm, 0) / rest.length;
    const restX = rest.reduce((s, x) => s + x.X_ohm, 0) / rest.length;
    return this.samples
      .slice(restCount)
      .some(
        (s) =>
          Math.abs(s.R_ohm - restR) > thresholdOhm ||
          Math.abs(s.X_ohm - restX) > thresholdOhm,
      );
  }
}
