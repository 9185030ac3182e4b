import { describe, expect, it } from "vitest";

import {
  GRID_COLS,
  GRID_ROWS,
  cellAtPixel,
  cellLabel,
  cellRect,
  parseLabel,
} from "../src/grid.js";

describe("labels", () => {
  it("round-trips every cell", () => {
    for (let row = 0; row < GRID_ROWS; row++) {
      for (let col = 0; col < GRID_COLS; col++) {
        expect(parseLabel(cellLabel({ row, col }))).toEqual({ row, col });
      }
    }
  });

  it("rejects malformed labels", () => {
    for (const bad of ["Q1", "A0", "A21", "11", "AA1", "", "a5"]) {
      expect(parseLabel(bad)).toBeNull();
    }
  });
});

describe("cellAtPixel", () => {
  const W = 500;
  const H = 400;

  it("maps the bottom-left pixel to A1", () => {
    expect(cellLabel(cellAtPixel(0, H - 1, W, H)!)).toBe("A1");
  });

  it("maps the top-right pixel to P20", () => {
    expect(cellLabel(cellAtPixel(W - 1, 0, W, H)!)).toBe("P20");
  });

  it("returns null outside the canvas", () => {
    expect(cellAtPixel(-1, 10, W, H)).toBeNull();
    expect(cellAtPixel(10, H, W, H)).toBeNull();
  });

  it("inverts cellRect centres", () => {
    for (const cell of [
      { row: 0, col: 0 },
      { row: 7, col: 11 },
      { row: 15, col: 19 },
    ]) {
      const rect = cellRect(cell, W, H);
      const found = cellAtPixel(rect.x + rect.w / 2, rect.y + rect.h / 2, W, H);
      expect(found).toEqual(cell);
    }
  });
});
