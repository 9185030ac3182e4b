/** Cell-grid geometry shared by the overlay canvas and the press handler.
 *
 * The skin is a 16 x 20 chessboard of 10 mm cells; rows are letters A
 * (bottom) to P (top), columns are numbers 1 to 20.
 */

export const GRID_ROWS = 16;
export const GRID_COLS = 20;
export const SKIN_WIDTH_MM = 200;
export const SKIN_HEIGHT_MM = 160;

export const FAMILY_COLORS: Record<string, string> = {
  RED: "#d7301f",
  GRADIENT: "#fdae61",
  GREEN: "#1a9850",
  BLUE: "#4575b4",
};

export interface Cell {
  row: number; // 0 = bottom row (A)
  col: number; // 0 = leftmost column (1)
}

export function cellLabel(cell: Cell): string {
  return `${String.fromCharCode(65 + cell.row)}${cell.col + 1}`;
}

export function parseLabel(label: string): Cell | null {
  const match = /^([A-P])([0-9]{1,2})$/.exec(label);
  if (!match) return null;
  const col = Number(match[2]) - 1;
  if (col < 0 || col >= GRID_COLS) return null;
  return { row: match[1]!.charCodeAt(0) - 65, col };
}

/**
 * Map canvas pixel coordinates to a cell, or null outside the grid.  The
 * canvas draws the skin with y flipped (row A at the bottom).
 */
export function cellAtPixel(
  xPx: number,
  yPx: number,
  widthPx: number,
  heightPx: number,
): Cell | null {
  if (xPx < 0 || yPx < 0 || xPx >= widthPx || yPx >= heightPx) return null;
  const col = Math.floor((xPx / widthPx) * GRID_COLS);
  const rowFromTop = Math.floor((yPx / heightPx) * GRID_ROWS);
  const row = GRID_ROWS - 1 - rowFromTop;
  if (col < 0 || col >= GRID_COLS || row < 0 || row >= GRID_ROWS) return null;
  return { row, col };
}

/** Pixel rectangle of a cell on a canvas of the given size. */
export function cellRect(
  cell: Cell,
  widthPx: number,
  heightPx: number,
): { x: number; y: number; w: number; h: number } {
  const w = widthPx / GRID_COLS;
  const h = heightPx / GRID_ROWS;
  return {
    x: cell.col * w,
    y: (GRID_ROWS - 1 - cell.row) * h,
    w,
    h,
  };
}
