/** Class colors; must stay in sync with the service's colorized output.
 * Class k uses entry k-1 (cycled); class 0 renders as transparency. */
export const PALETTE: ReadonlyArray<readonly [number, number, number]> = [
  [230, 25, 75],
  [60, 180, 75],
  [0, 130, 200],
  [255, 225, 25],
  [145, 30, 180],
  [245, 130, 48],
  [70, 240, 240],
  [240, 50, 230],
  [210, 245, 60],
  [0, 128, 128],
  [170, 110, 40],
  [128, 128, 128],
];

export function classColor(classId: number): readonly [number, number, number] {
  if (classId < 1) throw new Error("class 0 has no color; it is transparent");
  return PALETTE[(classId - 1) % PALETTE.length];
}

export function cssColor(classId: number): string {
  const [r, g, b] = classColor(classId);
  return `rgb(${r}, ${g}, ${b})`;
}
