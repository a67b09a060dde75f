// Declared display rounding: engagement points show one decimal; the
// underlying values always come straight from API responses.

export function points(value: number): string {
  const rounded = Number(value.toFixed(1));
  return (Object.is(rounded, -0) ? 0 : rounded).toFixed(1);
}

export function signedPoints(value: number): string {
  const text = points(value);
  return value > 0 && !text.startsWith("-") ? `+${text}` : text;
}

export function weight(value: number): string {
  return (value >= 0 ? "+" : "") + value.toFixed(2);
}

export function percent(value: number): string {
  return `${points(value)}%`;
}

export function compact(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(Math.abs(value) >= 100 ? 1 : 2);
}
