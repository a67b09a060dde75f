export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  flush(): void;
}

/** Trailing-edge debounce; repeated calls within waitMs collapse to one. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void, waitMs: number): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;

  const run = (...args: A) => {
    pending = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      const captured = pending as A;
      pending = null;
      fn(...captured);
    }, waitMs);
  };
  run.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    pending = null;
  };
  run.flush = () => {
    if (timer === null || pending === null) return;
    clearTimeout(timer);
    timer = null;
    const captured = pending;
    pending = null;
    fn(...captured);
  };
  return run;
}
