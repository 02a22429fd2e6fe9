"""Compare the compiled and numpy sampling kernels.

    python benchmarks/bench_kernels.py --shots 1000000 --repeat 3
"""

import argparse
import time

import numpy as np

from phaseconj import _backend
from phaseconj.measurement import batch
from phaseconj.protocols import Strategy, estimator_readout
from phaseconj.rng import RngStream


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    args = ap.parse_args()

    # the numpy fallback is the reference for speedups
    names = sorted(_backend.available(), key=lambda n: n != "python")
    print(f"backends: {', '.join(names)} (default {_backend.NAME})")
    rng = RngStream(0xC0FFEE, 1)
    readout = estimator_readout(Strategy.PARALLEL_PRODUCT, 1.0, -1.0)

    print(f"\nraw normals, {args.shots} x 4")
    ref = None
    for name in names:
        z, t = best_of(lambda: rng.normals(0, args.shots, 4, backend=name), args.repeat)
        note = ""
        if ref is None:
            ref, ref_t = z, t
        else:
            note = f"  {ref_t / t:.2f}x, max |diff| vs {names[0]}: {np.max(np.abs(z - ref)):.2e}"
        print(f"  {name:7s} {t * 1e3:9.1f} ms  {args.shots * 4 / t / 1e6:7.1f} M/s{note}")

    print(f"\nbatch moments, {args.shots} shots, 4 normals -> 2 outputs")
    base = {}
    for name in names:
        for threads in args.threads:
            st, t = best_of(
                lambda: batch(readout, args.shots, rng, threads=threads, backend=name),
                args.repeat,
            )
            base.setdefault(threads, (name, t, st))
            ref_name, ref_t, ref_st = base[threads]
            speed = f"  {ref_t / t:.2f}x faster than {ref_name}" if name != ref_name else ""
            print(f"  {name:7s} threads={threads}  {t * 1e3:9.1f} ms  var={st.var}{speed}")


if __name__ == "__main__":
    main()
