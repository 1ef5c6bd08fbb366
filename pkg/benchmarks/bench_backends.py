"""Benchmark the jitted kernels against their pure-numpy twins.

Times every hot kernel under both backends on pipeline-realistic sizes and
prints a speedup table. The numba path is warmed up first so compilation
does not count.

    python benchmarks/bench_backends.py [--quick] [--repeats N]
"""

import argparse
import time

import numpy as np

from stereosync import kernels


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_cases(quick):
    rng = np.random.default_rng(0)
    scale = 0.25 if quick else 1.0

    def dim(v):
        return max(1, int(v * scale))

    b, q, n = dim(200), dim(128), dim(512)
    wx = rng.normal(size=(q, n)) * 0.3
    wy = rng.normal(size=(q, n)) * 0.3
    x = rng.normal(size=(b, n))
    y = rng.normal(size=(b, n))

    frame = rng.random((dim(960), dim(1280)))
    video = rng.random((dim(32), dim(240), dim(320)))
    offs = np.stack(
        [
            rng.integers(0, video.shape[0] - 10 + 1, size=dim(2000)),
            rng.integers(0, video.shape[1] - 16 + 1, size=dim(2000)),
            rng.integers(0, video.shape[2] - 16 + 1, size=dim(2000)),
        ],
        axis=1,
    )
    points = rng.normal(size=(dim(20000), dim(64)))
    cents = rng.normal(size=(dim(300), dim(64)))

    return [
        (
            "sae_batch_obj_grad",
            f"batch {b} x (Q={q}, N={n})",
            lambda: kernels.sae_batch_obj_grad(wx, wy, x, y, 0.5),
        ),
        (
            "gather_patches",
            f"{frame.shape[0]}x{frame.shape[1]} frame, 16x16 stride 4",
            lambda: kernels.gather_patches(frame, 16, 16, 4, 4),
        ),
        (
            "gather_blocks",
            f"{video.shape} video, {len(offs)} 10x16x16 blocks",
            lambda: kernels.gather_blocks(video, offs, 10, 16, 16),
        ),
        (
            "kmeans_assign",
            f"{points.shape[0]} points x {cents.shape[0]} centroids (d={points.shape[1]})",
            lambda: kernels.kmeans_assign(points, cents),
        ),
        (
            "box_downsample",
            f"{frame.shape[0]}x{frame.shape[1]} -> 100x300",
            lambda: kernels.box_downsample(frame, 100, 300),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="quarter-size inputs")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba backend unavailable; nothing to compare")
        return

    cases = make_cases(args.quick)
    print(f"{'kernel':<20} {'size':<44} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, size, fn in cases:
        with kernels.use_backend("numba"):
            fn()  # trigger compilation before timing
            t_nb = timeit(fn, args.repeats)
        with kernels.use_backend("numpy"):
            t_np = timeit(fn, args.repeats)
        print(
            f"{name:<20} {size:<44} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
            f"{t_np / t_nb:>7.2f}x"
        )


if __name__ == "__main__":
    main()
