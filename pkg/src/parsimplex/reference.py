"""Published median solve times (seconds) on a 64-core shared-memory server.

Keyed by ``(constraints, variables)`` then thread count. Machine-specific;
useful only for comparing the shape of speedup curves, never as targets.
"""

THREADS = (2, 4, 8, 16, 32, 64)

_ROWS = """
256 256 0.036 0.027 0.021 0.031 0.092 0.301
256 512 0.056 0.038 0.028 0.031 0.091 0.338
256 1024 0.086 0.052 0.038 0.038 0.082 0.286
256 2048 0.358 0.169 0.120 0.098 0.156 0.473
256 4096 0.438 0.221 0.174 0.089 0.119 0.356
256 8192 1.351 0.627 0.547 0.347 0.291 0.532
512 256 0.021 0.014 0.010 0.009 0.020 0.064
512 512 0.084 0.046 0.031 0.026 0.045 0.168
512 1024 0.775 0.451 0.348 0.231 0.349 0.863
512 2048 1.155 0.662 0.589 0.332 0.342 0.891
512 4096 3.103 1.277 1.057 0.674 0.530 0.967
512 8192 5.759 2.838 2.275 1.172 0.972 0.878
1024 256 0.327 0.168 0.131 0.060 0.071 0.236
1024 512 1.684 1.048 0.856 0.468 0.490 1.113
1024 1024 2.163 1.019 0.882 0.508 0.463 0.865
1024 2048 1.227 0.519 0.467 0.277 0.173 0.327
1024 4096 38.935 20.207 15.588 6.817 3.944 4.347
1024 8192 90.958 63.478 40.201 45.997 46.334 12.040
2048 256 8.171 4.505 3.661 1.511 0.937 1.269
2048 512 0.799 0.541 0.421 0.244 0.114 0.128
2048 1024 15.935 8.810 8.703 7.249 2.680 1.742
2048 2048 59.883 38.809 28.364 31.859 26.620 6.708
2048 4096 39.007 24.344 20.444 19.423 22.391 6.058
2048 8192 911.651 519.929 482.603 405.369 332.439 268.802
4096 256 54.202 33.635 24.085 24.954 25.742 17.898
4096 512 46.711 31.147 23.529 22.518 23.134 19.016
4096 1024 197.108 133.184 92.854 79.553 91.360 67.271
4096 2048 0.528 0.435 0.377 0.343 0.323 0.305
4096 4096 1382.832 888.342 799.383 592.892 622.866 373.573
4096 8192 1071.709 671.992 528.183 398.582 442.300 266.595
8192 256 274.244 150.246 119.035 104.966 104.110 65.755
8192 512 18.183 11.740 10.290 9.970 10.635 9.000
8192 1024 126.048 72.757 60.564 57.594 53.484 36.189
8192 2048 52.146 28.557 26.544 24.463 25.285 16.443
8192 4096 944.021 544.355 485.721 385.115 344.792 201.071
8192 8192 25208.584 16344.648 13628.544 11215.784 9979.548 5458.975
"""


def _parse() -> dict[tuple[int, int], dict[int, float]]:
    table = {}
    for line in _ROWS.strip().splitlines():
        m, n, *times = line.split()
        table[(int(m), int(n))] = dict(zip(THREADS, map(float, times)))
    return table


MEDIAN_SECONDS = _parse()


def reference_speedups(m: int, n: int) -> dict[int, float]:
    """Speedups for one size, taking serial time as twice the 2-thread time."""
    times = MEDIAN_SECONDS[(m, n)]
    serial = 2 * times[2]
    return {p: serial / t for p, t in times.items()}
