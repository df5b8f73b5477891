"""Time the pure-Python and compiled Belga engines on one uniform workload."""
import argparse

from belgatree.harness import bench_backends


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=32767)
    p.add_argument("--B", type=int, default=16)
    p.add_argument("--ops", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    res = bench_backends(args.N, args.B, args.ops, args.seed)
    for name, sec in res.items():
        print(f"{name:9s} {sec * 1e6:9.1f} us/search")
    if len(res) == 2:
        print(f"speedup   {res['python'] / res['compiled']:9.2f}x")


if __name__ == "__main__":
    main()
