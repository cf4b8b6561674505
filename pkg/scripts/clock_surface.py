"""Sweep a quantum clock's probability space and test whether it covers the extended classical hull.

    python3 scripts/clock_surface.py --N 60 --directions 200
"""
import argparse

from precess import observables as ob
from precess import probspace as ps
from precess import protocol as pr


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=60)
    ap.add_argument("--directions", type=int, default=200)
    ap.add_argument("--out", default="clock_surface.csv")
    ap.add_argument("--hull-tol", type=float, default=1e-3)
    args = ap.parse_args()

    pair = ob.make_clock(args.N)
    g = pr.general_bound(pr.spectrum(pair))
    results = ps.sample_surface(pair, args.directions)
    ps.write_surface_csv(results, args.out)
    cloud = ps.cloud_points(results)
    endpoints = ps.cloud_points(results, with_support=False)
    hull = ps.clock_hull(args.N, g)
    print(f"N={args.N}: bound {g:.10f}, {len(results)} rays written to {args.out}")
    for v in hull.vertices:
        both = ps.hull_contains(cloud, v, args.hull_tol)
        ends = ps.hull_contains(endpoints, v, args.hull_tol)
        print(f"  vertex {v.round(6).tolist()}: covered={both} (endpoints only: {ends})")


if __name__ == "__main__":
    main()
