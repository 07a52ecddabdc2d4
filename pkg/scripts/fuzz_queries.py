#!/usr/bin/env python3
"""Differential fuzzer: engine vs brute-force reference.

Generates random folded meshes (parameters drawn per trial) and random
interior query points, then compares the shortest-path query against the
brute-force reference on distance and co-minimal face membership. Any
mismatch is a finding; findings are printed with enough detail to replay
and the process exits nonzero.
"""

import argparse
import sys

import numpy as np

from boundarypath import oracle, shapes
from boundarypath.bvh import build_boundary_bvh
from boundarypath.query import QueryConfig, shortest_path_to_boundary
from boundarypath.traversal import TraversalScratch

DIST_TOL = 1e-9


def random_fold(rng):
    if rng.random() < 0.5:
        params = dict(
            nx=int(rng.integers(8, 30)),
            ny=int(rng.integers(2, 4)),
            nz=int(rng.integers(2, 4)),
            thickness=float(rng.uniform(0.2, 0.4)),
            inner_radius=float(rng.uniform(0.7, 1.3)),
            total_angle=float(rng.uniform(2.1, 2.9) * np.pi),
        )
        return "folded_bar", params, shapes.folded_bar(**params)
    params = dict(
        nx=int(rng.integers(20, 70)),
        ny=int(rng.integers(2, 5)),
        thickness=float(rng.uniform(0.2, 0.4)),
        inner_radius=float(rng.uniform(0.7, 1.3)),
        total_angle=float(rng.uniform(2.1, 2.9) * np.pi),
    )
    return "folded_strip", params, shapes.folded_strip(**params)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20, help="random meshes to test")
    ap.add_argument("--points", type=int, default=50, help="query points per mesh")
    ap.add_argument("--seed", type=int, default=20240824)
    ap.add_argument("--max-findings", type=int, default=10)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    config = QueryConfig()
    scratch = TraversalScratch(config.traversal)
    findings = []
    n_queries = 0

    for trial in range(args.trials):
        name, params, mesh = random_fold(rng)
        bvh = build_boundary_bvh(mesh)
        points, elements = shapes.random_interior_points(mesh, rng, args.points)
        for p, e in zip(points, elements):
            n_queries += 1
            res = shortest_path_to_boundary(
                mesh, bvh, p, p_element=int(e), config=config, scratch=scratch
            )
            ref = oracle.oracle_closest_boundary(mesh, p)
            bad = None
            if (res is None) != (ref is None):
                bad = f"presence mismatch: engine={res is not None} ref={ref is not None}"
            elif res is not None:
                if abs(res.distance - ref[2]) > DIST_TOL:
                    bad = f"distance {res.distance!r} vs reference {ref[2]!r}"
                elif res.face not in oracle.co_minimal_faces(mesh, p, ref[2]):
                    bad = f"face {res.face} not co-minimal"
            if bad is not None:
                findings.append((name, params, p.tolist(), int(e), bad))
                print(f"FINDING trial={trial} {name} params={params}")
                print(f"  p={p.tolist()} element={int(e)}")
                print(f"  {bad}")
                if len(findings) >= args.max_findings:
                    print("stopping: max findings reached")
                    print(f"{len(findings)} findings in {n_queries} queries")
                    return 1
        print(f"trial {trial:3d}: {name} {mesh.n_elements} elements, clean")

    print(f"{len(findings)} findings in {n_queries} queries (seed {args.seed})")
    return 1 if findings else 0


if __name__ == "__main__":
    sys.exit(main())
