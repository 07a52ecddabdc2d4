#!/usr/bin/env python3
"""Traversal-cost benchmark for infeasible-candidate culling.

Runs the shortest-path query over random interior points of a spiral bar
whose turns interpenetrate at a radial offset, with culling on and off,
and reports the mean traversals per query for each mode plus the ratio.
Results must be identical in both modes; any divergence is a finding and
exits nonzero.
"""

import argparse
import json
import sys
import time

import numpy as np

from boundarypath import shapes
from boundarypath.bvh import build_boundary_bvh
from boundarypath.query import QueryConfig, shortest_path_to_boundary
from boundarypath.traversal import TraversalScratch


def run_mode(mesh, bvh, points, elements, enable_culling, epsilon_r):
    config = QueryConfig(enable_culling=enable_culling, epsilon_r=epsilon_r)
    scratch = TraversalScratch(config.traversal)
    results = []
    traversals = []
    t0 = time.perf_counter()
    for p, e in zip(points, elements):
        res = shortest_path_to_boundary(
            mesh, bvh, p, p_element=int(e), config=config, scratch=scratch
        )
        results.append(res)
        traversals.append(res.stats.traversals_run if res is not None else 0)
    elapsed = time.perf_counter() - t0
    return results, np.asarray(traversals, dtype=float), elapsed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nx", type=int, default=90)
    ap.add_argument("--ny", type=int, default=6)
    ap.add_argument("--nz", type=int, default=6)
    ap.add_argument("--thickness", type=float, default=0.25)
    ap.add_argument("--total-angle", type=float, default=3.6 * np.pi)
    ap.add_argument("--pitch", type=float, default=0.15)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    # default feasibility slack is sized for unit-scale features; the
    # benchmark cells have dot products of order 1e-3, so tighten it
    ap.add_argument("--eps-r", type=float, default=1e-6)
    ap.add_argument("--json", action="store_true", help="emit a JSON record")
    args = ap.parse_args(argv)

    mesh = shapes.spiral_bar(
        args.nx,
        args.ny,
        args.nz,
        thickness=args.thickness,
        total_angle=args.total_angle,
        pitch=args.pitch,
    )
    bvh = build_boundary_bvh(mesh)
    rng = np.random.default_rng(args.seed)
    points, elements = shapes.random_interior_points(mesh, rng, args.points)

    res_on, trav_on, t_on = run_mode(mesh, bvh, points, elements, True, args.eps_r)
    res_off, trav_off, t_off = run_mode(mesh, bvh, points, elements, False, args.eps_r)

    diffs = 0
    for a, b in zip(res_on, res_off):
        if (a is None) != (b is None):
            diffs += 1
        elif a is not None and (a.face != b.face or a.distance != b.distance):
            diffs += 1

    ratio = trav_on.mean() / trav_off.mean()
    record = {
        "n_elements": mesh.n_elements,
        "n_points": len(points),
        "mean_traversals_culling_on": float(trav_on.mean()),
        "mean_traversals_culling_off": float(trav_off.mean()),
        "traversal_ratio": float(ratio),
        "elapsed_s_culling_on": t_on,
        "elapsed_s_culling_off": t_off,
        "result_diffs": diffs,
    }
    if args.json:
        print(json.dumps(record, indent=2))
    else:
        print(f"mesh: spiral bar, {mesh.n_elements} elements")
        print(f"queries: {len(points)}")
        print(
            f"mean traversals per query: {trav_on.mean():.2f} (culling on) "
            f"vs {trav_off.mean():.2f} (culling off), ratio {ratio:.3f}"
        )
        print(f"wall time: {t_on:.2f}s (on) vs {t_off:.2f}s (off)")
        print(f"result diffs: {diffs}")
    return 1 if diffs else 0


if __name__ == "__main__":
    sys.exit(main())
