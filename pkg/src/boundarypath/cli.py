"""Command-line front end.

Subcommands: convert, query, validate (engine vs brute-force reference),
fuzz (adversarial ray / folded-mesh search), bench (query statistics with
and without culling), simulate. Structured outputs are JSON or CSV; every
run with an output directory writes a replayable manifest. Exit codes:
0 success, 1 validation/fuzz findings, 2 usage or I/O error.

Flag defaults can be overridden with environment variables prefixed
BOUNDARYPATH_ (e.g. BOUNDARYPATH_SEED, BOUNDARYPATH_EPS_I,
BOUNDARYPATH_EPS_R, BOUNDARYPATH_THREADS, BOUNDARYPATH_NO_CULLING).
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, oracle, shapes
from .bvh import build_boundary_bvh
from .errors import MeshError, ParseError
from .meshio import export_boundary_obj, load_mesh, save_mesh
from .query import QueryConfig, shortest_path_to_boundary
from .sim import SimRuntime, count_penetrations, load_scene, xpbd_substep
from .traversal import TraversalConfig

ENV_PREFIX = "BOUNDARYPATH_"


def _env(name, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


@dataclass
class RunManifest:
    command: str
    inputs: list
    overrides: dict
    seed: int
    output_dir: str
    version: str = __version__
    argv: list = field(default_factory=list)

    def write(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "manifest.json").write_text(json.dumps(asdict(self), indent=2))


def _query_config(args):
    traversal = TraversalConfig(
        epsilon_i=args.eps_i,
        allow_backward=args.allow_backward,
        trace=getattr(args, "trace", False),
    )
    return QueryConfig(
        epsilon_r=args.eps_r,
        enable_culling=not args.no_culling,
        traversal=traversal,
        backward_mode=True if args.allow_backward else None,
    )


def _add_common(sub):
    sub.add_argument("--eps-i", type=float, default=float(_env("EPS_I", "1e-10")))
    sub.add_argument("--eps-r", type=float, default=float(_env("EPS_R", "0.01")))
    sub.add_argument(
        "--no-culling",
        action="store_true",
        default=bool(int(_env("NO_CULLING", "0"))),
    )
    sub.add_argument("--allow-backward", action="store_true")
    sub.add_argument("--seed", type=int, default=int(_env("SEED", "0")))
    sub.add_argument("--threads", type=int, default=int(_env("THREADS", "1")))
    sub.add_argument("--out", type=str, default=None)


def _parse_points(args, dim):
    points = []
    for text in args.point:
        try:
            vals = [float(tok) for tok in text.replace(",", " ").split()]
        except ValueError:
            raise SystemExit2(f"cannot parse point {text!r}")
        if len(vals) != dim:
            raise SystemExit2(f"point {text!r} has {len(vals)} coords, mesh is {dim}D")
        points.append(vals)
    if args.points_file:
        for line in Path(args.points_file).read_text().splitlines():
            line = line.strip()
            if line:
                points.append([float(tok) for tok in line.split()])
    return np.asarray(points, dtype=float)


class SystemExit2(Exception):
    """Usage / IO error -> exit code 2."""


def _map_ordered(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_query(args):
    mesh = load_mesh(args.mesh)
    bvh = build_boundary_bvh(mesh)
    points = _parse_points(args, mesh.dim)
    if len(points) == 0:
        raise SystemExit2("no query points given")
    config = _query_config(args)

    def one(p):
        res = shortest_path_to_boundary(mesh, bvh, p, config=config)
        if res is None:
            return {"query_point": [float(x) for x in p], "result": None}
        rec = res.as_dict(query_point=p)
        return rec

    records = _map_ordered(one, points, args.threads)
    payload = json.dumps({"mesh": args.mesh, "results": records}, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.json").write_text(payload)
        _manifest(args, [args.mesh]).write(out)
    else:
        print(payload)
    if args.path_obj:
        _write_path_obj(args.path_obj, points, records)
    return 0


def _write_path_obj(path, points, records):
    lines = []
    nv = 0
    for p, rec in zip(points, records):
        res = rec if "result_point" in rec else None
        if res is None:
            continue
        q = rec["result_point"]
        for v in (p, q):
            coords = list(v) + [0.0] * (3 - len(v))
            lines.append("v " + " ".join(f"{float(c):.17g}" for c in coords))
        lines.append(f"l {nv + 1} {nv + 2}")
        nv += 2
    Path(path).write_text("\n".join(lines) + "\n")


def _manifest(args, inputs):
    overrides = {
        "eps_i": args.eps_i,
        "eps_r": args.eps_r,
        "no_culling": args.no_culling,
        "allow_backward": args.allow_backward,
        "threads": args.threads,
    }
    return RunManifest(
        command=args.command,
        inputs=list(inputs),
        overrides=overrides,
        seed=args.seed,
        output_dir=args.out or "",
        argv=sys.argv[1:],
    )


def _mesh_paths(target):
    target = Path(target)
    if target.is_dir():
        paths = sorted(str(p) for p in target.glob("*.json"))
        if not paths:
            raise SystemExit2(f"no .json meshes in {target}")
        return paths
    return [str(target)]


def cmd_validate(args):
    rng = np.random.default_rng(args.seed)
    config = _query_config(args)
    mismatches = []
    total = 0
    for mpath in _mesh_paths(args.mesh):
        mesh = load_mesh(mpath)
        bvh = build_boundary_bvh(mesh)
        points, elems = shapes.random_interior_points(mesh, rng, args.samples)
        for p, e in zip(points, elems):
            total += 1
            res = shortest_path_to_boundary(mesh, bvh, p, p_element=int(e), config=config)
            ref = oracle.oracle_closest_boundary(
                mesh,
                p,
                allow_backward=True if args.allow_backward else None,
                epsilon=args.eps_i,
            )
            ok = (res is None) == (ref is None)
            if ok and res is not None:
                ok = abs(res.distance - ref[2]) <= 1e-9
            if not ok:
                mismatches.append(
                    {
                        "mesh": mpath,
                        "point": [float(x) for x in p],
                        "element": int(e),
                        "engine": None if res is None else res.distance,
                        "reference": None if ref is None else ref[2],
                    }
                )
    report = {"queries": total, "mismatches": mismatches}
    print(f"{total} queries, {len(mismatches)} mismatches")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validate_report.json").write_text(json.dumps(report, indent=2))
        for i, rec in enumerate(mismatches):
            (out / f"replay_{i:04d}.json").write_text(json.dumps(rec, indent=2))
        _manifest(args, _mesh_paths(args.mesh)).write(out)
    return 1 if mismatches else 0


def _fuzz_mesh(rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        return shapes.folded_strip(int(rng.integers(20, 40)), 3)
    if kind == 1:
        return shapes.folded_bar(int(rng.integers(15, 30)), 2, 2)
    if kind == 2:
        return shapes.deformed_sheet(rng, 4, 4)
    return shapes.deformed_blob(rng, 2, 2, 2)


def _fuzz_rays(mesh, rng, n):
    """Adversarial segments: boundary start points aimed exactly at mesh
    vertices and edge midpoints, so traversal sign tests hit ties."""
    out = []
    faces = rng.integers(0, mesh.n_boundary_faces, size=n)
    for f in faces:
        verts = mesh.vertices[mesh.boundary_faces[int(f)]]
        w = rng.dirichlet(np.ones(mesh.dim))
        s = w @ verts
        v = int(rng.integers(0, mesh.n_vertices))
        target = mesh.vertices[v]
        if rng.random() < 0.5:
            v2 = int(rng.integers(0, mesh.n_vertices))
            target = 0.5 * (target + mesh.vertices[v2])
        out.append((s, int(f), target))
    return out


def cmd_fuzz(args):
    rng = np.random.default_rng(args.seed)
    config = _query_config(args)
    findings = []
    t0 = time.monotonic()
    iteration = 0
    while iteration < args.iterations:
        if args.budget is not None and time.monotonic() - t0 >= args.budget:
            break
        iteration += 1
        mesh = _fuzz_mesh(rng)
        bvh = build_boundary_bvh(mesh)
        points, elems = shapes.random_interior_points(mesh, rng, args.samples)
        for p, e in zip(points, elems):
            res = shortest_path_to_boundary(mesh, bvh, p, p_element=int(e), config=config)
            ref = oracle.oracle_closest_boundary(mesh, p, epsilon=args.eps_i)
            ok = (res is None) == (ref is None)
            if ok and res is not None:
                ok = abs(res.distance - ref[2]) <= 1e-9
            if not ok:
                findings.append(
                    {
                        "kind": "mismatch",
                        "iteration": iteration,
                        "point": [float(x) for x in p],
                        "engine": None if res is None else res.distance,
                        "reference": None if ref is None else ref[2],
                    }
                )
        # exact vertex/edge hits stress the tie branching
        from .traversal import TraversalScratch, is_valid_path

        scratch = TraversalScratch(config.traversal)
        for s, f, target in _fuzz_rays(mesh, rng, args.samples):
            if np.linalg.norm(target - s) <= 1e-12:
                continue
            result = is_valid_path(
                mesh, s, f, target, config=config.traversal, scratch=scratch
            )
            if result.budget_breached:
                findings.append(
                    {
                        "kind": "budget_breach",
                        "iteration": iteration,
                        "s": [float(x) for x in s],
                        "face": f,
                        "target": [float(x) for x in target],
                    }
                )
    print(f"{iteration} iterations, {len(findings)} findings")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "findings.json").write_text(json.dumps(findings, indent=2))
        _manifest(args, []).write(out)
    return 1 if findings else 0


def cmd_bench(args):
    rng = np.random.default_rng(args.seed)
    mesh = load_mesh(args.mesh)
    bvh = build_boundary_bvh(mesh)
    points, elems = shapes.random_interior_points(mesh, rng, args.samples)
    base = _query_config(args)
    rows = []
    for label, cfg in (
        ("culling_on", replace(base, enable_culling=True)),
        ("culling_off", replace(base, enable_culling=False)),
    ):
        cands, travs, visited = [], [], []
        for p, e in zip(points, elems):
            res = shortest_path_to_boundary(mesh, bvh, p, p_element=int(e), config=cfg)
            if res is None:
                continue
            cands.append(res.stats.bvh_candidates_tested)
            travs.append(res.stats.traversals_run)
            visited.append(res.stats.elements_visited)
        rows.append(
            (
                label,
                np.mean(cands),
                np.max(cands),
                np.mean(travs),
                np.max(travs),
                np.mean(visited),
                np.max(visited),
            )
        )
    header = (
        "mode,mean_candidates,max_candidates,mean_traversals,"
        "max_traversals,mean_elements_visited,max_elements_visited"
    )
    lines = [header] + [
        f"{r[0]},{r[1]:.3f},{int(r[2])},{r[3]:.3f},{int(r[4])},{r[5]:.3f},{int(r[6])}"
        for r in rows
    ]
    text = "\n".join(lines)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(text + "\n")
        _manifest(args, [args.mesh]).write(out)
    return 0


def cmd_simulate(args):
    state, config = load_scene(args.scene)
    runtime = SimRuntime(state, config)
    log = []
    n = args.substeps if args.substeps is not None else config.substeps
    for _ in range(n):
        state, entry = xpbd_substep(state, config, runtime)
        log.append(entry.as_dict())
    pen = count_penetrations(state, runtime)
    print(f"{n} substeps, final penetration count {pen}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "contact_log.json").write_text(json.dumps(log, indent=2))
        for m, mesh in enumerate(state.meshes):
            save_mesh(mesh, out / f"mesh_{m:02d}_final.json")
        _manifest(args, [args.scene]).write(out)
    return 0


def cmd_convert(args):
    mesh = load_mesh(args.input)
    if args.output.endswith(".obj"):
        export_boundary_obj(mesh, args.output)
    else:
        save_mesh(mesh, args.output)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="boundarypath",
        description="Shortest internal path to boundary: queries, validation, fuzzing, simulation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    q = subs.add_parser("query", help="closest boundary point with a valid path")
    q.add_argument("mesh")
    q.add_argument("point", nargs="*", help='query point, e.g. "0.5 0.5 0.5"')
    q.add_argument("--points-file", default=None)
    q.add_argument("--path-obj", default=None)
    q.add_argument("--trace", action="store_true")
    _add_common(q)
    q.set_defaults(fn=cmd_query)

    v = subs.add_parser("validate", help="differential check against the reference")
    v.add_argument("mesh", help="mesh file or directory of .json meshes")
    v.add_argument("--samples", type=int, default=50)
    _add_common(v)
    v.set_defaults(fn=cmd_validate)

    f = subs.add_parser("fuzz", help="randomized adversarial search")
    f.add_argument("--iterations", type=int, default=10)
    f.add_argument(
        "--budget", type=float, default=None, help="wall-clock seconds; 0 runs nothing"
    )
    f.add_argument("--samples", type=int, default=10)
    _add_common(f)
    f.set_defaults(fn=cmd_fuzz)

    b = subs.add_parser("bench", help="query statistics with and without culling")
    b.add_argument("mesh")
    b.add_argument("--samples", type=int, default=100)
    _add_common(b)
    b.set_defaults(fn=cmd_bench)

    s = subs.add_parser("simulate", help="run a scene")
    s.add_argument("scene")
    s.add_argument("--substeps", type=int, default=None)
    _add_common(s)
    s.set_defaults(fn=cmd_simulate)

    c = subs.add_parser("convert", help="convert between mesh formats")
    c.add_argument("input")
    c.add_argument("output")
    _add_common(c)
    c.set_defaults(fn=cmd_convert)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SystemExit2, FileNotFoundError, ParseError, MeshError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
