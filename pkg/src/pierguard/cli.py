"""Command-line client for the planning service.

Every subcommand speaks the service's HTTP contract. By default the service
runs in-process (no sockets); pass --server to target a remote instance
started with the `serve` subcommand.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path

from .seeding import derive_seed


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _parse_dims(text: str) -> list[int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"dims must be N or X,Y,Z of positive ints, got {text!r}")
    return parts


def _parse_vec3(text: str) -> list[float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return parts


def _load_config(text: str | None) -> dict:
    if not text:
        return {}
    raw = text if text.lstrip().startswith("{") else Path(text).read_text()
    config = json.loads(raw)
    if not isinstance(config, dict):
        raise argparse.ArgumentTypeError("--config must hold a JSON object")
    return config


def _check(resp) -> None:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        raise SystemExit(f"error: server returned {resp.status_code}: {detail}")


def _cmd_genmap(args) -> int:
    body = {
        "kind": args.kind,
        "dims": args.dims,
        "seed": args.seed,
        "count": args.count,
        "cylinder_count": args.cylinder_count,
        "density": args.density,
        "voxel_size": args.voxel_size,
    }
    with _make_client(args.server) as client:
        resp = client.post("/maps/generate", json=body)
        _check(resp)
        Path(args.out).write_bytes(resp.content)
    print(f"wrote {args.out} ({len(resp.content)} bytes)")
    return 0


def _cmd_dataset(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    with _make_client(args.server) as client:
        for i in range(args.count):
            body = {
                "dims": args.dims,
                "sample_seed": derive_seed(args.seed, i),
                "dilation_radius": args.dilation_radius,
                "kind": args.kind,
                "obstacle_count": args.obstacle_count,
                "min_separation": args.min_separation,
            }
            resp = client.post("/dataset/sample", json=body)
            _check(resp)
            payload = resp.json()
            name = f"sample_{i:05d}.psamp"
            (out / name).write_bytes(base64.b64decode(payload["psamp_b64"]))
            meta = payload["meta"]
            meta["file"] = name
            entries.append(meta)
    manifest = {
        "seed": args.seed,
        "count": args.count,
        "dims": args.dims,
        "dilation_radius": args.dilation_radius,
        "kind": args.kind,
        "files": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    print(f"wrote {args.count} samples + manifest.json to {out}")
    return 0


def _cmd_plan(args) -> int:
    config = _load_config(args.config)
    config.setdefault("seed", args.seed)
    body = {
        "grid_b64": base64.b64encode(Path(args.map).read_bytes()).decode(),
        "x_init": args.init,
        "x_goal": args.goal,
        "goal_radius": args.goal_radius,
        "beta1": args.beta1,
        "beta2": args.beta2,
        "planner": args.planner,
        "config": config,
    }
    if args.region:
        body["region_b64"] = base64.b64encode(Path(args.region).read_bytes()).decode()
    with _make_client(args.server) as client:
        resp = client.post("/plan", json=body)
        _check(resp)
        result = resp.json()
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2))
    cost = result["best_cost"]
    iters = len(result["log"])
    print(
        f"{args.planner}: "
        + (f"best cost {cost:.3f}" if cost is not None else "no path")
        + f" after {iters} iterations, {result['stats']['nodes_generated']} nodes"
    )
    return 0 if cost is not None else 1


def _cmd_bench(args) -> int:
    config = _load_config(args.config)
    cases = [
        {
            "kind": args.map_kind,
            "dims": args.dims,
            "seed": derive_seed("case", args.seed, i),
            "density": args.density,
            "corridor_width": args.corridor_width,
            "map_id": f"{args.map_kind}{args.dims[0]}n{i}",
        }
        for i in range(args.maps)
    ]
    body = {
        "cases": cases,
        "planners": args.planners.split(","),
        "repetitions": args.reps,
        "suite_seed": args.seed,
        "config": config,
    }
    with _make_client(args.server) as client:
        resp = client.post("/bench", json=body)
        _check(resp)
        report = resp.json()
    if args.format == "json":
        payload = json.dumps(report, indent=2)
    else:
        from .bench import SuiteReport, emit_report

        payload = emit_report(SuiteReport.from_json_dict(report), "csv").decode()
    if args.out:
        Path(args.out).write_text(payload)
        print(f"wrote {args.out} ({len(report['records'])} records)")
    else:
        print(payload)
    for planner, agg in report["aggregates"].items():
        mean_init = agg["initial_iteration"]["mean"]
        print(
            f"  {planner}: success {agg['success_rate']:.2f}, "
            f"mean initial iteration {mean_init if mean_init is None else round(mean_init, 1)}"
        )
    return 0


def _cmd_region_score(args) -> int:
    dataset_dir = Path(args.dataset)
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    regions_dir = Path(args.regions)
    pairs = []
    for entry in manifest["files"]:
        sample_path = dataset_dir / entry["file"]
        region_path = regions_dir / (sample_path.stem + ".pheur")
        pairs.append(
            {
                "sample_b64": base64.b64encode(sample_path.read_bytes()).decode(),
                "region_b64": base64.b64encode(region_path.read_bytes()).decode(),
            }
        )
    body = {
        "pairs": pairs,
        "iteration_cap": args.iteration_cap,
        "trials": args.trials,
        "seed": args.seed,
        "goal_radius": args.goal_radius,
    }
    with _make_client(args.server) as client:
        resp = client.post("/region/score", json=body)
        _check(resp)
        payload = resp.json()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"connectivity {payload['score']:.4f} over {payload['pairs']} pairs")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pierguard",
        description="Occupancy-grid motion planning benchmark client",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--config", default=None, help="JSON config: file path or inline object")
    common.add_argument("--out", default=None, help="output path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genmap", parents=[common], help="generate a map file (PGRID)")
    p.add_argument("--dims", type=_parse_dims, required=True, help="N or X,Y,Z voxels")
    p.add_argument("--kind", choices=["spheres", "cylinders", "density"], default="spheres")
    p.add_argument("--count", type=int, default=40, help="sphere count")
    p.add_argument("--cylinder-count", type=int, default=10)
    p.add_argument("--density", type=float, default=0.1, help="target occupied fraction")
    p.add_argument("--voxel-size", type=float, default=1.0)
    p.set_defaults(func=_cmd_genmap, require_out=True)

    p = sub.add_parser("dataset", parents=[common], help="generate a training corpus (PSAMP)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--dims", type=_parse_dims, required=True)
    p.add_argument("--dilation-radius", type=int, default=2)
    p.add_argument("--kind", choices=["spheres", "cylinders"], default="spheres")
    p.add_argument("--obstacle-count", type=int, default=None)
    p.add_argument("--min-separation", type=float, default=None)
    p.set_defaults(func=_cmd_dataset, require_out=True)

    p = sub.add_parser("plan", parents=[common], help="plan on a map file")
    p.add_argument("--map", required=True, help="PGRID file")
    p.add_argument(
        "--planner",
        choices=["rrt_star", "informed_rrt_star", "rrt_connect", "pierguard"],
        default="pierguard",
    )
    p.add_argument("--init", type=_parse_vec3, required=True)
    p.add_argument("--goal", type=_parse_vec3, required=True)
    p.add_argument("--goal-radius", type=float, default=1.5)
    p.add_argument("--beta1", type=float, default=1.0)
    p.add_argument("--beta2", type=float, default=0.0)
    p.add_argument("--region", default=None, help="PHEUR file (required for pierguard)")
    p.set_defaults(func=_cmd_plan, require_out=False)

    p = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    p.add_argument("--dims", type=_parse_dims, required=True)
    p.add_argument("--map-kind", choices=["clutter", "pier", "corridor"], default="clutter")
    p.add_argument("--maps", type=int, default=10)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--corridor-width", type=int, default=5)
    p.add_argument("--planners", default="rrt_star,pierguard", help="comma-separated names")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_bench, require_out=False)

    p = sub.add_parser("region-score", parents=[common], help="score regions against a dataset")
    p.add_argument("--dataset", required=True, help="PSAMP dataset directory with manifest.json")
    p.add_argument("--regions", required=True, help="directory of PHEUR files named per sample")
    p.add_argument("--iteration-cap", type=int, default=5000)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--goal-radius", type=float, default=1.5)
    p.set_defaults(func=_cmd_region_score, require_out=False)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve, require_out=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "require_out", False) and not args.out:
        parser.error(f"{args.command} requires --out")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
