"""Command-line front end.

Subcommands: ``region`` (sampled achievable cloud and hull views),
``slice`` (minimum-rate slices), ``outer`` (duality outer bound),
``corollary`` (closed-form point families), ``verify`` (cross-module
property suite).  Every run writes CSV data files, a JSON metadata
sidecar describing the fully resolved configuration, and, unless
disabled, matplotlib figures next to the CSVs.

Exit codes: 0 success, 1 internal or check failure, 2 usage error.
CSV files are byte-deterministic for a fixed seed; the thread count used
for sampling comes from the COGRATES_THREADS environment variable and
never changes results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .achievable import SamplingSpec, compute_region, region_slice
from .checks import run_all
from .corollaries import (
    ALL_IDS,
    corollary_points,
    points_array,
    scheme_for_corollary,
    time_share_hull,
)
from .model import ChannelConfig, ConfigError, Scheme, validate_config
from .outerbound import DEFAULT_RESOLUTION, cooperative_pair, outer_region
from .polytope import AXIS_INDEX

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

VIEWS: dict[str, tuple[str, str, tuple]] = {
    "r1-r23": ("r1", "r2_plus_r3", ((1, 0, 0), (0, 1, 1))),
    "r3-r12": ("r3", "r1_plus_r2", ((0, 0, 1), (1, 1, 0))),
    "r1-r2": ("r1", "r2", ((1, 0, 0), (0, 1, 0))),
    "r1-r3": ("r1", "r3", ((1, 0, 0), (0, 0, 1))),
    "r2-r3": ("r2", "r3", ((0, 1, 0), (0, 0, 1))),
}

GAUSSIAN_SCHEMES = ("cums2", "prms2", "coms")


class _Outputs:
    """Tracks written files so a failed run leaves nothing partial."""

    def __init__(self):
        self.paths: list[str] = []

    def write_text(self, path: str, text: str) -> None:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.paths.append(path)

    def register(self, path: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self.paths.append(path)
        return path

    def cleanup(self) -> None:
        for path in self.paths:
            try:
                os.unlink(path)
            except OSError:
                pass


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return repr(float(value))


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _polygon_rows(polygon: np.ndarray):
    if polygon is None or len(polygon) == 0:
        return []
    closed = np.vstack([polygon, polygon[:1]])
    return closed.tolist()


def parse_config_file(path: str) -> dict:
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {text!r}")
            raw[key.strip()] = value.strip()
    return raw


def _channel_from_args(args) -> ChannelConfig:
    raw = parse_config_file(args.config) if args.config else {}
    if args.power_db is not None:
        for k in ("p1", "p2", "p3"):
            raw.pop(k, None)
            raw[k + "_db"] = args.power_db
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        raw[key.strip()] = value.strip()
    return validate_config(raw)


def _scheme(name: str) -> Scheme:
    return Scheme(name)


def _meta(args, cfg: ChannelConfig, **extra) -> dict:
    meta = {
        "command": args.command,
        "channel": cfg.as_dict(),
        "outputs": {},
    }
    meta.update(extra)
    return meta


def _write_meta(out: _Outputs, path: str, meta: dict) -> None:
    out.write_text(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _merged_corollaries(cfg: ChannelConfig, scheme: Scheme, grid: int):
    ids = [cid for cid in ALL_IDS if scheme_for_corollary(cid) is scheme]
    points = []
    for cid in ids:
        points.extend(corollary_points(cid, cfg, grid=grid))
    return ids, points


def cmd_region(args, out: _Outputs) -> int:
    cfg = _channel_from_args(args)
    scheme = _scheme(args.scheme)
    spec = SamplingSpec(n=args.samples, seed=args.seed, scheme=scheme,
                        smart=args.smart)
    cloud = compute_region(cfg, spec)
    merged = None
    corollary_ids: list[int] = []
    if args.corollaries:
        corollary_ids, pts = _merged_corollaries(cfg, scheme, args.grid)
        merged = time_share_hull(cloud, pts)

    prefix = os.path.join(args.out, f"region_{scheme.value}_")
    cloud_rows = [
        [int(ref), p[0], p[1], p[2]]
        for ref, p in zip(cloud.ref, cloud.points)
    ]
    out.write_text(prefix + "cloud.csv",
                   _csv_text(("sample_id", "r1", "r2", "r3"), cloud_rows))

    views = args.view or ["r1-r23"]
    hulls = {}
    for view in views:
        xname, yname, matrix = VIEWS[view]
        mat = np.asarray(matrix, dtype=float)
        polygon = (merged.view_polygon(mat) if merged is not None
                   else cloud.hull_view(mat))
        hulls[view] = (xname, yname, mat, polygon)
        out.write_text(prefix + f"hull_{view}.csv",
                       _csv_text((xname, yname), _polygon_rows(polygon)))

    _write_meta(out, prefix + "meta.json", _meta(
        args, cfg,
        scheme=scheme.value,
        samples=args.samples,
        seed=args.seed,
        smart=args.smart,
        merged_corollaries=corollary_ids,
        views=list(views),
        diagnostics=cloud.diagnostics,
    ))

    if args.figures:
        from . import report

        for view, (xname, yname, mat, polygon) in hulls.items():
            base_hull = cloud.hull_view(mat)
            report.plot_region_view(
                out.register(prefix + f"{view}.png"),
                xname.replace("_plus_", " + ").upper(),
                yname.replace("_plus_", " + ").upper(),
                f"{scheme.value} achievable region ({args.samples} draws)",
                base_hull,
                cloud_xy=cloud.view_points(mat),
                merged=polygon if merged is not None else None,
            )
    return EXIT_OK


def cmd_slice(args, out: _Outputs) -> int:
    cfg = _channel_from_args(args)
    scheme = _scheme(args.scheme)
    if not args.at:
        raise ConfigError("slice needs at least one --at value")
    c_values = [float(c) for c in args.at]
    if any(c < 0 for c in c_values):
        raise ConfigError("slice values must be >= 0")
    spec = SamplingSpec(n=args.samples, seed=args.seed, scheme=scheme,
                        smart=args.smart)
    cloud = compute_region(cfg, spec)
    extra = None
    corollary_ids: list[int] = []
    if args.corollaries:
        corollary_ids, pts = _merged_corollaries(cfg, scheme, args.grid)
        extra = points_array(pts)

    ax = AXIS_INDEX[args.axis]
    names = [n for n in ("r1", "r2", "r3") if n != args.axis]
    prefix = os.path.join(args.out, f"slice_{scheme.value}_{args.axis}_")
    polygons = []
    for c_str, c in zip(args.at, c_values):
        polygon = region_slice(cloud, args.axis, c, extra_points=extra)
        polygons.append((c_str, polygon))
        out.write_text(prefix + f"c{c_str}.csv",
                       _csv_text(tuple(names), _polygon_rows(polygon)))

    _write_meta(out, prefix + "meta.json", _meta(
        args, cfg,
        scheme=scheme.value,
        samples=args.samples,
        seed=args.seed,
        smart=args.smart,
        merged_corollaries=corollary_ids,
        axis=args.axis,
        at=c_values,
        diagnostics=cloud.diagnostics,
    ))

    if args.figures:
        from . import report

        report.plot_slices(
            out.register(prefix + "slices.png"),
            names[0].upper(), names[1].upper(),
            f"{scheme.value} region at minimum {args.axis}",
            [(f"{args.axis} = {c}", poly) for c, poly in polygons],
        )
    return EXIT_OK


def cmd_outer(args, out: _Outputs) -> int:
    cfg = _channel_from_args(args)
    scheme = _scheme(args.scheme)
    region = outer_region(scheme, cfg, resolution=args.resolution)

    prefix = os.path.join(args.out, f"outer_{scheme.value}_")
    rows = [[i, p[0], p[1], p[2]] for i, p in enumerate(region.points)]
    out.write_text(prefix + "points.csv",
                   _csv_text(("sample_id", "r1", "r2", "r3"), rows))

    views = args.view or ["r1-r23"]
    for view in views:
        xname, yname, matrix = VIEWS[view]
        polygon = region.view_polygon(np.asarray(matrix, dtype=float))
        out.write_text(prefix + f"hull_{view}.csv",
                       _csv_text((xname, yname), _polygon_rows(polygon)))

    slice_polys = []
    if args.at:
        names = [n for n in ("r1", "r2", "r3") if n != args.axis]
        for c_str in args.at:
            c = float(c_str)
            polygon = region.slice_polygon(args.axis, c)
            slice_polys.append((c_str, polygon))
            out.write_text(prefix + f"slice_{args.axis}_c{c_str}.csv",
                           _csv_text(tuple(names), _polygon_rows(polygon)))

    pair_name, pair_coeffs, pair_matrix, pair_power = cooperative_pair(scheme, cfg)
    _write_meta(out, prefix + "meta.json", _meta(
        args, cfg,
        scheme=scheme.value,
        resolution=args.resolution,
        caps=[{"name": c.name, "coeffs": list(c.coeffs), "bound": c.bound}
              for c in region.caps],
        cooperative_pair={
            "sum": pair_name,
            "matrix": pair_matrix.tolist(),
            "total_power": pair_power,
            "note": "pairing-receiver rows restricted to the cooperating senders",
        },
        views=list(views),
    ))

    if args.figures:
        from . import report

        for view in views:
            xname, yname, matrix = VIEWS[view]
            mat = np.asarray(matrix, dtype=float)
            report.plot_region_view(
                out.register(prefix + f"{view}.png"),
                xname.replace("_plus_", " + ").upper(),
                yname.replace("_plus_", " + ").upper(),
                f"{scheme.value} outer bound",
                np.zeros((0, 2)),
                outer=region.view_polygon(mat),
            )
        if slice_polys:
            names = [n for n in ("r1", "r2", "r3") if n != args.axis]
            report.plot_slices(
                out.register(prefix + f"slices_{args.axis}.png"),
                names[0].upper(), names[1].upper(),
                f"{scheme.value} outer bound at minimum {args.axis}",
                [(f"{args.axis} = {c}", poly) for c, poly in slice_polys],
            )
    return EXIT_OK


def cmd_corollary(args, out: _Outputs) -> int:
    cfg = _channel_from_args(args)
    if args.id:
        ids = sorted({int(i) for i in args.id})
    else:
        ids = list(ALL_IDS)
    rows = []
    families = {}
    for cid in ids:
        pts = corollary_points(cid, cfg, grid=args.grid)
        families[cid] = points_array(pts)
        for cp in pts:
            rows.append([cid, cp.sweep_value, cp.point.r1, cp.point.r2,
                         cp.point.r3])
    prefix = os.path.join(args.out, "corollary_")
    out.write_text(prefix + "points.csv",
                   _csv_text(("corollary_id", "sweep_value", "r1", "r2", "r3"),
                             rows))
    _write_meta(out, prefix + "meta.json", _meta(
        args, cfg, ids=ids, grid=args.grid,
        schemes={cid: scheme_for_corollary(cid).value for cid in ids},
    ))
    if args.figures:
        from . import report

        report.plot_corollary_points(
            out.register(prefix + "points.png"),
            "closed-form achievable point families", families)
    return EXIT_OK


def cmd_verify(args, out: _Outputs) -> int:
    cfg = _channel_from_args(args)
    results = run_all(cfg)
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status} {res.name}: {res.detail}"
        print(line)
        lines.append(line)
    n_fail = sum(not r.passed for r in results)
    summary = f"{len(results) - n_fail}/{len(results)} checks passed"
    print(summary)
    lines.append(summary)
    if args.out:
        out.write_text(os.path.join(args.out, "verify_report.txt"),
                       "\n".join(lines) + "\n")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


def _add_channel_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value channel config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one channel key (repeatable)")
    p.add_argument("--power-db", type=float, default=None,
                   help="set all three transmit powers in dB")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=True, help="render PNG figures next to the CSVs")


def _add_sampling_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=GAUSSIAN_SCHEMES, default="cums2")
    p.add_argument("--samples", type=int, default=2000,
                   help="number of parameter draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smart", action="store_true",
                   help="replace every other draw's coefficients with "
                        "interference-cancellation analogs")
    p.add_argument("--corollaries", action="store_true",
                   help="merge the scheme's closed-form point families")
    p.add_argument("--grid", type=int, default=101,
                   help="sweep grid for merged closed-form families")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogrates",
        description="Rate regions and outer bounds for three-user cognitive "
                    "interference channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="sampled achievable region")
    _add_channel_options(p)
    _add_sampling_options(p)
    p.add_argument("--view", action="append", choices=sorted(VIEWS),
                   help="hull view (repeatable; default r1-r23)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("slice", help="region at a guaranteed minimum rate")
    _add_channel_options(p)
    _add_sampling_options(p)
    p.add_argument("--axis", choices=sorted(AXIS_INDEX), required=True)
    p.add_argument("--at", action="append", metavar="C",
                   help="minimum rate value (repeatable)")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("outer", help="broadcast-duality outer bound")
    _add_channel_options(p)
    p.add_argument("--scheme", choices=GAUSSIAN_SCHEMES, default="cums2")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION,
                   help="points per power-simplex edge")
    p.add_argument("--view", action="append", choices=sorted(VIEWS))
    p.add_argument("--axis", choices=sorted(AXIS_INDEX), default="r1")
    p.add_argument("--at", action="append", metavar="C",
                   help="also emit outer slices at these minimum rates")
    p.set_defaults(func=cmd_outer)

    p = sub.add_parser("corollary", help="closed-form achievable points")
    _add_channel_options(p)
    p.add_argument("--id", action="append", type=int, choices=ALL_IDS,
                   help="family id (repeatable; default all)")
    p.add_argument("--grid", type=int, default=101)
    p.set_defaults(func=cmd_corollary)

    p = sub.add_parser("verify", help="run the cross-module property suite")
    _add_channel_options(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Outputs()
    try:
        return args.func(args, out)
    except ConfigError as exc:
        out.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - single CLI failure boundary
        out.cleanup()
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
