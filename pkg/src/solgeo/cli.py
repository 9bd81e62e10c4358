"""Command-line front end: ``solgeo catalog|curvature|verify|converge|scan``.

Exit codes: 0 success, 1 a tolerance or order target was missed, 2 bad
configuration (unknown surface, invalid resolutions, DELTA_CMC on a
non-CMC surface, ...).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, ambient, catalog, gapscan, simons
from .immersion import gaussian_curvature_intrinsic, sample
from .surfcalc import covariant_derivative_A, induced_christoffels

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_FD_TOL = 1e-8
DEFAULT_ALGEBRAIC_TOL = 1e-10
ORDER_RANGE = (1.5, 2.5)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    surface: str = "graph"
    c: Optional[float] = None
    eps: Optional[float] = None
    R: Optional[float] = None
    r: Optional[float] = None
    rho: Optional[float] = None
    resolutions: List[int] = field(default_factory=lambda: [32, 64, 128])
    ids: Optional[List[str]] = None
    tol: Dict[str, float] = field(default_factory=dict)
    order_min: float = ORDER_RANGE[0]
    order_max: float = ORDER_RANGE[1]
    out: Optional[str] = None
    format: Optional[str] = None

    def validate(self):
        if self.surface not in catalog.CATALOG:
            raise ConfigError(f"unknown surface {self.surface!r}; choose from {sorted(catalog.CATALOG)}")
        res = self.resolutions
        if not res or any(n < 8 for n in res):
            raise ConfigError(f"resolutions must be >= 8, got {res}")
        if any(b <= a for a, b in zip(res, res[1:])):
            raise ConfigError(f"resolutions must be strictly increasing, got {res}")
        if self.ids is not None:
            known = {i.value for i in simons.IdentityId}
            bad = [i for i in self.ids if i not in known]
            if bad:
                raise ConfigError(f"unknown identities {bad}; choose from {sorted(known)}")
        if self.format not in (None, "csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        try:
            self.chart()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def surface_params(self) -> dict:
        return {k: getattr(self, k) for k in catalog.PARAMS[self.surface] if getattr(self, k) is not None}

    def chart(self):
        return catalog.make(self.surface, **self.surface_params())

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


def _parse_floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_tol(text: str) -> Dict[str, float]:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" in item:
            k, v = item.split("=", 1)
            out[k.strip().upper()] = float(v)
        else:
            out["*"] = float(item)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    try:
        cfg = _merge_config(args)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad configuration value: {exc}") from None
    return cfg.validate()


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        names = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - names - {"params"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for k, v in raw.pop("params", {}).items():
            raw[k] = v
        for k, v in raw.items():
            setattr(cfg, k, v)
    for name in ("surface", "c", "eps", "R", "r", "rho", "out", "format"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "res", None):
        cfg.resolutions = [int(x) for x in _parse_floats(args.res)]
    if getattr(args, "ids", None):
        cfg.ids = [x.strip().upper() for x in args.ids.split(",") if x.strip()]
    if getattr(args, "tol", None):
        cfg.tol = _parse_tol(args.tol)
    if getattr(args, "order_range", None):
        cfg.order_min, cfg.order_max = _parse_floats(args.order_range)
    cfg.resolutions = [int(n) for n in cfg.resolutions]
    cfg.tol = {str(k).upper(): float(v) for k, v in cfg.tol.items()}
    return cfg


# -- deterministic serialisation ---------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with sorted keys, LF newlines and floats at 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _provenance(cfg: RunConfig, command: str) -> dict:
    return {"tool": "solgeo", "version": __version__, "command": command, "config": cfg.echo()}


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg: str):
    print(msg, file=sys.stderr)


# -- commands ----------------------------------------------------------------

def cmd_catalog(args) -> int:
    rows = {}
    for name in sorted(catalog.CATALOG):
        ch = catalog.make(name)
        rows[name] = {
            "params": ch.params,
            "domain": list(ch.domain),
            "periodic": list(ch.periodic),
            "closed": ch.closed,
            "cmc": ch.cmc,
            "orientation": ch.orientation,
        }
    _emit(dumps(rows) + "\n", getattr(args, "out", None))
    return EXIT_OK


def surface_properties(chart, n: int = 64) -> dict:
    grid = sample(chart, n)
    d = grid.data
    _, nab2 = covariant_derivative_A(grid.field(d.A), induced_christoffels(grid.metric), grid.metric)
    Kint = gaussian_curvature_intrinsic(grid, n).values

    def rng(x):
        return [float(np.nanmin(x)), float(np.nanmax(x))]

    return {
        "resolution": n,
        "K": rng(d.K),
        "K_intrinsic": rng(Kint),
        "f": rng(d.f),
        "normA2": rng(d.normA2),
        "max_abs_h": float(np.nanmax(np.abs(d.h))),
        "nablaA2": rng(nab2.values),
    }


def curvature_report(surface: Optional[str] = None, params: Optional[dict] = None,
                     resolution: int = 64) -> dict:
    E = (ambient.E1, ambient.E2, ambient.E3)
    sec = {
        "E1,E3": float(ambient.sectional_curvature(E[0], E[2])),
        "E2,E3": float(ambient.sectional_curvature(E[1], E[2])),
        "E1,E2": float(ambient.sectional_curvature(E[0], E[1])),
    }
    path = ambient.geodesic_flow([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], 10.0, 1e-3)
    drift = float(np.max(np.abs(path.points[:, :2])))
    speed = float(np.max(np.abs(path.speeds - path.speeds[0])))
    names = [surface] if surface else ["leaf_x", "leaf_y", "leaf_z"]
    surfaces = {n: surface_properties(catalog.make(n, **(params or {})), resolution) for n in names}
    return {
        "sectional_curvature": sec,
        "vertical_geodesic": {"T": 10.0, "dt": 1e-3, "max_xy_drift": drift, "speed_drift": speed},
        "surfaces": surfaces,
    }


def cmd_curvature(args) -> int:
    cfg = build_config(args)
    surface = args.surface
    rep = curvature_report(surface, cfg.surface_params() if surface else None, cfg.resolutions[-1] if args.res else 64)
    rep.update(_provenance(cfg, "curvature"))
    _emit(dumps(rep) + "\n", cfg.out)
    return EXIT_OK


def _tolerance(cfg: RunConfig, ident: str) -> float:
    if ident in cfg.tol:
        return cfg.tol[ident]
    if ident in ("REMARK", "FRAME_INDEP", "DELTA_COMBINATION"):
        return DEFAULT_ALGEBRAIC_TOL
    return cfg.tol.get("*", DEFAULT_FD_TOL)


def judge(report, tol: float, order_range) -> str:
    """'tol' if the finest residual meets ``tol``, 'order' if the observed order is in range, else 'FAIL'."""
    if report.max_abs[-1] <= tol:
        return "tol"
    o = report.order
    if o is not None and order_range[0] <= o <= order_range[1]:
        return "order"
    return "FAIL"


def default_ids(chart) -> List[str]:
    ids = [i.value for i in simons.IdentityId]
    if not chart.cmc:
        ids.remove(simons.IdentityId.DELTA_CMC.value)
    return ids


def run_verification(cfg: RunConfig):
    """Residual reports for the configured identities, each with its tolerance and verdict."""
    chart = cfg.chart()
    ids = cfg.ids or default_ids(chart)
    reports = list(simons.residual_suite(chart, ids, cfg.resolutions).values())
    if cfg.ids is None:
        reports.append(simons.consistency_delta_combination(chart, cfg.resolutions))
    verdicts = []
    for rep in reports:
        tol = _tolerance(cfg, rep.identity)
        verdicts.append((rep, tol, judge(rep, tol, (cfg.order_min, cfg.order_max))))
    return verdicts


def _residual_table(verdicts, cfg: RunConfig, command: str, fmt_: str) -> str:
    if fmt_ == "json":
        rows = []
        for rep, tol, verdict in verdicts:
            for ident, n, mx, mn, o in rep.rows():
                rows.append({"identity": ident, "resolution": n, "max_res": mx, "mean_res": mn, "order": o})
        doc = _provenance(cfg, command)
        doc["rows"] = rows
        doc["verdicts"] = {rep.identity: {"status": v, "tol": tol, "order": rep.order}
                           for rep, tol, v in verdicts}
        return dumps(doc) + "\n"
    buf = io.StringIO()
    buf.write(f"# solgeo {__version__} {command} config={json.dumps(cfg.echo(), sort_keys=True)}\n")
    buf.write("identity,resolution,max_res,mean_res,order\n")
    for rep, _, _ in verdicts:
        for ident, n, mx, mn, o in rep.rows():
            buf.write(f"{ident},{n},{fmt(mx)},{fmt(mn)},{fmt(o)}\n")
    return buf.getvalue()


def _verify_like(args, command: str) -> int:
    cfg = build_config(args)
    chart = cfg.chart()
    if cfg.ids and "DELTA_CMC" in cfg.ids and not chart.cmc:
        _say(f"error: DELTA_CMC needs a constant mean curvature surface; {chart.name} is not one")
        return EXIT_CONFIG
    if command == "converge" and len(cfg.resolutions) < 3:
        raise ConfigError("a convergence study needs at least three resolutions")
    verdicts = run_verification(cfg)
    _emit(_residual_table(verdicts, cfg, command, cfg.format or "csv"), cfg.out)
    failed = False
    for rep, tol, verdict in verdicts:
        order = rep.order
        _say(f"{verdict:5s} {rep.identity:18s} max_res={fmt(rep.max_abs[-1])} "
             f"order={'-' if order is None else format(order, '.3f')} tol={tol:g}")
        if command == "converge":
            steps = " ".join("-" if o is None else format(o, ".3f") for o in rep.orders)
            _say(f"      per-step orders: {steps}")
        failed |= verdict == "FAIL"
    return EXIT_FAIL if failed else EXIT_OK


def cmd_verify(args) -> int:
    return _verify_like(args, "verify")


def cmd_converge(args) -> int:
    return _verify_like(args, "converge")


def cmd_scan(args) -> int:
    cfg = build_config(args)
    chart = cfg.chart()
    rep = gapscan.scan(chart, cfg.resolutions[-1])
    doc = _provenance(cfg, "scan")
    doc["report"] = rep.to_dict()
    _emit(dumps(doc) + "\n", cfg.out)
    ok = rep.laplacian_integral_ok
    if ok is not None:
        _say(f"{'ok' if ok else 'FAIL'} integral of Lap|A|^2 = {fmt(rep.integrals['laplacian_normA2'])}"
             f" (tol {fmt(rep.laplacian_tolerance)})")
    else:
        _say(f"integrals omitted: {rep.flags.get('integrals', '')}")
    return EXIT_FAIL if ok is False else EXIT_OK


# -- argument parsing --------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, res_default: Optional[str] = None):
    p.add_argument("--surface", help=f"catalog surface: {', '.join(sorted(catalog.CATALOG))}")
    p.add_argument("--c", type=float, help="leaf offset")
    p.add_argument("--eps", type=float, help="graph amplitude")
    p.add_argument("--R", type=float, help="torus major radius")
    p.add_argument("--r", type=float, help="torus minor radius")
    p.add_argument("--rho", type=float, help="sphere radius")
    p.add_argument("--res", help="comma-separated lattice sizes, e.g. 32,64,128")
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solgeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"solgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list catalog surfaces")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("curvature", help="ambient curvature table and leaf properties")
    _add_common(p)
    p.set_defaults(func=cmd_curvature)

    for name, func, helptext in (
        ("verify", cmd_verify, "residuals of the Simons-type identities"),
        ("converge", cmd_converge, "convergence study over several resolutions"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--ids", help="comma-separated identity names (default: all applicable)")
        p.add_argument("--tol", help="absolute tolerance, either one value or ID=value pairs")
        p.add_argument("--order-range", help="accepted convergence orders, default 1.5,2.5")
        p.set_defaults(func=func)

    p = sub.add_parser("scan", help="gap-hypothesis audit (JSON)")
    _add_common(p)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, KeyError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        _say(f"error: {msg}")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
