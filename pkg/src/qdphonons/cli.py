"""Command-line front end.

Subcommands: ``couplings``, ``validate``, ``indist``, ``sweep``,
``spectrum`` and ``table1``. Results go to ``--out`` (written atomically)
or stdout as CSV or JSON with 12 significant digits.

Exit codes: 0 success, 1 computation failure or failed validation,
2 input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CatalogError, ModeCatalog, fixtures_dir, parse_mode_table, parse_reference_couplings
from .coupling import Position, build_coupling_set
from .indistinguishability import (
    DEFAULT_BACKGROUND_FRACTION,
    DEFAULT_GAMMA_BULK,
    QuadratureConfig,
    Scenario,
    merit_report,
    temperature_sweep,
)
from .propagator import spectrum
from .quadrature import QuadratureError
from .units import TWO_PI

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_TEMPERATURE = 4.0
DEFAULT_TOLERANCE = 0.03


class UsageError(Exception):
    """Bad input: exit code 2."""


class ComputationError(Exception):
    """Computation could not produce a result: exit code 1."""


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    """Decimal scientific with 12 significant digits."""
    if isinstance(x, (bool, str)) or x is None:
        return "" if x is None else str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.11e}"


def _json_value(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(fmt(x))


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict

    def to_csv(self, timestamp: str | None) -> str:
        buf = io.StringIO()
        if timestamp:
            buf.write(f"# generated: {timestamp}\n")
        for k, v in self.meta.items():
            buf.write(f"# {k}: {fmt(v) if not isinstance(v, str) else v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self, timestamp: str | None) -> str:
        doc = {}
        if timestamp:
            doc["generated"] = timestamp
        doc.update({k: _json_value(v) for k, v in self.meta.items()})
        doc["columns"] = self.columns
        doc["rows"] = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
        return json.dumps(doc, indent=2) + "\n"


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def emit(table: Table, args) -> None:
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    text = table.to_json(stamp) if args.format == "json" else table.to_csv(stamp)
    if args.out:
        out = Path(args.out)
        if not out.parent.is_dir():
            raise UsageError(f"output directory does not exist: {out.parent}")
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# -- inputs -------------------------------------------------------------------

def parse_range(spec: str) -> np.ndarray:
    """``start:stop:count`` to an inclusive linear grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:count, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"range must be start:stop:count, got {spec!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError(f"range bounds must be finite, got {spec!r}")
    if count < 1:
        raise UsageError(f"range count must be at least 1, got {count}")
    if stop < start:
        raise UsageError(f"range stop {stop} is below start {start}")
    if count == 1:
        return np.array([start])
    return np.linspace(start, stop, count)


def _read_text(path) -> str:
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"file not found: {p}") from None
    except IsADirectoryError:
        raise UsageError(f"not a file: {p}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {p}: {exc.strerror}") from None


def _fixture(name: str) -> Path:
    return fixtures_dir() / name


def load_catalog_arg(path: str | None, label: str | None) -> ModeCatalog:
    if path is None:
        if label is None:
            raise UsageError("no mode catalog given; use --modes or --preset")
        path = _fixture(f"modes_{label}.csv")
    if label is None:
        label = Path(path).stem.removeprefix("modes_")
    try:
        return parse_mode_table(_read_text(path), label)
    except CatalogError as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_reference_arg(path: str | None, label: str):
    if path is None:
        path = _fixture(f"couplings_{label}.csv")
    try:
        return parse_reference_couplings(_read_text(path))
    except CatalogError as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_presets(path: str | None) -> dict:
    p = Path(path) if path else _fixture("presets.json")
    try:
        return json.loads(_read_text(p))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _preset(args) -> dict:
    if not getattr(args, "preset", None):
        return {}
    presets = load_presets(args.presets)
    configs = presets.get("configurations", {})
    if args.preset not in configs:
        raise UsageError(f"unknown preset {args.preset!r}; available: {', '.join(sorted(configs))}")
    merged = {k: v for k, v in presets.items() if not k.startswith("_") and k not in ("configurations", "expected")}
    merged.update(configs[args.preset])
    return merged


def build_scenario(args, *, need_efficiency: bool = True) -> tuple[Scenario, ModeCatalog]:
    p = _preset(args)
    label = p.get("catalog")
    catalog = load_catalog_arg(args.modes, label if args.modes is None else None)
    position = args.position or p.get("position")
    if position is None:
        raise UsageError("no emitter position given; use --position or --preset")
    purcell = args.purcell if args.purcell is not None else p.get("purcell")
    if purcell is None:
        raise UsageError("no Purcell factor given; use --purcell or --preset")
    gamma_bulk = args.gamma_bulk_ghz * 1e9 if args.gamma_bulk_ghz is not None else p.get("gamma_bulk", DEFAULT_GAMMA_BULK)
    gamma_b_rel = args.gamma_b_rel if args.gamma_b_rel is not None else p.get("gamma_b_rel", DEFAULT_BACKGROUND_FRACTION)
    temperature = args.temperature if args.temperature is not None else p.get("temperature", DEFAULT_TEMPERATURE)
    eff = getattr(args, "efficiency", None)
    overlap = getattr(args, "overlap", None)
    if eff is None and overlap is None and need_efficiency:
        eff = p.get("efficiency")
        overlap = p.get("overlap") if eff is None else None
    try:
        scenario = Scenario(
            catalog_label=catalog.structure_label,
            temperature=float(temperature),
            position=Position.parse(position),
            purcell=float(purcell),
            gamma_bulk=float(gamma_bulk),
            gamma_b=float(gamma_b_rel) * float(gamma_bulk),
            overlap=overlap,
            efficiency=eff,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return scenario, catalog


def quad_config(args) -> QuadratureConfig:
    try:
        if args.rel_tol is None:
            return QuadratureConfig()
        return QuadratureConfig(rel_tol=args.rel_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands -----------------------------------------------------------------

def cmd_couplings(args) -> int:
    catalog = load_catalog_arg(args.modes, None)
    T = DEFAULT_TEMPERATURE if args.temperature is None else args.temperature
    if not T >= 0:
        raise UsageError("temperature must be non-negative")
    position = Position.parse(args.position or Position.ON_SIDEWALL)
    cs = build_coupling_set(catalog, T, position)
    rows = [[e.family.value, e.index, e.omega / TWO_PI / 1e6, e.eta_sq, e.theta_sq, e.occupation] for e in cs.entries]
    meta = {"catalog": catalog.structure_label, "temperature_k": float(T), "position": position.value}
    emit(Table(["family", "index", "freq_mhz", "eta_sq", "theta_sq", "occupation"], rows, meta), args)
    return EXIT_OK


def _rel_dev(computed: float, reference: float) -> float:
    if reference == 0:
        return 0.0 if computed == 0 else math.inf
    return (computed - reference) / reference


def cmd_validate(args) -> int:
    catalog = load_catalog_arg(args.modes, None)
    reference = load_reference_arg(args.reference, catalog.structure_label)
    ref = {r.label: r for r in reference.entries}
    T = DEFAULT_TEMPERATURE if args.temperature is None else args.temperature
    tol = args.tolerance
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    cs = build_coupling_set(catalog, T, args.position or Position.ON_SIDEWALL)
    computed = {e.label: e for e in cs.entries}

    only_cat = [k for k in computed if k not in ref]
    only_ref = sorted((k for k in ref if k not in computed), key=lambda k: (ref[k].family.rank, ref[k].index))
    if only_cat or only_ref:
        msg = ["mode keys differ between catalog and reference"]
        if only_cat:
            msg.append(f"  only in catalog: {', '.join(only_cat)}")
        if only_ref:
            msg.append(f"  only in reference: {', '.join(only_ref)}")
        raise UsageError("\n".join(msg))

    rows, failures = [], []
    worst: dict[str, list[float]] = {}
    for e in cs.entries:
        r = ref[e.label]
        d_eta = _rel_dev(e.eta_sq, r.eta_sq)
        d_theta = _rel_dev(e.theta_sq, r.theta_sq)
        ok = abs(d_eta) <= tol and abs(d_theta) <= tol
        rows.append([e.family.value, e.index, e.eta_sq, r.eta_sq, d_eta, e.theta_sq, r.theta_sq, d_theta,
                     "PASS" if ok else "FAIL"])
        w = worst.setdefault(e.family.value, [0.0, 0.0])
        w[0] = max(w[0], abs(d_eta))
        w[1] = max(w[1], abs(d_theta))
        if not ok:
            failures.append(f"FAIL {e.family.value},{e.index}: eta_sq dev {d_eta:+.2%}, theta_sq dev {d_theta:+.2%}")

    meta = {"catalog": catalog.structure_label, "temperature_k": float(T), "tolerance": tol}
    for fam, (we, wt) in worst.items():
        meta[f"max_dev_eta_sq_{fam}"] = we
        meta[f"max_dev_theta_sq_{fam}"] = wt
    meta["status"] = "FAIL" if failures else "PASS"
    cols = ["family", "index", "eta_sq", "eta_sq_ref", "eta_sq_dev", "theta_sq", "theta_sq_ref", "theta_sq_dev", "status"]
    emit(Table(cols, rows, meta), args)

    for fam, (we, wt) in worst.items():
        print(f"{fam}: max |dev| eta_sq {we:.3%}, theta_sq {wt:.3%}", file=sys.stderr)
    for line in failures:
        print(line, file=sys.stderr)
    print(meta["status"], file=sys.stderr)
    return EXIT_FAILURE if failures else EXIT_OK


_REPORT_COLUMNS = ["catalog", "position", "temperature_k", "purcell", "gamma_bulk_per_s", "gamma_b_per_s",
                   "beta", "efficiency", "indistinguishability", "product", "quad_error"]


def cmd_indist(args) -> int:
    scenario, catalog = build_scenario(args)
    report = merit_report(scenario, catalog, quad_config(args))
    d = report.as_dict()
    emit(Table(_REPORT_COLUMNS, [[d[c] for c in _REPORT_COLUMNS]], {}), args)
    print(f"quadrature error estimate: {report.quad_error:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario, catalog = build_scenario(args, need_efficiency=False)
    if args.range is None:
        sw = load_presets(args.presets).get("sweep")
        if not sw:
            raise UsageError("no temperature range given; use --range start:stop:count")
        temps = parse_range(f"{sw['start']}:{sw['stop']}:{sw['count']}")
    else:
        temps = parse_range(args.range)
    if temps[0] < 0:
        raise UsageError("temperatures must be non-negative")
    series = temperature_sweep(scenario, catalog, temps, quad_config(args), workers=args.workers)
    series.sort(key=lambda p: p[0])
    meta = {"catalog": catalog.structure_label, "position": scenario.position.value,
            "purcell": scenario.purcell, "gamma_bulk_per_s": scenario.gamma_bulk}
    emit(Table(["temperature_k", "indistinguishability"], [list(p) for p in series], meta), args)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    scenario, catalog = build_scenario(args, need_efficiency=False)
    if args.range is None:
        raise UsageError("no detuning grid given; use --range start:stop:count (MHz)")
    det_mhz = parse_range(args.range)
    cs = build_coupling_set(catalog, scenario.temperature, scenario.position)
    cfg = quad_config(args)
    samples = spectrum(cs, scenario.gamma_c, det_mhz * 1e6 * TWO_PI, rel_tol=cfg.rel_tol,
                       envelope_cutoff=cfg.envelope_cutoff, max_step_fraction=cfg.max_step_fraction,
                       max_depth=cfg.max_depth)
    rows = [[m, s.s_value] for m, s in zip(det_mhz, samples)]
    meta = {"catalog": catalog.structure_label, "position": scenario.position.value,
            "temperature_k": scenario.temperature, "gamma_per_s": scenario.gamma_c}
    emit(Table(["detuning_mhz", "s_value_s"], rows, meta), args)
    return EXIT_OK


def cmd_table1(args) -> int:
    presets = load_presets(args.presets)
    configs = presets.get("configurations", {})
    if not configs:
        raise UsageError("preset file has no configurations")
    defaults = {k: v for k, v in presets.items() if not k.startswith("_") and k not in ("configurations", "expected")}
    cfg = quad_config(args)
    catalogs: dict[str, ModeCatalog] = {}
    rows = []
    for name in sorted(configs):
        p = {**defaults, **configs[name]}
        if args.temperature is not None:
            p["temperature"] = args.temperature
        label = p["catalog"]
        if label not in catalogs:
            catalogs[label] = load_catalog_arg(None, label)
        try:
            scenario = Scenario(
                catalog_label=label,
                temperature=float(p.get("temperature", DEFAULT_TEMPERATURE)),
                position=p["position"],
                purcell=float(p["purcell"]),
                gamma_bulk=float(p.get("gamma_bulk", DEFAULT_GAMMA_BULK)),
                gamma_b=float(p.get("gamma_b_rel", DEFAULT_BACKGROUND_FRACTION)) * float(p.get("gamma_bulk", DEFAULT_GAMMA_BULK)),
                efficiency=p.get("efficiency"),
                overlap=p.get("overlap"),
            )
        except (KeyError, ValueError) as exc:
            raise UsageError(f"preset {name!r}: {exc}") from None
        r = merit_report(scenario, catalogs[label], cfg)
        rows.append([name, label, scenario.position.value, r.purcell, r.efficiency,
                     r.indistinguishability, r.product, r.quad_error])
    cols = ["config", "catalog", "position", "purcell", "efficiency", "indistinguishability", "product", "quad_error"]
    emit(Table(cols, rows, {}), args)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modes", metavar="PATH", help="mode catalog CSV")
    common.add_argument("--temperature", type=float, metavar="K")
    common.add_argument("--position", choices=[p.value for p in Position])
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--no-timestamp", action="store_true", help="omit the generation timestamp")

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--preset", help="named configuration from the preset file")
    scen.add_argument("--presets", metavar="PATH", help="preset JSON (default: fixture directory)")
    scen.add_argument("--purcell", type=float)
    scen.add_argument("--gamma-bulk-ghz", type=float, metavar="GHZ", help="bulk decay rate in 1e9/s")
    scen.add_argument("--gamma-b-rel", type=float, metavar="X", help="background rate as a fraction of bulk")
    scen.add_argument("--rel-tol", type=float)

    parser = _Parser(prog="qdphonons", description="Phonon decoherence of a quantum-dot photon source.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("couplings", parents=[common], help="per-mode eta^2, theta^2, N")
    p.set_defaults(func=cmd_couplings)

    p = sub.add_parser("validate", parents=[common], help="compare couplings against a reference table")
    p.add_argument("--reference", metavar="PATH", help="reference coupling CSV")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="relative tolerance (default 0.03)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("indist", parents=[common, scen], help="indistinguishability and efficiency")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--efficiency", type=float)
    g.add_argument("--overlap", type=float, help="Gaussian overlap; efficiency = beta * overlap")
    p.set_defaults(func=cmd_indist)

    p = sub.add_parser("sweep", parents=[common, scen], help="I(T) series")
    p.add_argument("--range", metavar="a:b:n", help="temperatures in K")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", parents=[common, scen], help="emission spectrum S(w)")
    p.add_argument("--range", metavar="a:b:n", help="detunings in MHz")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("table1", parents=[common], help="four preset configurations")
    p.add_argument("--presets", metavar="PATH")
    p.add_argument("--rel-tol", type=float)
    p.set_defaults(func=cmd_table1)
    return parser


def _join_range(argv: list[str]) -> list[str]:
    # "--range -5:5:11" would otherwise read the grid as an option
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--range" and i + 1 < len(argv):
            out.append(f"--range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_range(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qdphonons {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ComputationError, FloatingPointError, ArithmeticError) as exc:
        print(f"qdphonons {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
