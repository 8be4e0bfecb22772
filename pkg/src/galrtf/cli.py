"""Command-line entry point: ``galrtf <command> [--config file.json] ...``.

Configuration is a JSON file; any key left out takes its value from
``DEFAULT_CONFIG``.  Schema (all keys optional):

    {
      "E_disc": -4,                      # discriminant of E; tau = its squarefree part
      "test_function": {
        "real": {"profile": "gauss" | "bump", "center": [u, v, b, c],
                 "scales": [4 positive numbers], "poly": [a0, a1, ...], "amplitude": 1.0},
        "finite": [
          {"prime": 3, "basic": true},
          {"prime": 5, "level": 1, "balls": [{"center": ["1", "0", "0", "0"], "value": "1"}]}
        ]
      },
      "data": ["2", "0", "1", "-1"],     # t0 values
      "T": [1.0, 2.0, 3.0],
      "tolerances": {"depth": 4, "derivative": 1e-6},
      "volumes": {"sl2": 1.0, "gm1": 1.0, "mb1": 1.0, "torus": 1.0},
      "seed": 20240601,
      "grid": {"lo": "-5", "hi": "5", "count": 21, "X": "1",
               "functions": ["tau_hat:B:G", "sigma:B:G", "gamma:B:G", ...]},
      "zeta": {"s": ["2", "3/2", "1"], "characters": [1, -4, 5]},
      "tori": {"models": 20, "classification": 100}
    }

Rationals may be given as strings ("3/5") or integers.  Output is JSON with
sorted keys, so identical (config, seed) runs produce identical bytes.
Exit status is 0 exactly when every requested check passed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .arith import DomainError, QuadAlg, QuadraticCharacter, is_prime, squarefree_part
from .chambers import rational_grid, sl2_chambers
from .expansion import Volumes, assemble, iota_fiber, weighted_orbital
from .integrals import kappa_average, tate_zeta_global
from .symspace import ELLIPTIC, RSS, classify
from .testfns import PROFILES, REAL, ArchFn, BallFn, BasicFn, GlobalTestFn
from .tori import classification_sweep, poisson_sweep
from .verify import DEFAULT_SEED, SL2_CLOSED_FORMS, run_all

COMMANDS = ("cones", "classify", "zeta", "orbital", "expand", "tori", "verify")

DEFAULT_CONFIG = {
    "E_disc": -4,
    "test_function": {
        "real": {"profile": "gauss", "center": [1.0, 0.2, 0.3, -0.1], "scales": [2.5, 1.0, 1.5, 1.0],
                 "poly": [1.0], "amplitude": 1.0},
        "finite": [],
    },
    "data": ["2", "0", "1", "-1"],
    "T": [1.0, 2.0, 3.0],
    "tolerances": {"depth": 4, "derivative": 1e-6},
    "volumes": {"sl2": 1.0, "gm1": 1.0, "mb1": 1.0, "torus": 1.0},
    "seed": DEFAULT_SEED,
    "grid": {"lo": "-5", "hi": "5", "count": 21, "X": "1",
             "functions": ["tau_hat:B:G", "tau_hat:B:B", "tau_hat:G:G", "sigma:B:G", "sigma:B:B",
                           "sigma:G:G", "gamma:B:G", "gamma:G:G"]},
    "zeta": {"s": ["2", "3/2", "1"], "characters": [1, -4, 5]},
    "tori": {"models": 20, "classification": 100},
}


class ConfigError(DomainError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# config parsing

def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _rational(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(path, "expected an integer or a rational string like '3/5'")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(path, f"cannot read {value!r} as a rational") from None


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, "expected a number")
    try:
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(path, f"cannot read {value!r} as a number") from None


def _int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _list(value, path: str, length: int | None = None) -> list:
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(value)}")
    return value


def _dict(value, path: str, allowed) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    extra = sorted(set(value) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown key")
    return value


def parse_real(node: dict, path: str) -> ArchFn:
    node = _dict(node, path, ("profile", "center", "scales", "poly", "amplitude"))
    profile = node.get("profile", "gauss")
    if profile not in PROFILES:
        raise ConfigError(f"{path}.profile", f"must be one of {list(PROFILES)}")
    center = [_number(c, f"{path}.center[{i}]") for i, c in enumerate(_list(node.get("center", [1, 0, 0, 0]),
                                                                           f"{path}.center", 4))]
    scales = [_number(c, f"{path}.scales[{i}]") for i, c in enumerate(_list(node.get("scales", [1, 1, 1, 1]),
                                                                           f"{path}.scales", 4))]
    for i, s in enumerate(scales):
        if s <= 0:
            raise ConfigError(f"{path}.scales[{i}]", "must be positive")
    poly = [_number(c, f"{path}.poly[{i}]") for i, c in enumerate(_list(node.get("poly", [1.0]), f"{path}.poly"))]
    if not poly:
        raise ConfigError(f"{path}.poly", "needs at least one coefficient")
    amplitude = _number(node.get("amplitude", 1.0), f"{path}.amplitude")
    return ArchFn(center, scales, profile, poly, amplitude)


def parse_finite(node: dict, path: str):
    node = _dict(node, path, ("prime", "basic", "level", "balls"))
    if "prime" not in node:
        raise ConfigError(f"{path}.prime", "missing")
    p = _int(node["prime"], f"{path}.prime", 2)
    if not is_prime(p):
        raise ConfigError(f"{path}.prime", f"{p} is not prime")
    if node.get("basic", False):
        if "balls" in node or "level" in node:
            raise ConfigError(path, "a basic entry takes no level or balls")
        return BasicFn(p)
    if "balls" not in node:
        raise ConfigError(f"{path}.balls", "missing (or set \"basic\": true)")
    level = _int(node.get("level", 0), f"{path}.level", 0)
    balls = []
    for i, ball in enumerate(_list(node["balls"], f"{path}.balls")):
        bpath = f"{path}.balls[{i}]"
        ball = _dict(ball, bpath, ("center", "value"))
        if "center" not in ball:
            raise ConfigError(f"{bpath}.center", "missing")
        center = [_rational(c, f"{bpath}.center[{j}]") for j, c in enumerate(_list(ball["center"],
                                                                                 f"{bpath}.center", 4))]
        balls.append((center, _rational(ball.get("value", 1), f"{bpath}.value")))
    if not balls:
        raise ConfigError(f"{path}.balls", "needs at least one ball")
    return BallFn(p, level, balls)


def parse_test_function(node: dict, tau: int, path: str = "test_function") -> GlobalTestFn:
    node = _dict(node, path, ("real", "finite"))
    local = {REAL: parse_real(node.get("real", {}), f"{path}.real")}
    for i, entry in enumerate(_list(node.get("finite", []), f"{path}.finite")):
        fn = parse_finite(entry, f"{path}.finite[{i}]")
        if fn.place in local:
            raise ConfigError(f"{path}.finite[{i}].prime", f"place {fn.place} listed twice")
        local[fn.place] = fn
    return GlobalTestFn(tau, local)


class RunConfig:
    """A validated configuration."""

    def __init__(self, raw: dict):
        raw = _dict(raw, "", DEFAULT_CONFIG.keys())
        self.raw = raw
        disc = _int(raw["E_disc"], "E_disc")
        if disc == 0 or squarefree_part(disc) == 1:
            raise ConfigError("E_disc", "must not be zero or a square (E is a field)")
        self.E = QuadAlg(squarefree_part(disc))
        self.tau = self.E.core
        self.f = parse_test_function(raw["test_function"], self.tau)
        self.data = [_rational(t, f"data[{i}]") for i, t in enumerate(_list(raw["data"], "data"))]
        self.T = [_number(t, f"T[{i}]") for i, t in enumerate(_list(raw["T"], "T"))]
        tol = _dict(raw["tolerances"], "tolerances", DEFAULT_CONFIG["tolerances"].keys())
        self.depth = _int(tol["depth"], "tolerances.depth", 1)
        self.derivative_tol = _number(tol["derivative"], "tolerances.derivative")
        vols = _dict(raw["volumes"], "volumes", DEFAULT_CONFIG["volumes"].keys())
        self.volumes = Volumes(**{k: _number(v, f"volumes.{k}") for k, v in vols.items()})
        self.seed = _int(raw["seed"], "seed")
        grid = _dict(raw["grid"], "grid", DEFAULT_CONFIG["grid"].keys())
        self.grid = {
            "lo": _rational(grid["lo"], "grid.lo"),
            "hi": _rational(grid["hi"], "grid.hi"),
            "count": _int(grid["count"], "grid.count", 2),
            "X": _rational(grid["X"], "grid.X"),
            "functions": [self._indicator(name, f"grid.functions[{i}]")
                          for i, name in enumerate(_list(grid["functions"], "grid.functions"))],
        }
        if self.grid["lo"] >= self.grid["hi"]:
            raise ConfigError("grid.hi", "must exceed grid.lo")
        zeta = _dict(raw["zeta"], "zeta", DEFAULT_CONFIG["zeta"].keys())
        self.zeta_s = [_rational(s, f"zeta.s[{i}]") if not isinstance(s, float) else s
                       for i, s in enumerate(_list(zeta["s"], "zeta.s"))]
        for i, s in enumerate(self.zeta_s):
            if s <= 0:
                raise ConfigError(f"zeta.s[{i}]", "needs s > 0")
        self.characters = []
        for i, D in enumerate(_list(zeta["characters"], "zeta.characters")):
            try:
                self.characters.append(QuadraticCharacter(_int(D, f"zeta.characters[{i}]")))
            except DomainError as exc:
                raise ConfigError(f"zeta.characters[{i}]", str(exc)) from None
        tori = _dict(raw["tori"], "tori", DEFAULT_CONFIG["tori"].keys())
        self.tori_models = _int(tori["models"], "tori.models", 1)
        self.tori_classification = _int(tori["classification"], "tori.classification", 1)

    @staticmethod
    def _indicator(name, path: str) -> tuple[str, str, str]:
        if not isinstance(name, str) or name.count(":") != 2:
            raise ConfigError(path, "expected 'kind:P:Q' with kind tau, tau_hat, sigma or gamma")
        kind, P, Q = name.split(":")
        if kind not in ("tau", "tau_hat", "sigma", "gamma"):
            raise ConfigError(path, f"unknown indicator kind {kind!r}")
        S = sl2_chambers()
        if P not in S.labels() or Q not in S.labels() or not S.contains(P, Q):
            raise ConfigError(path, f"{P} must be a parabolic contained in {Q}")
        return kind, P, Q


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    raw = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("<file>", "top level must be an object")
    return RunConfig(_merge(DEFAULT_CONFIG, _merge(raw, overrides or {})))


# ---------------------------------------------------------------------------
# commands: each returns (report, csv table or None, passed)

def _provenance(module: str, requested=None, achieved=None) -> dict:
    return {"module": module, "tolerance_requested": requested, "tolerance_achieved": achieved}


def cmd_cones(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    S = sl2_chambers()
    g = cfg.grid
    X = g["X"]
    names = [f"{k}_{P}^{Q}" for k, P, Q in g["functions"]]
    fns = [getattr(S, k)(P, Q) for k, P, Q in g["functions"]]
    rows, mismatches = [], []
    for H in rational_grid(g["lo"], g["hi"], g["count"]):
        row = [str(H), str(X)]
        for (kind, P, Q), fn, name in zip(g["functions"], fns, names):
            value = fn((H,), (X,)) if kind == "gamma" else fn((H,))
            row.append(value)
            form = SL2_CLOSED_FORMS.get((kind, P, Q))
            if form is not None:
                expected = form(H, X) if kind == "gamma" else form(H)
                if expected != value:
                    mismatches.append({"function": name, "H": str(H), "value": value, "closed_form": expected})
        rows.append(row)
    table = [["H", "X"] + names] + rows
    report = {"command": "cones", "columns": table[0], "rows": rows, "closed_form_mismatches": mismatches,
              "provenance": _provenance("chambers", 0, 0 if not mismatches else None)}
    return report, table, not mismatches


def cmd_classify(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    data = [Fraction(args.t0)] if args.t0 is not None else cfg.data
    records = []
    for t0 in data:
        d = classify(t0, cfg.E)
        records.append({**d.as_dict(), "E_core": cfg.tau})
    table = [["t0", "class", "splitting_type_core", "E_core"]] + [
        [r["t0"], r["class"], r["splitting_type_core"], r["E_core"]] for r in records]
    report = {"command": "classify", "data": records, "provenance": _provenance("symspace", 0, 0)}
    return report, table, True


def _complex_out(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def cmd_zeta(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    out, table = [], [["D", "s", "value", "pole", "residue", "error"]]
    for kap in cfg.characters:
        lines = kappa_average(cfg.f, kap)
        for s in cfg.zeta_s:
            z = tate_zeta_global(lines, kap, s, cfg.volumes.gm1)
            value = None if z.pole else _complex_out(z.value)
            rec = {"D": kap.D, "s": str(s), "value": value, "pole": z.pole, "residue": z.residue,
                   "parts": {str(v): _complex_out(p) for v, p in sorted(z.parts.items())},
                   "volume": Volumes.SYMBOLS["gm1"],
                   "provenance": _provenance("integrals", None, z.error)}
            out.append(rec)
            table.append([kap.D, str(s), value, z.pole, z.residue, z.error])
    return {"command": "zeta", "values": out}, table, True


def cmd_orbital(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    out, table, ok = [], [["t0", "class", "point", "value", "weighted", "stabilized"]], True
    for t0 in cfg.data:
        d = classify(t0, cfg.E)
        if d.cls == ELLIPTIC:
            rep = assemble(d, cfg.f, cfg.volumes, cfg.depth)
            for c in rep.diagnostics["classes"]:
                ok = ok and c["stabilized"]
                table.append([str(t0), d.cls, f"xi={c['xi']}", c["value"], None, c["stabilized"]])
            out.append({"datum": d.as_dict(), "classes": rep.diagnostics["classes"],
                        "provenance": _provenance("orbital", f"depth {cfg.depth} vs {cfg.depth + 2}", 0)})
        elif d.cls == RSS:
            eta = iota_fiber(d, cfg.E)[0]
            w = weighted_orbital(cfg.f, eta)
            table.append([str(t0), d.cls, " ".join(str(c) for c in eta.coords), w.value, w.weighted, True])
            out.append({"datum": d.as_dict(), "eta": [str(c) for c in eta.coords], "value": w.value,
                        "weighted": w.weighted, "local": {str(v): x for v, x in w.local.items()},
                        "local_weights": {str(v): x for v, x in w.local_weights.items()},
                        "provenance": _provenance("orbital", 1e-10, None)})
        else:
            out.append({"datum": d.as_dict(), "skipped": "unipotent data have no regular orbit; use expand"})
    return {"command": "orbital", "data": out}, table, ok


def cmd_expand(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    data = [Fraction(args.t0)] if getattr(args, "t0", None) is not None else cfg.data
    reports, table = [], [["datum", "term", "volume_symbol", "numeric", "T_slope"]]
    for t0 in data:
        d = classify(t0, cfg.E)
        rep = assemble(d, cfg.f, cfg.volumes, cfg.depth, cfg.derivative_tol)
        body = rep.as_dict()
        body["J_T"] = [{"T": T, "value": rep.record(T)} for T in cfg.T]
        achieved = rep.diagnostics.get("derivative_error")
        body["provenance"] = _provenance("expansion", cfg.derivative_tol if achieved is not None else None,
                                         achieved)
        reports.append(body)
        label = f"{d.cls} t0={d.t0}"
        for t in rep.terms:
            table.append([label, t.label, Volumes.SYMBOLS[t.volume], t.numeric, t.slope])
    report = {"command": "expand", "E_core": cfg.tau, "volumes": vars(cfg.volumes), "reports": reports}
    return report, table, True


def cmd_tori(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    sweep = poisson_sweep(cfg.tori_models, seed=cfg.seed)
    cls = classification_sweep(cfg.tori_classification, seed=cfg.seed)
    table = [["N", "d", "section", "geom", "characters", "agrees"]] + [
        [m.get("N"), m.get("d"), m["section"], m["geom"], m["characters"], m["agrees"]] for m in sweep["models"]]
    report = {"command": "tori", "poisson": sweep, "classification": cls,
              "provenance": _provenance("tori", 0, 0 if sweep["passed"] and cls["passed"] else None)}
    return report, table, sweep["passed"] and cls["passed"]


def cmd_verify(cfg: RunConfig, args) -> tuple[dict, list, bool]:
    only = set(args.only) if args.only else None
    results = run_all(cfg.seed, only, args.jobs)
    for r in results:
        print(r.line, file=sys.stderr)
    criteria = []
    for r in results:
        body = r.as_dict()
        # wall-clock time goes to stderr only so that the JSON stays reproducible
        body.pop("seconds")
        body["within_budget"] = r.seconds < r.budget
        criteria.append(body)
    table = [["number", "title", "passed", "budget"]] + [[r.number, r.title, r.passed, r.budget] for r in results]
    ok = all(r.passed for r in results)
    return {"command": "verify", "seed": cfg.seed, "criteria": criteria, "all_passed": ok}, table, ok


HANDLERS = {"cones": cmd_cones, "classify": cmd_classify, "zeta": cmd_zeta, "orbital": cmd_orbital,
            "expand": cmd_expand, "tori": cmd_tori, "verify": cmd_verify}


def run(command: str, cfg: RunConfig, args=None) -> tuple[dict, list, bool]:
    if command not in HANDLERS:
        raise DomainError(f"unknown command {command!r}")
    args = args or argparse.Namespace(t0=None, only=None, jobs=1)
    return HANDLERS[command](cfg, args)


# ---------------------------------------------------------------------------
# output

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    return str(obj)


def to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n"


def to_csv(table: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in table:
        writer.writerow(["" if x is None else x for x in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="override the configured random seed")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for verify")
    parser = argparse.ArgumentParser(prog="galrtf", description="Geometric side of the relative trace formula "
                                     "for (Res_{E/Q} SL2, SL2).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cones", parents=[common], help="tabulate the chamber indicator functions on a grid")
    p = sub.add_parser("classify", parents=[common], help="classify t0 relative to E")
    p.add_argument("t0", nargs="?", help="rational t0 (default: the configured data)")
    p.add_argument("disc", nargs="?", type=int, help="discriminant of E (default: E_disc from the config)")
    sub.add_parser("zeta", parents=[common], help="global Tate zeta integrals of the test function")
    sub.add_parser("orbital", parents=[common], help="orbital integrals for the configured data")
    p = sub.add_parser("expand", parents=[common], help="fine geometric expansion for the configured data")
    p.add_argument("--t0", help="expand this datum only")
    sub.add_parser("tori", parents=[common], help="torus classification and finite Poisson suite")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criteria")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.command == "classify" and args.disc is not None:
        overrides["E_disc"] = args.disc
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, overrides)
        for name in ("t0",):
            if getattr(args, name, None) is not None:
                _rational(getattr(args, name), name)
        report, table, ok = run(args.command, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = to_json(report) if args.format == "json" else to_csv(table)
    if args.out:
        Path(args.out).write_text(text)
        if args.command == "expand" and args.format == "json":
            Path(args.out).with_suffix(".csv").write_text(to_csv(table))
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
