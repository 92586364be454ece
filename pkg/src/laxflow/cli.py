"""Command line front end: scenario runs, single analyses and the benchmark.

Exit codes: 0 when every requested verdict passes, 1 when a verdict fails,
2 on configuration errors (reported as JSON on stdout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .curvefield import BaseCurve, Place, canonical_divisor
from .flow import (
    AnsatzEntry,
    AnsatzSpec,
    FlowError,
    Trajectory,
    ansatz_m_poly,
    integrate_flow,
    sample_drifts,
    poly_pow,
)
from .laxmat import (
    KricheverLax,
    LaxError,
    construct_lax,
    gauge_transform,
    lax_from_json,
    mumford_lax,
    random_params,
    validate_lax,
)

ANALYSES = ("validate", "spectral", "flow", "linearity", "abel", "hamiltonian")
NEEDS_FLOW = ("linearity", "abel", "hamiltonian")

DEFAULT_TOL = {
    "validate": 1e-8,
    "drift": 1e-8,
    "movingDrift": 1e-3,
    "stationary": 1e-10,
    "constancy": 1e-9,
    "linearity": 1e-8,
    "gauge": 1e-9,
    "qshift": 1e-8,
    "secondDifference": 1e-5,
    "velocityAgreement": 1e-5,
    "hamiltonianDrift": 1e-8,
    "hamiltonianGauge": 1e-10,
    "commuting": 1e-6,
}

MUMFORD_G1 = {
    "name": "mumford-g1",
    "lax": "mumford-g1",
    "ansatz": [{"place": "infinity", "n": 1, "m": -1}],
    "integration": {"tEnd": 1.0, "dt": 1e-3, "stride": 50},
    "analyses": list(ANALYSES),
    "commuting": [[1, -1], [1, -2]],
    "seed": 0,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic output
# ---------------------------------------------------------------------------

def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e15:
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and stable key order."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, bool, type(None))) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# scenario loading
# ---------------------------------------------------------------------------

def mumford_g1() -> KricheverLax:
    """L = [[0, z], [z^2 - 1, 0]] on the rational line; spectral curve mu^2 = z^3 - z."""
    return mumford_lax([-1.0, 0.0, 1.0], [0.0], [0.0, 1.0])


def _place(d) -> Place:
    if d == "infinity":
        return Place("infinity")
    if isinstance(d, dict):
        return Place.from_json(d)
    raise ConfigError(f"bad place {d!r}")


def _ansatz(items) -> AnsatzSpec | None:
    if not items:
        return None
    try:
        return AnsatzSpec(tuple(AnsatzEntry(_place(e["place"]), int(e["n"]), int(e["m"])) for e in items))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad ansatz entry: {exc}") from exc


def load_lax(src, base: Path, seed: int) -> KricheverLax:
    if src == "mumford-g1" or (isinstance(src, dict) and src.get("builtin") == "mumford-g1"):
        return mumford_g1()
    if isinstance(src, dict) and "builtin" in src:
        raise ConfigError(f"unknown builtin {src['builtin']!r}")
    if isinstance(src, str) or (isinstance(src, dict) and "file" in src):
        path = base / (src if isinstance(src, str) else src["file"])
        if not path.exists():
            raise ConfigError(f"lax file {path} does not exist")
        d = json.loads(path.read_text())
        m, t, K = lax_from_json(d)
        rep = validate_lax(m, t, K)
        if rep.lax is None:
            raise ConfigError(f"lax file {path} does not describe a Lax matrix: {rep.to_json()}")
        return rep.lax
    if isinstance(src, dict) and "construct" in src:
        c = src["construct"]
        try:
            curve = BaseCurve.from_json(c["curve"])
            rng = np.random.default_rng(int(c.get("seed", seed)))
            K = canonical_divisor(curve)
            return construct_lax(curve, K, random_params(curve, int(c.get("l", 2)), rng, K))
        except (KeyError, LaxError) as exc:
            raise ConfigError(f"construct failed: {exc}") from exc
    raise ConfigError("lax source must be a builtin, a file or a construct block")


def _generator(scn: dict, a: AnsatzSpec | None):
    """(kind, mfun) for the fixed-pole regime; mfun(P, t) returns M."""
    g = scn.get("generator", {"kind": "ansatz"})
    kind = g.get("kind", "ansatz")
    if kind == "ansatz":
        if a is None:
            raise ConfigError("the ansatz generator needs an ansatz")
        return kind, lambda P, t: ansatz_m_poly(P, a)
    if kind == "polynomial":
        coeffs = [complex(*c) if isinstance(c, list) else complex(c) for c in g["coeffs"]]

        def mfun(P, t):
            out = np.zeros((1,) + P.shape[1:], dtype=complex)
            for d, c in enumerate(coeffs):
                Ld = poly_pow(P, d)
                if Ld.shape[0] > out.shape[0]:
                    out = np.pad(out, ((0, Ld.shape[0] - out.shape[0]), (0, 0), (0, 0)))
                out[: Ld.shape[0]] += c * Ld
            return out

        return kind, mfun
    if kind == "curvature":
        if a is None:
            raise ConfigError("the curvature generator needs an ansatz")
        rate = float(g.get("rate", 1.0))
        return kind, lambda P, t: (1.0 + rate * t) * ansatz_m_poly(P, a)
    raise ConfigError(f"unknown generator kind {kind!r}")


def check_scenario(scn: dict) -> list[str]:
    analyses = list(scn.get("analyses", ANALYSES))
    bad = [x for x in analyses if x not in ANALYSES]
    if bad:
        raise ConfigError(f"unknown analyses {bad}")
    for x in analyses:
        if x in NEEDS_FLOW and "flow" not in analyses:
            raise ConfigError(f"analysis {x!r} requires 'flow'")
    if "flow" in analyses:
        integ = scn.get("integration")
        if not isinstance(integ, dict) or "tEnd" not in integ or "dt" not in integ:
            raise ConfigError("flow needs integration.tEnd and integration.dt")
    if "lax" not in scn:
        raise ConfigError("scenario has no lax source")
    g = scn.get("generator", {"kind": "ansatz"})
    kind = g.get("kind", "ansatz") if isinstance(g, dict) else None
    if kind not in ("ansatz", "polynomial", "curvature"):
        raise ConfigError(f"unknown generator kind {kind!r}")
    if kind == "polynomial" and not isinstance(g.get("coeffs"), list):
        raise ConfigError("the polynomial generator needs a coeffs list")
    if "flow" in analyses and kind != "polynomial" and not scn.get("ansatz"):
        raise ConfigError(f"the {kind} generator needs an ansatz")
    return analyses


# ---------------------------------------------------------------------------
# analyses
# ---------------------------------------------------------------------------

def _special_w(rng: np.random.Generator, n: int) -> list[np.ndarray]:
    out = []
    while len(out) < n:
        W = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = np.linalg.det(W)
        if abs(d) < 0.1:
            continue
        out.append(W / np.sqrt(d))
    return out


def run_validate(L: KricheverLax, tol: dict) -> tuple[dict, dict]:
    rep = validate_lax(L.matrix, L.tyurin, L.K, tol=tol["validate"])
    return {"ok": rep.ok, "violations": [v.to_json() for v in rep.violations]}, {"validate": rep.ok}


def run_spectral(L: KricheverLax) -> tuple[dict, dict]:
    from .spectral import spectral_curve, spectral_genus

    S = spectral_curve(L)
    g = spectral_genus(S)
    out = {"l": S.l, "genus": S.genus, "branchDegree": S.branch.degree, "riemannHurwitzGenus": g}
    if L.curve.is_rational:
        out["h"] = [[[c.real, c.imag] for c in e.a] for e in S.h]
    return out, {"spectral": g == S.genus}


def run_flow(L, a, mfun, integ, tol) -> tuple[Trajectory, dict, dict, str]:
    dt = float(integ["dt"])
    t_end = float(integ["tEnd"])
    stride = int(integ.get("stride", 1))
    scheme = integ.get("scheme")
    if L.curve.is_rational:
        tr = integrate_flow(L, a, t_end, dt, scheme=scheme, m_builder=mfun, stride=stride)
    else:
        tr = integrate_flow(L, a, t_end, dt, scheme=scheme, stride=stride)
    D = sample_drifts(tr)
    drift = {f"h{d + 1}": float(np.max(D[:, d])) for d in range(D.shape[1])}
    mx = max(drift.values())
    out = {"regime": tr.regime, "drift": drift, "maxDrift": mx}
    if tr.regime == "FixedPole":
        defects = [0.0] * len(tr.samples)
        out["stationaryDeviation"] = max(float(np.max(np.abs(s.poly - tr.samples[0].poly))) for s in tr.samples)
        verd = {"isospectral": mx < tol["drift"]}
    else:
        defects = tr.diagnostics["accumulated_defect"]
        # accumulated_defect is recorded every step; samples every stride steps
        defects = [defects[min(int(round(s.t / dt)), len(defects) - 1)] for s in tr.samples]
        out["totalDefect"] = float(tr.diagnostics.get("total_defect", 0.0))
        verd = {"isospectral": mx < tol["movingDrift"]}
    header = ["t"] + [f"drift_h{d + 1}" for d in range(D.shape[1])] + ["constraint_defect", "dt"]
    rows = [[s.t] + list(D[k]) + [defects[k], dt] for k, s in enumerate(tr.samples)]
    return tr, out, verd, _csv(header, rows)


def run_linearity(tr: Trajectory, mfun, kind: str, tol: dict, rng) -> tuple[dict, dict, str]:
    from .residue import constancy_test, equivalence_checks, linearity_test, model_of

    L0 = tr.samples[0].L
    model = model_of(L0)
    M0 = mfun(tr.samples[0].poly, 0.0)
    cons = constancy_test(L0, M0, model, tol=tol["constancy"])
    lin = linearity_test(tr, mfun, model, tol=tol["linearity"])
    gauge = equivalence_checks(L0, M0, "gauge", _special_w(rng, 20), tol=tol["gauge"])
    qs = equivalence_checks(L0, M0, "qshift", [[0, 1], [0, 0, 1]], tol=tol["qshift"])
    out = {
        "constancy": cons.ok,
        "constancyResidual": cons.residual,
        "linearity": lin.ok,
        "linearityResidual": lin.max_residual,
        "gaugeDefect": gauge.max_defect,
        "qshiftResidual": qs.max_defect,
        "equivalence": gauge.ok and qs.ok,
    }
    verd = {"linearity": lin.ok, "equivalence": gauge.ok and qs.ok}
    if kind == "polynomial":
        verd["constancy"] = cons.ok
    table = _csv(["t", "linearity_residual"], [[t, r] for t, r in zip(lin.times, lin.residuals)])
    return out, verd, table


def run_abel(tr: Trajectory, mfun, tol: dict) -> tuple[dict, dict, str]:
    from .jacobian import jacobian_linearity, periods
    from .residue import model_of

    model = model_of(tr.samples[0].L)
    per = periods(model)
    rep = jacobian_linearity(tr, model, per, with_residue=True, mfun=mfun)
    sd_ok = rep.max_second_difference < tol["secondDifference"]
    ag_ok = rep.agreement is not None and rep.agreement < tol["velocityAgreement"]
    out = {
        "genus": model.genus,
        "tau": per.tau,
        "riemannDefects": list(per.riemann_defects()),
        "maxSecondDifference": rep.max_second_difference,
        "velocityAgreement": rep.agreement,
        "velocity": rep.velocity[0] if len(rep.velocity) else [],
    }
    g = model.genus
    header = ["t"] + [f"A{j + 1}_{c}" for j in range(g) for c in ("re", "im")] + ["second_difference"]
    h = rep.times[1] - rep.times[0]
    rows = []
    for k, (t, A) in enumerate(zip(rep.times, rep.images)):
        sd = 0.0
        if 0 < k < len(rep.times) - 1:
            sd = float(np.linalg.norm(rep.images[k + 1] - 2 * A + rep.images[k - 1])) / h ** 2
        rows.append([t] + [v for z in A for v in (z.real, z.imag)] + [sd])
    return out, {"abelLinear": sd_ok, "velocityAgreement": ag_ok}, _csv(header, rows)


def run_hamiltonian(tr: Trajectory, scn: dict, tol: dict, rng) -> tuple[dict, dict]:
    from .hamiltonian import HamiltonianSpec, commuting_flows_check, conservation_check, hamiltonian_value

    L0 = tr.samples[0].L
    if L0.curve.is_rational:
        places = [Place("infinity")]
        deg = tr.samples[0].poly.shape[0] - 1
    else:
        places = [p for p, _ in L0.K.support]
        deg = max(m for _, m in L0.K.support)
    specs = [HamiltonianSpec(p, n, m) for p in places for n in range(2, L0.l + 1)
             for m in range(-n * deg - 1, 1)]
    cons = conservation_check(tr, specs, tol=tol["hamiltonianDrift"] if tr.regime == "FixedPole" else tol["movingDrift"])
    gauge = 0.0
    for W in _special_w(rng, 5) if L0.l == 2 else []:
        Lg = gauge_transform(L0, W)
        for s in specs:
            h0 = hamiltonian_value(L0, s)
            gauge = max(gauge, abs(hamiltonian_value(Lg, s) - h0) / max(1.0, abs(h0)))
    out = {"specs": [s.to_json() for s in specs], "maxDrift": cons.max_drift, "gaugeDefect": gauge}
    verd = {"hamiltonianConserved": cons.ok, "hamiltonianGauge": gauge < tol["hamiltonianGauge"]}
    pair = scn.get("commuting")
    if pair and L0.curve.is_rational:
        a1 = AnsatzSpec.at_infinity(*pair[0])
        a2 = AnsatzSpec.at_infinity(*pair[1])
        fine = commuting_flows_check(L0, a1, a2, 0.2, 0.2, dts=(1e-3,), tol=tol["commuting"])
        coarse = commuting_flows_check(L0, a1, a2, 0.2, 0.2, dts=(0.04, 0.02, 0.01))
        out["commuting"] = {"discrepancy": fine.discrepancies[0], "order": coarse.order,
                            "discrepancies": list(coarse.discrepancies), "atFloor": coarse.at_floor}
        decays = coarse.at_floor or (coarse.order is not None and coarse.order >= 3.5)
        verd["commuting"] = fine.ok and decays
    return out, verd


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def run_scenario(scn: dict, base: Path, out_dir: Path | None, tol_override: float | None = None,
                 seed: int | None = None) -> tuple[int, dict]:
    analyses = check_scenario(scn)
    tol = dict(DEFAULT_TOL)
    tol.update(scn.get("tolerances", {}))
    if tol_override is not None:
        for k in ("drift", "linearity", "secondDifference", "velocityAgreement", "hamiltonianDrift"):
            tol[k] = tol_override
    seed = int(scn.get("seed", 0) if seed is None else seed)
    rng = np.random.default_rng(seed)
    a = _ansatz(scn.get("ansatz"))
    L = load_lax(scn["lax"], base, seed)
    kind, mfun = (None, None)
    if L.curve.is_rational and "flow" in analyses:
        kind, mfun = _generator(scn, a)
    elif any(x in analyses for x in ("linearity", "abel")):
        raise ConfigError("linearity and abel analyses need a rational base")
    results: dict = {}
    verdicts: dict = {}
    tables: dict = {}
    tr = None
    if "validate" in analyses:
        results["validate"], v = run_validate(L, tol)
        verdicts.update(v)
    if "spectral" in analyses:
        results["spectral"], v = run_spectral(L)
        verdicts.update(v)
    if "flow" in analyses:
        tr, results["flow"], v, tables["flow.csv"] = run_flow(
            L, a, mfun if kind != "ansatz" else None, scn["integration"], tol)
        verdicts.update(v)
        if kind == "polynomial":
            verdicts["stationary"] = results["flow"]["stationaryDeviation"] < tol["stationary"]
    if "linearity" in analyses:
        results["linearity"], v, tables["linearity.csv"] = run_linearity(tr, mfun, kind, tol, rng)
        verdicts.update(v)
    if "abel" in analyses:
        results["abel"], v, tables["abel.csv"] = run_abel(tr, mfun, tol)
        verdicts.update(v)
    if "hamiltonian" in analyses:
        results["hamiltonian"], v = run_hamiltonian(tr, scn, tol, rng)
        verdicts.update(v)
    report: dict = {"name": scn.get("name", "scenario"), "seed": seed, "analyses": analyses}
    if "linearity" in results:
        report["constancy"] = results["linearity"]["constancy"]
    if "linearity" in verdicts or "abelLinear" in verdicts:
        report["linearity"] = bool(verdicts.get("linearity", True) and verdicts.get("abelLinear", True))
    if "abel" in results:
        report["velocityAgreement"] = results["abel"]["velocityAgreement"]
    report["pass"] = all(verdicts.values())
    report["verdicts"] = verdicts
    report["results"] = results
    if out_dir is not None:
        _write_bundle(out_dir, report, tr, tables)
    return (0 if report["pass"] else 1), report


def _write_bundle(out_dir: Path, report: dict, tr, tables: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps(report) + "\n")
    if tr is not None:
        (out_dir / "trajectory.json").write_text(dumps(tr.to_json()) + "\n")
    if tables:
        (out_dir / "tables").mkdir(exist_ok=True)
        for name, text in tables.items():
            (out_dir / "tables" / name).write_text(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _read_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{path} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _lax_arg(arg: str, seed: int) -> KricheverLax:
    if arg == "mumford-g1":
        return mumford_g1()
    p = Path(arg)
    return load_lax(p.name, p.parent, seed)


def _load_trajectory(path: str) -> Trajectory:
    d = _read_json(path)
    try:
        return Trajectory.from_json(d)
    except (KeyError, FlowError) as exc:
        raise ConfigError(f"cannot load trajectory: {exc}") from exc


def _traj_generator(tr: Trajectory):
    if tr.ansatz is None:
        raise ConfigError("the trajectory carries no ansatz")
    a = tr.ansatz
    return lambda P, t: ansatz_m_poly(P, a)


def _tol(args, key: str, extra: tuple = ()) -> dict:
    tol = dict(DEFAULT_TOL)
    if args.tol is not None:
        for k in (key,) + extra:
            tol[k] = args.tol
    return tol


def _emit(args, report: dict, table: str | None, verdicts: dict, bundle: dict | None = None) -> int:
    report = dict(report)
    report["verdicts"] = verdicts
    report["pass"] = all(verdicts.values())
    if args.format == "csv" and table is not None:
        sys.stdout.write(table)
    else:
        sys.stdout.write(dumps(report) + "\n")
    if args.out_dir:
        _write_bundle(Path(args.out_dir), report, (bundle or {}).get("trajectory"), (bundle or {}).get("tables", {}))
    return 0 if report["pass"] else 1


def cmd_validate(args) -> int:
    L = _lax_arg(args.lax, args.seed)
    out, v = run_validate(L, _tol(args, "validate"))
    return _emit(args, out, None, v)


def cmd_spectral(args) -> int:
    out, v = run_spectral(_lax_arg(args.lax, args.seed))
    return _emit(args, out, None, v)


def cmd_flow(args) -> int:
    cfg = _read_json(args.config)
    base = Path(args.config).parent
    if "lax" not in cfg or "tEnd" not in cfg or "dt" not in cfg:
        raise ConfigError("flow config needs lax, tEnd and dt")
    L = load_lax(cfg["lax"], base, args.seed)
    a = _ansatz(cfg.get("ansatz"))
    if a is None:
        raise ConfigError("flow config needs an ansatz")
    integ = {"tEnd": cfg["tEnd"], "dt": cfg["dt"], "stride": cfg.get("stride", 1), "scheme": cfg.get("scheme")}
    tr, out, v, table = run_flow(L, a, None, integ, _tol(args, "drift", ("movingDrift",)))
    return _emit(args, out, table, v, {"trajectory": tr, "tables": {"flow.csv": table}})


def cmd_linearity(args) -> int:
    tr = _load_trajectory(args.trajectory)
    out, v, table = run_linearity(tr, _traj_generator(tr), "ansatz", _tol(args, "linearity"),
                                  np.random.default_rng(args.seed))
    return _emit(args, out, table, v, {"tables": {"linearity.csv": table}})


def cmd_abel(args) -> int:
    tr = _load_trajectory(args.trajectory)
    out, v, table = run_abel(tr, _traj_generator(tr), _tol(args, "secondDifference", ("velocityAgreement",)))
    return _emit(args, out, table, v, {"tables": {"abel.csv": table}})


def cmd_hamiltonian(args) -> int:
    tr = _load_trajectory(args.trajectory)
    out, v = run_hamiltonian(tr, {}, _tol(args, "hamiltonianDrift"), np.random.default_rng(args.seed))
    return _emit(args, out, None, v)


def _run_one(path: str, out: Path | None, tol: float | None, seed: int | None) -> tuple[int, dict]:
    try:
        scn = _read_json(path)
        return run_scenario(scn, Path(path).parent, out, tol, seed)
    except ConfigError as exc:
        return 2, {"error": {"type": "ConfigError", "message": str(exc)}}
    except (LaxError, FlowError, ValueError, RuntimeError) as exc:
        return 1, {"error": {"type": type(exc).__name__, "message": str(exc)}}


def cmd_run(args) -> int:
    if len(args.scenario) > 1:
        # a batch: scenarios run concurrently, each into its own subdirectory
        root = Path(args.out_dir) if args.out_dir else None
        outs = [None if root is None else root / Path(p).stem for p in args.scenario]
        with ThreadPoolExecutor() as pool:
            res = list(pool.map(lambda a: _run_one(a[0], a[1], args.tol, args.seed), zip(args.scenario, outs)))
        rows = [{"scenario": p, "exit": c, "pass": r.get("pass", False)} for p, (c, r) in zip(args.scenario, res)]
        sys.stdout.write(dumps(rows) + "\n")
        codes = [c for c, _ in res]
        return 2 if 2 in codes else max(codes)
    scn = _read_json(args.scenario[0])
    out = Path(args.out_dir) if args.out_dir else None
    code, report = run_scenario(scn, Path(args.scenario[0]).parent, out, args.tol, args.seed)
    if args.format == "csv":
        sys.stdout.write(_csv(["verdict", "pass"], [[k, str(v).lower()] for k, v in report["verdicts"].items()]))
    else:
        sys.stdout.write(dumps(report) + "\n")
    return code


def cmd_bench(args) -> int:
    out = Path(args.out_dir) if args.out_dir else None
    t0 = time.perf_counter()
    code, report = run_scenario(MUMFORD_G1, Path("."), out, args.tol, args.seed)
    summary = {
        "name": report["name"],
        "pass": report["pass"],
        "linearity": report.get("linearity"),
        "velocityAgreement": report.get("velocityAgreement"),
        "verdicts": report["verdicts"],
        "seconds": round(time.perf_counter() - t0, 2),
    }
    if args.format == "csv":
        sys.stdout.write(_csv(["verdict", "pass"], [[k, str(v).lower()] for k, v in report["verdicts"].items()]))
    else:
        sys.stdout.write(dumps(summary) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laxflow", description="Lax matrices on curves and their flows")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="override the main tolerance")
    common.add_argument("--out-dir", default=None, help="directory for report, trajectory and tables")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common], help="validate a Lax matrix JSON")
    s.add_argument("lax")
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("spectral", parents=[common], help="spectral curve data")
    s.add_argument("lax")
    s.set_defaults(func=cmd_spectral)
    s = sub.add_parser("flow", parents=[common], help="integrate a flow from a config JSON")
    s.add_argument("config")
    s.set_defaults(func=cmd_flow)
    for name, fn, hlp in (("linearity", cmd_linearity, "residue verdicts along a trajectory"),
                          ("abel", cmd_abel, "Abel images along a trajectory"),
                          ("hamiltonian", cmd_hamiltonian, "Hamiltonian conservation along a trajectory")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("trajectory")
        s.set_defaults(func=fn)
    s = sub.add_parser("run", parents=[common], help="run one or more scenario JSON files")
    s.add_argument("scenario", nargs="+")
    s.set_defaults(func=cmd_run)
    s = sub.add_parser("bench", parents=[common], help="run the builtin mumford-g1 benchmark")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None and args.command not in ("run",):
        args.seed = 0
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stdout.write(dumps({"error": {"type": "ConfigError", "message": str(exc)}}) + "\n")
        return 2
    except (LaxError, FlowError, ValueError, RuntimeError) as exc:
        sys.stdout.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
