"""Batch front end: TOML configs in, JSON/CSV reports out.

Commands: indices, iterate, bott-check, jump, ellipsoid, selftest.
Exit codes: 0 success, 1 config error, 2 exact-identity violation,
3 unstabilized truncation. Reports are deterministic for a fixed
config and version up to the timing field.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time

import numpy as np
import tomli

from . import __version__
from .corpus import DEFAULT_SEED, corpus, parallel_map
from .ellipsoid import EllipsoidModel, orbit_index_table, verify_multiplicity_bound
from .galerkin import TruncationScheme
from .indices import (
    index_L_crossings,
    index_L_galerkin,
    index_L_winding,
    mean_index_L0,
    scan_L_omega_indices,
)
from .iteration import (
    SystemIndexCache,
    check_periodic_identities,
    find_common_index_jump,
    iteration_ledger,
    precise_iteration_L0,
)
from .paths import CoefficientPath, ellipsoid_linearization

SCHEMA = "maslov-lab-report/1"
COMMANDS = ("indices", "iterate", "bott-check", "jump", "ellipsoid", "selftest")


class ConfigError(Exception):
    pass


class IdentityViolation(Exception):
    pass


def _matrix(data, two_n: int) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.size != two_n * two_n:
        raise ConfigError(f"matrix needs {two_n * two_n} entries, got {arr.size}")
    return arr.reshape(two_n, two_n)


def build_system(cfg: dict) -> CoefficientPath:
    kind = cfg.get("kind")
    if kind == "constant":
        n = int(cfg["n"])
        period = float(cfg.get("period", 2.0))
        return CoefficientPath.constant(_matrix(cfg["matrix"], 2 * n), period=period)
    if kind == "fourier":
        n = int(cfg["n"])
        period = float(cfg.get("period", 2.0))
        cos_terms = [(int(t["harmonic"]), _matrix(t["matrix"], 2 * n)) for t in cfg.get("cos", [])]
        sin_terms = [(int(t["harmonic"]), _matrix(t["matrix"], 2 * n)) for t in cfg.get("sin", [])]
        return CoefficientPath.fourier(n, period, cos_terms=cos_terms, sin_terms=sin_terms)
    if kind == "tabulated":
        n = int(cfg["n"])
        period = float(cfg.get("period", 2.0))
        times = np.asarray(cfg["times"], dtype=float)
        values = np.asarray([_matrix(v, 2 * n) for v in cfg["values"]])
        return CoefficientPath.tabulated(times, values, period)
    if kind == "ellipsoid":
        radii = [float(x) for x in cfg["radii"]]
        orbit = int(cfg.get("orbit", 1))
        return ellipsoid_linearization(radii, orbit)
    raise ConfigError(f"unknown system kind {kind!r}")


def build_scheme(cfg: dict) -> TruncationScheme:
    return TruncationScheme(
        m_start=cfg.get("m_start"),
        m_step=cfg.get("m_step"),
        m_max=int(cfg.get("m_max", 320)),
        stabilization_window=int(cfg.get("window", 3)),
        d_policy=cfg.get("d", "auto"),
    )


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def cmd_indices(cfg: dict, scheme: TruncationScheme) -> dict:
    B = build_system(_require(cfg, "system"))
    cache = SystemIndexCache(B, scheme)
    g1 = cache.gamma1()
    out: dict = {"system": {"n": B.n, "period": B.period, "kind": B.kind}}
    reports = {}
    for frame in ("L0", "L1"):
        rep = index_L_galerkin(B, frame, scheme, gamma=cache.gamma1(frame))
        if not rep.stabilized:
            raise ArithmeticError(f"{frame} index did not stabilize under the m cap")
        reports[frame] = rep.to_dict()
        try:
            w = index_L_winding(g1 if frame == "L0" else cache.gamma1(frame))
            reports[frame]["winding"] = w.index
        except (ValueError, RuntimeError):
            reports[frame]["winding"] = None
        try:
            crep = index_L_crossings(B, frame)
            reports[frame]["crossing"] = crep.index
        except ValueError:
            reports[frame]["crossing"] = None
    out["indices"] = reports
    prof = cache.profile()
    out["profile"] = {
        "arguments": [float(a) for a in prof.arguments],
        "S_plus": {f"{a:.12g}": int(v) for a, v in prof.S_plus.items()},
        "S_minus": {f"{a:.12g}": int(v) for a, v in prof.S_minus.items()},
        "C": prof.C,
        "i_periodic": prof.i1,
        "nu_periodic": prof.nu1,
    }
    out["mean_index"] = mean_index_L0(B, k_max=int(cfg.get("k_max", 32)), profile=prof)
    theta_points = int(cfg.get("theta_points", 60))
    scan = scan_L_omega_indices(B, grid_points=theta_points, scheme=scheme)
    out["omega_scan"] = {
        "points": len(scan),
        "unstabilized": sum(0 if r["stabilized"] else 1 for r in scan),
        "values": scan,
    }
    if any(not r["stabilized"] for r in scan):
        raise ArithmeticError("omega scan contains unstabilized points")
    return out


def cmd_iterate(cfg: dict, scheme: TruncationScheme) -> dict:
    B = build_system(_require(cfg, "system"))
    k_max = int(cfg.get("k_max", 6))
    led = iteration_ledger(B, range(1, k_max + 1), scheme)
    rows = [dict(r) for r in led.rows]
    if not led.all_exact():
        raise IdentityViolation("Bott prediction differs from direct computation")
    return {"ledger": rows, "exact": True}


def cmd_bott_check(cfg: dict, scheme: TruncationScheme) -> dict:
    B = build_system(_require(cfg, "system"))
    k_max = int(cfg.get("k_max", 6))
    cache = SystemIndexCache(B, scheme)
    led = iteration_ledger(B, range(1, k_max + 1), scheme, cache)
    identities = check_periodic_identities(B, scheme, cache)
    precise = []
    for k in range(1, k_max + 1):
        v = precise_iteration_L0(B, k, scheme, cache)
        direct = cache.L_pair("L0", fold=k)[0]
        precise.append(
            {
                "k": k,
                "formula": v.value,
                "resolved": v.resolved,
                "branches": list(v.branches),
                "direct": direct,
                "match": v.matches(direct),
            }
        )
    ok = led.all_exact() and all(r["holds"] for r in identities) and all(
        p["match"] for p in precise
    )
    result = {
        "ledger": [dict(r) for r in led.rows],
        "periodic_identities": identities,
        "precise_formula": precise,
        "exact": ok,
    }
    if not ok:
        raise IdentityViolation("an exact iteration identity failed")
    return result


def cmd_jump(cfg: dict, scheme: TruncationScheme) -> dict:
    sys_cfgs = cfg.get("systems") or ([cfg["system"]] if "system" in cfg else None)
    if not sys_cfgs:
        raise ConfigError("jump needs [[systems]] tables or a [system] table")
    systems = [build_system(sc) for sc in sys_cfgs]
    R_max = int(cfg.get("R_max", 20))
    verify = cfg.get("verify", "first")
    certs = find_common_index_jump(systems, R_max, scheme, verify=verify)
    return {
        "R_max": R_max,
        "count": len(certs),
        "certificates": [c.to_dict() for c in certs],
    }


def cmd_ellipsoid(cfg: dict, scheme: TruncationScheme) -> dict:
    ecfg = _require(cfg, "system")
    if ecfg.get("kind") != "ellipsoid":
        raise ConfigError("ellipsoid command needs system.kind = 'ellipsoid'")
    model = EllipsoidModel.build([float(x) for x in ecfg["radii"]])
    m_max = int(cfg.get("m_max_iterates", 10))
    table = orbit_index_table(model, m_max=m_max, scheme=scheme)
    bound = verify_multiplicity_bound(model, scheme, m_max=int(cfg.get("m_nondeg", 20)))
    mismatch = [
        r
        for r in table
        if (r["i_L0"], r["nu_L0"]) != (r["cf_i_L0"], r["cf_nu_L0"])
        or (r["i_per"], r["nu_per"]) != (r["cf_i_per"], r["cf_nu_per"])
    ]
    result = {"table": table, "multiplicity": bound, "closed_form_exact": not mismatch}
    if mismatch:
        raise IdentityViolation(f"{len(mismatch)} table rows differ from closed forms")
    return result


def cmd_selftest(cfg: dict, scheme: TruncationScheme) -> dict:
    count = int(cfg.get("count", 6))
    seed = int(cfg.get("seed", DEFAULT_SEED))
    k_max = int(cfg.get("k_max", 4))
    systems = corpus(count, seed=seed)

    def run_one(item):
        i, B = item
        cache = SystemIndexCache(B, scheme)
        record = {"system": i, "n": B.n, "violations": []}
        gal = cache.L_pair("L0")
        cross = index_L_crossings(B, "L0").pair()
        if gal != cross:
            record["violations"].append(f"galerkin {gal} != crossing {cross}")
        if gal[1] == 0:
            wind = index_L_winding(cache.gamma1()).index
            if wind != gal[0]:
                record["violations"].append(f"winding {wind} != galerkin {gal[0]}")
        led = iteration_ledger(B, range(1, k_max + 1), scheme, cache)
        if not led.all_exact():
            record["violations"].append("bott identity failed")
        for row in check_periodic_identities(B, scheme, cache):
            if not row["holds"]:
                record["violations"].append(f"periodic identity failed: {row['name']}")
        for k in range(1, k_max + 1):
            v = precise_iteration_L0(B, k, scheme, cache)
            if v.resolved and v.value != cache.L_pair("L0", fold=k)[0]:
                record["violations"].append(f"precise formula failed at k={k}")
        return record

    records = parallel_map(run_one, list(enumerate(systems)))
    bad = [r for r in records if r["violations"]]
    result = {"seed": seed, "count": count, "records": records, "violations": len(bad)}
    if bad:
        raise IdentityViolation(f"{len(bad)} corpus systems violated exact identities")
    return result


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run(config: dict) -> tuple[dict, int]:
    """Dispatch one config; returns (report, exit_code)."""
    started = time.time()
    command = config.get("command")
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True, default=str).encode()
        ).hexdigest(),
        "config": config,
    }
    code = 0
    try:
        if command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
        scheme = build_scheme(config.get("scheme", {}))
        impl = {
            "indices": cmd_indices,
            "iterate": cmd_iterate,
            "bott-check": cmd_bott_check,
            "jump": cmd_jump,
            "ellipsoid": cmd_ellipsoid,
            "selftest": cmd_selftest,
        }[command]
        report["results"] = impl(config, scheme)
        report["status"] = "ok"
    except (ConfigError, KeyError, ValueError) as exc:
        report["status"] = "config-error"
        report["error"] = str(exc)
        code = 1
    except IdentityViolation as exc:
        report["status"] = "identity-violation"
        report["error"] = str(exc)
        code = 2
    except ArithmeticError as exc:
        report["status"] = "unstabilized"
        report["error"] = str(exc)
        code = 3
    report["timing_s"] = round(time.time() - started, 3)
    return report, code


def _table_rows(report: dict):
    results = report.get("results", {})
    if "table" in results:
        return results["table"]
    if "ledger" in results:
        rows = []
        for r in results["ledger"]:
            rows.append(
                {
                    "k": r["k"],
                    "i_L0_direct": r["direct_L0"][0],
                    "nu_L0_direct": r["direct_L0"][1],
                    "i_L0_predicted": r["predicted_L0"][0],
                    "nu_L0_predicted": r["predicted_L0"][1],
                    "i_L1_direct": r["direct_L1"][0],
                    "nu_L1_direct": r["direct_L1"][1],
                    "i_L1_predicted": r["predicted_L1"][0],
                    "nu_L1_predicted": r["predicted_L1"][1],
                }
            )
        return rows
    raise ConfigError("csv output is only available for table-producing commands")


def serialize(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if fmt == "csv":
        rows = _table_rows(report)
        if not rows:
            return ""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    raise ConfigError(f"unknown format {fmt!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="maslov-lab", description=__doc__)
    parser.add_argument("--config", required=True, help="TOML config path")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", default=None, choices=("json", "csv"))
    parser.add_argument("--seed", type=int, default=None, help="selftest seed override")
    parser.add_argument("--m-max", type=int, default=None, help="truncation cap override")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "rb") as fh:
            config = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config["seed"] = args.seed
    if args.m_max is not None:
        config.setdefault("scheme", {})["m_max"] = args.m_max
    report, code = run(config)
    fmt = args.format or config.get("output", {}).get("format", "json")
    out_path = args.out or config.get("output", {}).get("path")
    try:
        text = serialize(report, fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {out_path} (status: {report['status']})", file=sys.stderr)
    else:
        sys.stdout.write(text)
    if not args.quiet and report.get("error"):
        print(f"{report['status']}: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
