"""Experiment runner.

Every experiment has a table of typed default parameters. Values are
resolved in the order defaults < config file < command-line flags; unknown
keys are rejected. Each run writes CSV tables (header cells carry units in
brackets), a ``manifest.json`` with the resolved parameters and code
version, and plain matplotlib scripts that redraw the figures from the CSVs.

Exit status: 0 on success, 1 when ``--check`` is set and a check fails,
2 on usage or configuration errors.
"""

import argparse
import csv
import json
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__


class ConfigError(ValueError):
    pass


@dataclass
class Table:
    columns: list  # (name, unit) pairs
    rows: list

    def write(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{name} [{unit}]" for name, unit in self.columns])
            for row in self.rows:
                w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class RunResult:
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())


def _parallel_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _plot_script(csv_name, x, ys, xlabel, ylabel, logy=False, title=""):
    lines = [
        "import matplotlib.pyplot as plt",
        "import numpy as np",
        "",
        f"d = np.genfromtxt({csv_name!r}, delimiter=',', names=True)",
        "fig, ax = plt.subplots()",
    ]
    for y in ys:
        lines.append(f"ax.plot(d[{x!r}], d[{y!r}], 'o-', label={y!r})")
    if logy:
        lines.append("ax.set_yscale('log')")
    lines += [
        f"ax.set_xlabel({xlabel!r})",
        f"ax.set_ylabel({ylabel!r})",
        f"ax.set_title({title!r})",
        "ax.legend()",
        f"fig.savefig({csv_name.replace('.csv', '.png')!r}, dpi=150)",
        "",
    ]
    return "\n".join(lines)


# --- experiments --------------------------------------------------------------------------
# Column names in CSV headers become "name_unit" once numpy sanitizes them; the
# plot scripts below use those sanitized names.


def run_kernel_validate(p, ctx):
    from .kernels import LinearizedSymbol, bound_envelopes, envelope_calibration, kernel_E0, kernel_E1, kernel_E2

    cal = envelope_calibration(p["ks"], p["Ebar"], p["nt"], p["nz"], p["T"], p["Z"], p["radius_factor"])
    rows = [[r["k"], r["t"], r["z"], r["rho"], r["E0_ratio"], r["E1_ratio"], r["E2_ratio"]] for r in cal.rows]
    # randomized spot checks off the grid
    rng = np.random.default_rng(ctx["seed"])
    spot = 0.0
    for _ in range(p["random_points"]):
        k = float(rng.choice(p["ks"]))
        t, z = rng.uniform(0.0, p["T"]), rng.uniform(0.0, p["Z"])
        sym = LinearizedSymbol(k, p["Ebar"])
        env = bound_envelopes(t, z, sym)
        for name, fn in (("E0", kernel_E0), ("E1", kernel_E1), ("E2", kernel_E2)):
            ratio = float(np.exp(fn(t, z, sym).log_abs - np.log(env[f"{name}_bound"])))
            spot = max(spot, ratio)
        rows.append([k, t, z, float(env["rho"]), np.nan, np.nan, np.nan])
    cols = [("k", "1"), ("t", "1"), ("z", "1"), ("rho", "1"),
            ("E0_ratio", "1"), ("E1_ratio", "1"), ("E2_ratio", "1")]
    res = RunResult()
    res.tables["kernel_envelopes.csv"] = Table(cols, rows)
    res.summary = {"C": cal.C, "C_max": cal.C_max, "radius_change": cal.radius_change,
                   "samples": cal.samples, "random_spot_max_ratio": spot}
    res.checks = {
        "envelope_constant": cal.C_max <= p["C_limit"] and spot <= p["C_limit"],
        "radius_invariance": cal.radius_change <= p["radius_tol"],
    }
    res.plots["plot_kernel_envelopes.py"] = _plot_script(
        "kernel_envelopes.csv", "rho_1", ["E0_ratio_1", "E1_ratio_1", "E2_ratio_1"],
        "rho", "|E_j| / envelope", logy=True)
    return res


def run_growth_rate(p, ctx):
    from .kernels import LinearizedSymbol
    from .linear_goursat import asymptotic_density, fit_growth, growth_rate_fit

    sym = LinearizedSymbol(p["k"], p["Ebar"])
    fit = growth_rate_fit(sym, p["t"], (p["rho_min"], p["rho_max"]), p["samples"])
    # slope with the power pinned to the textbook value, for comparison
    pinned = np.polyfit(fit.rho, fit.log_abs_n - p["reference_power"] * np.log(fit.rho), 1)[0]
    z = fit.rho**2 / (2.0 * sym.k * sym.Ebar**2 * p["t"])
    model = np.log(asymptotic_density(sym, p["t"], z))
    rows = [[r, zz, y, m] for r, zz, y, m in zip(fit.rho, z, fit.log_abs_n, model)]
    res = RunResult()
    res.tables["growth_rate.csv"] = Table(
        [("rho", "1"), ("z", "1"), ("ln_abs_n", "1"), ("ln_model", "1")], rows)
    res.summary = {"slope": fit.slope, "power": fit.power, "const": fit.const,
                   "fit_residual": fit.residual, "slope_with_pinned_power": float(pinned),
                   "reference_power": p["reference_power"]}
    res.checks = {
        "slope": abs(fit.slope - 1.0) <= p["slope_tol"],
    }
    if p["check_power"]:
        res.checks["power"] = abs(fit.power - p["reference_power"]) <= p["power_tol"]
    res.plots["plot_growth_rate.py"] = _plot_script(
        "growth_rate.csv", "rho_1", ["ln_abs_n_1", "ln_model_1"], "rho", "ln |n|")
    return res


def _oracle_case(args):
    from .kernels import LinearizedSymbol
    from .linear_goursat import oracle_comparison

    k, E, T, Z, sizes = args
    return oracle_comparison(LinearizedSymbol(k, E), T, Z, sizes)


def run_linear_oracle(p, ctx):
    cases = [(float(k), float(E), p["T"], p["Z"], tuple(p["sizes"])) for k in p["ks"] for E in p["Ebars"]]
    start = time.perf_counter()
    out = _parallel_map(_oracle_case, cases, ctx["threads"])
    elapsed = time.perf_counter() - start
    rows = []
    for c in out:
        for i, (N, e) in enumerate(zip(c.sizes, c.errors)):
            rows.append([c.k, c.Ebar, N, e, c.orders[i - 1] if i else np.nan])
    res = RunResult()
    res.tables["linear_oracle.csv"] = Table(
        [("k", "1"), ("Ebar", "1"), ("N", "1"), ("rel_difference", "1"), ("order", "1")], rows)
    res.summary = {"max_final_difference": max(c.errors[-1] for c in out),
                   "min_final_order": min(c.orders[-1] for c in out), "seconds": elapsed}
    res.checks = {
        "agreement": all(c.errors[-1] <= p["rel_tol"] for c in out),
        "order": all(c.orders[-1] >= p["min_order"] for c in out),
        "runtime": elapsed <= p["max_seconds"],
    }
    res.plots["plot_linear_oracle.py"] = _plot_script(
        "linear_oracle.csv", "N_1", ["rel_difference_1"], "N", "relative sup difference", logy=True)
    return res


def _instability_case(args):
    from .nonlinear_solver import InstabilityParams, instability_experiment

    k, kw, Nx = args
    return instability_experiment(InstabilityParams(k=k, **kw), Nx=Nx)


def run_instability(p, ctx):
    kw = {key: p[key] for key in ("sigma", "eps", "eps_prime", "Ebar", "T")}
    start = time.perf_counter()
    reps = _parallel_map(_instability_case, [(float(k), kw, p["Nx"]) for k in p["ks"]], ctx["threads"])
    elapsed = time.perf_counter() - start
    rows = [r.as_row() for r in reps]
    cols = [("k", "1"), ("Z", "1"), ("boundary_H1", "1"), ("sup_n_gamma", "1"), ("sup_n1_gamma", "1"),
            ("linear_n1_gamma", "1"), ("ratio_min", "1"), ("ratio_max", "1"), ("harmonic_C", "1"),
            ("remainder_C", "1"), ("converged", "bool"), ("iterations", "1")]
    res = RunResult()
    res.tables["instability.csv"] = Table(cols, [[r[c] for c, _ in cols] for r in rows])
    H1 = [r["boundary_H1"] for r in rows]
    Zs = [r["Z"] for r in rows]
    sup = [r["sup_n_gamma"] for r in rows]
    res.summary = {"seconds": elapsed, "boundary_H1": H1, "Z": Zs, "sup_n_gamma": sup,
                   "ratio_range": [(r["ratio_min"], r["ratio_max"]) for r in rows],
                   "smallness": [r.smallness for r in reps]}
    res.checks = {
        "boundary_norm_decreases": bool(np.all(np.diff(H1) < 0)),
        "Z_decreases": bool(np.all(np.diff(Zs) < 0)),
        "sup_n_increases": bool(np.all(np.diff(sup) > 0)),
        "linear_agreement": all(0.5 <= r["ratio_min"] and r["ratio_max"] <= 2.0 for r in rows),
        "converged": all(r["converged"] for r in rows),
        "runtime": elapsed <= p["max_seconds"],
    }
    res.plots["plot_instability.py"] = _plot_script(
        "instability.csv", "k_1", ["boundary_H1_1", "sup_n_gamma_1", "Z_1"], "k", "value", logy=True)
    return res


def run_filter_stability(p, ctx):
    from .nonlinear_solver import GoursatGrid, filtered_stability_check, resonant_boundary

    k, E = p["k"], p["Ebar"]
    rows = []
    results = {}
    for label, rho in (("stable", p["rho_stable"]), ("unstable", p["rho_unstable"])):
        Z = rho**2 / (2.0 * k * E**2 * p["T"])
        Nz = max(16, int(np.ceil(Z * k**2 / p["k2dz"])))
        grid = GoursatGrid(p["T"], Z, p["Nt"], Nz, p["Nx"], L=1.0 / k)
        E0 = resonant_boundary(grid, E, p["alpha"], k)
        r = filtered_stability_check(E0, grid, k_max=k)
        results[label] = r
        rows.append([label, rho, Z, r.rho_max, r.growth, r.iterations, r.converged, r.contraction])
    res = RunResult()
    res.tables["filter_stability.csv"] = Table(
        [("case", "label"), ("rho_target", "1"), ("Z", "1"), ("rho_max", "1"), ("growth", "1"),
         ("iterations", "1"), ("converged", "bool"), ("contraction", "1")], rows)
    s, u = results["stable"], results["unstable"]
    res.summary = {"stable_growth": s.growth, "stable_iterations": s.iterations,
                   "unstable_growth": u.growth, "unstable_rho_max": u.rho_max}
    res.checks = {
        "stable_growth": s.growth <= 2.0 * np.exp(0.5),
        "stable_iterations": s.converged and s.iterations <= 20,
        "unstable_growth": u.growth >= np.exp(3.0),
    }
    return res


def _frontier_case(args):
    from .nonlinear_solver import picard_frontier

    k, E, T = args
    return picard_frontier(k, E, T)


def run_analytic_threshold(p, ctx):
    from .analytic import (THRESHOLD_CALIBRATION, calibrate_threshold, compute_c0,
                           existence_threshold, threshold_comparison, verify_majorant_calculus)

    c0a, c0b = compute_c0(p["n_trunc"]), compute_c0(2 * p["n_trunc"])
    calc = verify_majorant_calculus()
    th = existence_threshold(3.0, 2.0, 1.5)
    homog = (
        np.isclose(existence_threshold(3.0, 2.0, 3.0).lambda_min, 4 * th.lambda_min, rtol=1e-15)
        and np.isclose(existence_threshold(6.0, 2.0, 1.5).lambda_min, 2 * th.lambda_min, rtol=1e-15)
        and np.isclose(existence_threshold(3.0, 4.0, 1.5).lambda_min, 2 * th.lambda_min, rtol=1e-15)
    )
    C_cal = THRESHOLD_CALIBRATION if p["C_cal"] is None else p["C_cal"]
    res = RunResult()
    res.summary = {"c0": c0a, "c0_doubled": c0b, "c0_change": abs(c0b - c0a),
                   "product_margin": calc.product_margin,
                   "submultiplicative_margin": calc.submultiplicative_margin,
                   "integration_margin": calc.integration_margin, "C_cal": C_cal}
    res.checks = {
        "c0_stable": abs(c0b - c0a) < 1e-6,
        "calculus_margins": calc.ok,
        "homogeneity": bool(homog),
    }
    if p["frontier"]:
        pts = [(float(k), float(E), float(T)) for k, E, T in p["points"]]
        frontier = _parallel_map(_frontier_case, pts, ctx["threads"])
        comps = threshold_comparison(frontier, C_cal=C_cal)
        rows = [[c.k, c.Ebar, c.T, f.rho, c.Z_frontier, c.Z_max, c.ratio, c.E0_norm]
                for f, c in zip(frontier, comps)]
        res.tables["analytic_threshold.csv"] = Table(
            [("k", "1"), ("Ebar", "1"), ("T", "1"), ("rho_frontier", "1"), ("Z_frontier", "1"),
             ("Z_max", "1"), ("ratio", "1"), ("E0_norm", "1")], rows)
        res.summary["refit_C_cal"] = calibrate_threshold(comps)
        res.summary["ratios"] = [c.ratio for c in comps]
        res.checks["frontier_within_factor"] = all(
            1.0 / p["factor"] <= c.ratio <= p["factor"] for c in comps)
        res.plots["plot_analytic_threshold.py"] = _plot_script(
            "analytic_threshold.csv", "k_1", ["Z_frontier_1", "Z_max_1"], "k", "Z", logy=True)
    return res


def run_physics(p, ctx):
    from .physics_units import (amplification_rho, derive_groups, gamma_range, intensity_threshold,
                                load_reference, scale_to_dimensionless, units_audit)

    params, sweep = load_reference(p["params_file"])
    g = derive_groups(params)
    amp = amplification_rho(params)
    dims = scale_to_dimensionless(params)
    tau_range = p["tau0_range"] or sweep.get("tau0", [params.tau0])
    Z0_range = p["Z0_range"] or sweep.get("Z0", [params.Z0])
    gmin, gmax = gamma_range(params, tau_range, Z0_range)
    thr = intensity_threshold(params, p["rho_target"])
    audit = units_audit(params)
    rho_dimless = float(np.sqrt(2 * dims["k"] * dims["Ebar"] ** 2 * dims["Z"] * dims["T"]))
    rows = [
        ["A_bar", g.A_bar, "V"], ["epsilon", g.epsilon, "1"], ["alpha", g.alpha, "1"],
        ["t_tilde", g.T_tilde, "1"], ["z_tilde", g.Z_tilde, "1"], ["k_tilde", g.k_tilde, "1"],
        ["Ebar", g.a_tilde, "1"], ["omega0", params.omega0, "1/s"], ["k0", params.k0, "1/m"],
        ["coupling_rate", 2 * amp.beta * params.k0 / params.k, "1/(m*s)"],
        ["beta", amp.beta, "1/(m*s)"], ["beta_doubled", amp.beta_doubled, "1/(m*s)"],
        ["gamma", amp.gamma, "1"], ["gamma_min", gmin, "1"], ["gamma_max", gmax, "1"],
        ["rho", amp.rho, "1"], ["rho_dimensionless", rho_dimless, "1"], ["rho_doubled", amp.rho_doubled, "1"],
        ["A_max", thr["A_max"], "V"], ["E_max", thr["E_max"], "V/m"],
        ["weak_coupling", g.weak_coupling, "1"],
    ]
    res = RunResult()
    res.tables["physics.csv"] = Table([("quantity", "name"), ("value", "see unit"), ("unit", "text")], rows)
    res.summary = {r[0]: r[1] for r in rows}
    res.summary["units_audit"] = {k: v[1] for k, v in audit.items()}
    res.checks = {
        "A_bar": abs(g.A_bar / 2.5e3 - 1) <= 0.02,
        "epsilon": abs(g.epsilon / 9.0 - 1) <= 0.10,
        "t_tilde": abs(g.T_tilde / 3.0 - 1) <= 0.05,
        "gamma_range": gmin >= 10.0 / 2 and gmin <= 10.0 * 2 and gmax >= 100.0 / 2 and gmax <= 100.0 * 2,
        "rho_consistency": abs(rho_dimless - amp.rho) <= 1e-10 * max(amp.rho, 1e-300),
        "units": all(v[1] for v in audit.values()),
    }
    return res


def _none_or_float(v):
    return None if v in (None, "none", "None") else float(v)


@dataclass
class Experiment:
    run: callable
    defaults: dict
    help: str
    types: dict = field(default_factory=dict)


EXPERIMENTS = {
    "kernel-validate": Experiment(run_kernel_validate, {
        "ks": [16.0, 64.0, 256.0], "Ebar": 1.0, "nt": 20, "nz": 20, "T": 1.0, "Z": 0.5,
        "radius_factor": 1.2, "C_limit": 100.0, "radius_tol": 1e-8, "random_points": 0,
    }, "calibrate kernel envelope constants and check contour-radius invariance"),
    "growth-rate": Experiment(run_growth_rate, {
        "k": 400.0, "Ebar": 1.0, "t": 1.0, "rho_min": 4.0, "rho_max": 12.0, "samples": 17,
        "slope_tol": 0.05, "reference_power": -2.5, "power_tol": 0.5, "check_power": False,
    }, "fit ln|n| = slope*rho + power*ln(rho) + c along t = const"),
    "linear-oracle": Experiment(run_linear_oracle, {
        "ks": [4.0, 8.0], "Ebars": [0.5, 1.0], "T": 1.0, "Z": 0.5, "sizes": [64, 128, 256],
        "rel_tol": 1e-4, "min_order": 1.8, "max_seconds": 120.0,
    }, "convolution solver against the direct grid oracle"),
    "instability": Experiment(run_instability, {
        "ks": [32.0, 64.0, 128.0], "sigma": 1.0, "eps": 0.5, "eps_prime": 0.2, "Ebar": 1.5, "T": 1.0,
        "Nx": 32, "max_seconds": 600.0,
    }, "nonlinear instability sweep over k"),
    "filter-stability": Experiment(run_filter_stability, {
        "k": 16.0, "Ebar": 1.0, "T": 1.0, "rho_stable": 0.1, "rho_unstable": 5.0, "alpha": 1e-3,
        "Nt": 128, "Nx": 8, "k2dz": 0.2,
    }, "filtered runs below and above the stability threshold"),
    "analytic-threshold": Experiment(run_analytic_threshold, {
        "n_trunc": 64, "C_cal": None, "frontier": True, "factor": 10.0,
        "points": [[8.0, 1.0, 1.0], [16.0, 1.0, 1.0], [16.0, 2.0, 1.0], [32.0, 2.0, 1.0], [16.0, 2.0, 2.0]],
    }, "majorant calculus and the Picard frontier against the existence threshold",
        types={"C_cal": _none_or_float}),
    "physics": Experiment(run_physics, {
        "params_file": None, "rho_target": 0.4, "tau0_range": None, "Z0_range": None,
    }, "physical scaling table", types={"params_file": str, "tau0_range": float, "Z0_range": float}),
}


# --- configuration ------------------------------------------------------------------------


def _coerce(name, value, default, explicit_type=None):
    if explicit_type is not None:
        if isinstance(value, list):
            return [explicit_type(v) for v in value]
        return None if value is None else explicit_type(value)
    if isinstance(default, bool):
        if isinstance(value, str):
            if value.lower() in ("1", "true", "yes"):
                return True
            if value.lower() in ("0", "false", "no"):
                return False
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return bool(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{name}: expected a list")
        if default and isinstance(default[0], list):
            return [[float(x) for x in item] for item in value]
        kind = type(default[0]) if default else float
        return [kind(v) for v in value]
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def resolve_parameters(name, config=None, overrides=None):
    """Merge defaults, config-file parameters and flag overrides; reject unknown keys."""
    exp = EXPERIMENTS[name]
    params = dict(exp.defaults)
    for source in (config or {}, overrides or {}):
        unknown = set(source) - set(params)
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
        for key, value in source.items():
            try:
                params[key] = _coerce(key, value, exp.defaults[key], exp.types.get(key))
            except (TypeError, ValueError) as err:
                raise ConfigError(f"{key}: {err}") from err
    return params


_CONFIG_KEYS = {"experiment", "parameters", "output_dir", "seed", "threads"}


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "experiment" in data and data["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {data['experiment']!r}")
    if not isinstance(data.get("parameters", {}), dict):
        raise ConfigError("parameters must be a mapping")
    return data


def _code_version():
    version = {"package": __version__}
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
        if out.returncode == 0:
            version["git"] = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return version


def execute(name, params, out_dir=None, seed=0, threads=1):
    """Run one experiment; write artifacts when ``out_dir`` is given."""
    ctx = {"seed": seed, "threads": threads}
    start = time.perf_counter()
    result = EXPERIMENTS[name].run(params, ctx)
    elapsed = time.perf_counter() - start
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fname, table in result.tables.items():
            table.write(out / fname)
        for fname, code in result.plots.items():
            (out / fname).write_text(code)
        manifest = {
            "experiment": name, "parameters": params, "seed": seed, "threads": threads,
            "code_version": _code_version(), "tables": sorted(result.tables),
            "summary": result.summary, "checks": result.checks, "passed": result.passed,
            "seconds": elapsed,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    return result


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


# --- argument parsing ---------------------------------------------------------------------


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (keys: experiment, parameters, output_dir, seed, threads)")
    common.add_argument("--check", action="store_true", help="exit 1 if any acceptance check fails")
    common.add_argument("--out", help="output directory for CSVs, plot scripts and manifest.json")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized checks (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker processes for sweeps (default 1)")
    common.add_argument("--reference", action="store_true", help="use the bundled reference data (physics)")

    parser = argparse.ArgumentParser(prog="zakharov-goursat", description="Goursat-problem experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for name, exp in EXPERIMENTS.items():
        sp = sub.add_parser(name, parents=[common], help=exp.help, description=exp.help)
        for key, default in exp.defaults.items():
            kw = {"dest": f"param_{key}", "default": None, "help": f"default: {default}"}
            if isinstance(default, list) or key in ("tau0_range", "Z0_range"):
                kw["nargs"] = "+"
            if key == "points":
                kw["type"] = lambda s: [float(v) for v in s.split(",")]
                kw["help"] += " (each point as k,Ebar,T)"
            sp.add_argument(_flag(key), **kw)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        print("error: no experiment given; choose one of: " + ", ".join(EXPERIMENTS), file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    if args.experiment is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args.config) if args.config else {}
        if cfg.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config is for {cfg['experiment']!r}, not {args.experiment!r}")
        overrides = {key[len("param_"):]: v for key, v in vars(args).items()
                     if key.startswith("param_") and v is not None}
        params = resolve_parameters(args.experiment, cfg.get("parameters", {}), overrides)
    except (ConfigError, OSError, yaml.YAMLError) as err:
        parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.reference and args.experiment == "physics":
        params["params_file"] = None
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    threads = args.threads if args.threads is not None else int(cfg.get("threads", 1))
    threads = max(1, min(threads, os.cpu_count() or 1))
    out_dir = args.out or cfg.get("output_dir")
    result = execute(args.experiment, params, out_dir, seed, threads)
    for key, value in result.summary.items():
        print(f"{key}: {value}")
    for key, ok in result.checks.items():
        print(f"check {key}: {'pass' if ok else 'FAIL'}")
    if args.check and not result.passed:
        return 1
    return 0
