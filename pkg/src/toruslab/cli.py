"""Config-driven scenario runner.

Subcommands cover the lab surface: orbit searches and spectral tables,
the perturbation pipeline, genericity functionals, entropy probes, and
the constants ledger, plus catalogue listing and byte-exact replay.
Every run writes its artifacts and a run.json record into --out; exit
codes are 0 (success), 2 (validation), 3 (numerical failure).

Threads are recorded in the scenario for reproducibility bookkeeping, but
every pipeline here runs sequentially: deterministic artifacts outrank
wall-clock on desk-scale problems, so --threads never changes results
(or, currently, speed).
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .runio import (ALL_PRESETS, Scenario, ValidationError, collect_manifest,
                    load_config, load_record, make_record, stable_seed,
                    write_json, write_jsonl)

NUMERICAL_ERRORS = None   # populated lazily: module imports are heavy


def _numerical_errors():
    global NUMERICAL_ERRORS
    if NUMERICAL_ERRORS is None:
        from .entropy import (InsufficientDataError, ResolutionError,
                              SplittingError, StepError)
        from .ledger import InfeasibleLedgerError
        from .potential import TubeChartError
        from .realize import (BudgetError, DerivativeInconsistencyError,
                              FDInfeasibleError, NoConvergenceError)
        NUMERICAL_ERRORS = (InfeasibleLedgerError, TubeChartError, BudgetError,
                            NoConvergenceError, DerivativeInconsistencyError,
                            FDInfeasibleError, ResolutionError, StepError,
                            InsufficientDataError, SplittingError,
                            RuntimeError, FloatingPointError,
                            np.linalg.LinAlgError)
    return NUMERICAL_ERRORS


# --------------------------------------------------------------------------
# Command pipelines


def _orbit_rows(model, c, scenario, classify_detail):
    from .orbits import find_closed_orbit_shooting
    from .presets import orbit_seed_states

    opts = scenario.options
    rng = np.random.default_rng(stable_seed(scenario.seed, "orbits"))
    seeds = orbit_seed_states(model, c, n_extra=int(opts.get("extra_seeds", 0)),
                              rng=rng)
    rows, seen = [], set()
    for s in seeds:
        hint = np.round(s.vec / np.linalg.norm(s.vec)).astype(int)
        if not hint.any():
            hint = None
        try:
            orb = find_closed_orbit_shooting(model, c, seed=s, winding_hint=hint)
        except Exception:
            continue
        key = (round(orb.period, 8), round(float(np.trace(orb.dP)), 6))
        if key in seen:
            continue
        seen.add(key)
        row = {"period": orb.period,
               "trace": float(np.trace(orb.dP)),
               "class": str(orb.spectral),
               "winding": [int(w) for w in orb.winding],
               "x0": [float(v) for v in orb.initial.x],
               "p0": [float(v) for v in orb.initial.vec],
               "residual": orb.residual,
               "degenerate": bool(orb.degenerate)}
        if classify_detail:
            sp = orb.spectral
            row.update({
                "eigenvalues": [[float(z.real), float(z.imag)]
                                for z in np.asarray(sp.eigenvalues, complex)],
                "q": int(sp.q),
                "rotation_numbers": [float(a) for a in np.atleast_1d(sp.angles)],
                "margin": float(sp.margin)})
        rows.append(row)
    rows.sort(key=lambda r: (r["period"], r["trace"]))
    return rows


def cmd_orbits(scenario, model, out):
    rows = _orbit_rows(model, scenario.c, scenario,
                       classify_detail=scenario.command == "classify")
    write_jsonl(out / "orbits.jsonl", rows)
    summary = {"n_orbits": len(rows),
               "classes": sorted({r["class"] for r in rows})}
    write_json(out / "summary.json", summary)
    print(f"{len(rows)} closed orbit(s); classes: {summary['classes']}")


def cmd_constants(scenario, model, out, return_ledger=False):
    from .ledger import estimate_constants
    from .presets import orbit_seed_states

    opts = scenario.options
    extra = orbit_seed_states(model, scenario.c)
    ledger = estimate_constants(
        model, scenario.c,
        neighborhood_radius=float(opts.get("neighborhood_radius", 0.0)),
        sample_budget=int(opts.get("sample_budget", 12)),
        seed=stable_seed(scenario.seed, "constants") % 2 ** 31,
        extra_states=extra)
    (out / "ledger.json").write_text(ledger.to_json() + "\n")
    print(f"ledger: k0={ledger.k0:.6g} k1={ledger.k1:.6g} k2={ledger.k2:.6g} "
          f"k6={ledger.k6:.6g} k7={ledger.k7:.6g}")
    return ledger if return_ledger else None


def _beta_csv(profile, params, n_grid=801):
    """CSV of the realized coefficient path beta(w)(t) with profile metadata."""
    n = profile.n
    ts = np.linspace(0.0, profile.t0, n_grid)
    beta = profile.beta_path(params, ts)
    lines = [f"# t0={profile.t0!r} tau={profile.tau!r} lam={profile.lam!r} "
             f"ramp={profile.ramp!r} eps={profile.eps!r} n={n}",
             "t," + ",".join(f"beta_{i+1}{j+1}" for i in range(n)
                             for j in range(n))]
    for t, B in zip(ts, beta):
        lines.append(f"{t!r}," + ",".join(repr(float(x)) for x in B.ravel()))
    return "\n".join(lines) + "\n"


def cmd_franks(scenario, model, out):
    from scipy.linalg import expm

    from .frames import extract_curvature
    from .ledger import build_profile
    from .orbits import find_closed_orbit_shooting
    from .presets import orbit_seed_states
    from .realize import (WindowKernel, push_orbit_hyperbolic,
                          reachable_radius_estimate, realize_target)
    from .spnlib import random_sp_tangent
    from .tsystem import PerturbationParams

    opts = scenario.options
    ledger = cmd_constants(scenario, model, out, return_ledger=True)

    # default orbit: the non-hyperbolic seed orbit (most interesting to push)
    seeds = orbit_seed_states(model, scenario.c)
    orbit = None
    for s in seeds:
        hint = np.round(s.vec / np.linalg.norm(s.vec)).astype(int)
        try:
            cand = find_closed_orbit_shooting(model, scenario.c, seed=s,
                                              winding_hint=hint if hint.any() else None)
        except Exception:
            continue
        orbit = cand
        if cand.spectral.kind != "hyperbolic":
            break
    if orbit is None:
        raise RuntimeError("no closed orbit found to perturb")

    eps_c2 = float(opts.get("eps_c2", 1e5))
    t0 = float(opts.get("t0_mult", 2.0)) * ledger.k0
    frame = orbit.segment_frame(t0)
    path = extract_curvature(model, frame)
    # min over 6 probe directions; fewer overestimates the uniform ball
    dhat = reachable_radius_estimate(
        model, frame, eps_c2, trials=int(opts.get("trials", 6)),
        ledger=ledger, kind="practical",
        seed=stable_seed(scenario.seed, "reach") % 2 ** 31, path=path)

    profile = build_profile(ledger, t0, path=path, kind="practical")
    kernel = WindowKernel(model, frame, profile, path=path)
    F0 = kernel.transfer()
    rng = np.random.default_rng(stable_seed(scenario.seed, "targets"))
    n_targets = int(opts.get("targets", 12))
    frac = float(opts.get("target_fraction", 0.5))
    results, params_last = [], None
    for _ in range(n_targets):
        U = random_sp_tangent(kernel.n, rng)
        U /= np.linalg.norm(U)
        r = frac * dhat / np.linalg.norm(F0 @ U)
        target = F0 @ expm(r * U)
        try:
            fld, err = realize_target(model, frame, target, eps_c2,
                                      ledger=ledger, profile=profile,
                                      path=path, kernel=kernel)
            rz = fld.realization
            results.append({"ok": True, "error": err,
                            "iterations": rz["iterations"],
                            "orbit_residual": rz["orbit_residual"],
                            "c2_bound": rz["c2_bound"]})
            params_last = rz["w"]
        except Exception as exc:
            results.append({"ok": False, "error_type": type(exc).__name__,
                            "message": str(exc)})

    report = {"delta_hat": dhat, "eps_c2": eps_c2, "t0": t0,
              "targets": results,
              "success_rate": (sum(r["ok"] for r in results) / len(results)
                               if results else None),
              "orbit": {"period": orbit.period, "class": str(orbit.spectral),
                        "trace": float(np.trace(orbit.dP))}}

    if bool(opts.get("push", True)) and orbit.spectral.kind != "hyperbolic" \
            and model.space.n == 1:
        push = push_orbit_hyperbolic(
            model, orbit, float(opts.get("push_eps_c2", 1e7)), ledger=ledger,
            target_trace=float(opts.get("target_trace", -2.2)))
        report["push"] = {"trace_before": push.trace_before,
                          "trace_after": push.trace_after,
                          "class_before": push.class_before,
                          "class_after": push.class_after,
                          "error": push.error,
                          "orbit_residual": push.orbit_residual,
                          "kick": push.kick, "t0": push.t0}
        print(f"push: trace {push.trace_before:.4f} -> {push.trace_after:.4f} "
              f"({push.class_before} -> {push.class_after})")

    write_json(out / "franks.json", report)
    if params_last is not None:
        (out / "beta_profile.csv").write_text(
            _beta_csv(profile, PerturbationParams.from_vector(
                np.asarray(params_last, float), kernel.n)))
    print(f"delta_hat={dhat:.4g}; {sum(r['ok'] for r in results)}/{len(results)} "
          f"targets realized")


def cmd_phin(scenario, model, out):
    from .genericity import phi_n_estimate

    opts = scenario.options
    est = phi_n_estimate(model, scenario.c,
                         theta_samples=int(opts.get("theta_samples", 12)),
                         t_grid=int(opts.get("t_grid", 48)),
                         seed=stable_seed(scenario.seed, "phin") % 2 ** 31)
    witness = est.witness
    payload = {"n": model.space.n, "value": est.value,
               "samples": est.samples, "failures": est.failures,
               "k0": est.k0,
               "witness": None if witness is None else
               {"x": [float(v) for v in witness.x],
                "vec": [float(v) for v in witness.vec],
                "rep": witness.rep}}
    write_json(out / "phin.json", payload)
    print(f"Phi_{model.space.n} estimate: {est.value:.6g} "
          f"({est.samples} samples, {est.failures} failures)")


def cmd_entropy(scenario, model, out):
    from .entropy import bowen_entropy, periodic_growth_entropy
    from .suspension import CatSuspension, EnergyLevelFlow

    opts = scenario.options
    if scenario.preset == "cat-suspension":
        flow = model if isinstance(model, CatSuspension) else CatSuspension()
        deltas = tuple(opts.get("delta_list", (0.4, 0.3)))
        Ts = tuple(opts.get("T_list", (1, 2, 3, 4, 5)))
        budget = int(opts.get("grid_budget", 4096))
        est = bowen_entropy(flow, delta_list=deltas, T_list=Ts, grid_budget=budget)
        T_max = int(opts.get("T_max", 16))
        growth = periodic_growth_entropy(flow.orbit_registry(T_max), T_max)
        payload = {"bowen": est.value, "periodic_growth": growth.value,
                   "known_value": flow.entropy,
                   "bowen_diagnostics": est.diagnostics,
                   "growth_diagnostics": growth.diagnostics}
        print(f"bowen={est.value:.5f} periodic-growth={growth.value:.5f} "
              f"(known {flow.entropy:.5f})")
    else:
        flow = EnergyLevelFlow(model, scenario.c)
        deltas = tuple(opts.get("delta_list", (0.3, 0.24)))
        Ts = tuple(opts.get("T_list", (4.0, 8.0, 12.0, 16.0)))
        budget = int(opts.get("grid_budget", 4096))
        est = bowen_entropy(flow, delta_list=deltas, T_list=Ts, grid_budget=budget)
        payload = {"bowen": est.value, "bowen_diagnostics": est.diagnostics}
        print(f"bowen={est.value:.5f}")
    (out / "entropy.json").write_text(est.to_json() + "\n")
    write_json(out / "entropy_summary.json", payload)
    (out / "spanning.csv").write_text(est.spanning_csv())


PIPELINES = {"orbits": cmd_orbits, "classify": cmd_orbits,
              "constants": cmd_constants, "franks": cmd_franks,
              "phin": cmd_phin, "entropy": cmd_entropy}


def run(scenario):
    """Validate, dispatch, and record one scenario; returns the RunRecord."""
    model = scenario.validate()
    out = Path(scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    PIPELINES[scenario.command](scenario, model, out)
    record = make_record(scenario, out, t0)
    record.write(out)
    return record


# --------------------------------------------------------------------------
# Catalogue and replay


def list_presets():
    """Names, constructor schemas, and admissibility notes for every preset."""
    return {
        "free-torus": {"params": {"d": 2}, "tonelli": True,
                       "note": "flat geodesic flow, any dimension"},
        "pendulum-torus": {"params": {"eps": 0.1}, "tonelli": True,
                           "note": "d=2 cosine well; closed-form Floquet oracles"},
        "two-wave": {"params": {"eps1": 0.1, "eps2": 0.2}, "tonelli": True,
                     "note": "d=3 transverse cosine wells"},
        "magnetic": {"params": {"strength": 0.05}, "tonelli": True,
                     "note": "d=2 constant one-form; splits the critical values"},
        "skewed-free": {"params": {}, "tonelli": True,
                        "note": "constant non-diagonal metric"},
        "cat-suspension": {"params": {}, "tonelli": False,
                           "note": "known-entropy benchmark for the estimators"},
    }


def cmd_presets(out_dir):
    catalog = list_presets()
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "presets.json", catalog)
    for name, info in catalog.items():
        params = ", ".join(f"{k}={v}" for k, v in info["params"].items())
        flag = "" if info["tonelli"] else "  [synthetic, not Tonelli]"
        print(f"{name}({params}){flag}: {info['note']}")
    return 0


def cmd_replay(out_dir, config_path=None, seed=None, threads=None):
    """Re-run a recorded scenario and compare artifact checksums."""
    record = load_record(out_dir)
    scenario = Scenario.from_config(record.scenario if config_path is None
                                    else load_config(config_path),
                                    {"seed": seed, "threads": threads})
    current = collect_manifest(out_dir)
    tampered = sorted(set(record.manifest) - set(current)) + \
        [n for n in record.manifest if n in current
         and current[n] != record.manifest[n]]

    scenario_changed = scenario.canonical() != record.scenario
    with tempfile.TemporaryDirectory() as tmp:
        rerun = Scenario(**{**scenario.__dict__, "out_dir": tmp})
        rerun_record = run(rerun)
    fresh = rerun_record.manifest
    drift = sorted(
        set(record.manifest) ^ set(fresh) |
        {n for n in record.manifest if n in fresh and fresh[n] != record.manifest[n]})

    if scenario_changed:
        verdict = "expected-difference" if drift or tampered else "identical"
    elif drift or tampered:
        verdict = "drift"
    else:
        verdict = "identical"
    report = {"verdict": verdict, "scenario_changed": scenario_changed,
              "tampered_or_missing": tampered, "rerun_mismatch": drift,
              "recorded_hash": record.scenario_hash,
              "rerun_hash": rerun_record.scenario_hash}
    write_json(Path(out_dir) / "replay.json", report)
    print(f"replay verdict: {verdict}")
    if tampered:
        print(f"  artifacts changed on disk since the run: {tampered}")
    if drift:
        print(f"  re-run differs from record: {drift}")
    return 0 if verdict in ("identical", "expected-difference") else 3


# --------------------------------------------------------------------------
# Entry point


def _build_parser():
    p = argparse.ArgumentParser(
        prog="toruslab",
        description="numerical laboratory for Tonelli flows on flat tori")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in ("orbits", "classify", "franks", "phin", "entropy", "constants"):
        sp = sub.add_parser(name, help=f"run the {name} pipeline")
        sp.add_argument("--config", help="YAML scenario file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="root seed")
        sp.add_argument("--threads", type=int, help="recorded worker count")
        sp.add_argument("--preset", help="preset name (overrides config)")
        sp.add_argument("--c", type=float, help="energy level (overrides config)")
    sp = sub.add_parser("replay", help="re-run a recorded scenario and compare")
    sp.add_argument("--out", required=True, help="directory holding run.json")
    sp.add_argument("--config", help="optional replacement scenario")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threads", type=int)
    sp = sub.add_parser("presets", help="list the preset catalogue")
    sp.add_argument("--out", help="also write presets.json here")
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.subcommand == "presets":
            return cmd_presets(args.out)
        if args.subcommand == "replay":
            return cmd_replay(args.out, args.config, args.seed, args.threads)
        cfg = load_config(args.config) if args.config else {}
        cfg.setdefault("command", args.subcommand)
        if cfg["command"] != args.subcommand:
            raise ValidationError("command",
                                  f"config says {cfg['command']!r} but the "
                                  f"subcommand is {args.subcommand!r}")
        overrides = {"seed": args.seed, "threads": args.threads,
                     "out": args.out, "preset": args.preset, "c": args.c}
        scenario = Scenario.from_config(cfg, overrides)
        run(scenario)
        return 0
    except ValidationError as exc:
        print(f"validation error -- {exc}", file=sys.stderr)
        return 2
    except _numerical_errors() as exc:
        print(f"numerical failure -- {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
