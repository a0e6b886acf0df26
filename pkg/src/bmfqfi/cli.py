"""Command-line front end.

    bmfqfi <subcommand> [--config FILE] [--out DIR] [flags] [--set key=value ...]

Every run writes CSV files plus ``manifest.csv`` (file, config hash,
status) into the output directory. Exit codes: 0 ok, 2 configuration
error, 3 solver failure.
"""
import argparse
import math
import os
import sys

import numpy as np

from . import bmf, breaktime, chaos, evolve, hp, qpt, spin
from .config import SUBCOMMANDS, parse_config
from .errors import BmfqfiError, ConfigError
from .io import Manifest, config_hash, read_csv

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

# relative slack on the producibility bounds for computed QFI series
DEPTH_MARGIN = 1e-9

FLAGS = ("N", "A", "c", "dt", "g", "periods", "tier", "threads", "out")


def _time_grid(cfg):
    if cfg.subcommand in ("oat", "depth"):
        return np.linspace(0.0, cfg["t_end"], cfg["samples"])
    n = max(1, math.ceil(cfg["t_end"] / cfg["dt"] - 1e-9))
    return np.linspace(0.0, cfg["t_end"], n + 1)


def _exact_columns(times, states, amplitudes):
    m = spin.spin_moments(states)
    cols = {"t": times}
    for i, k in enumerate("xyz"):
        cols[f"J{k}"] = m.first[:, i]
    for i, k in enumerate("xyz"):
        for j in range(i, 3):
            cols[f"J{k}J{'xyz'[j]}"] = m.second[:, i, j]
    cols["F_Q"] = spin.qfi(spin.covariance_q(m))
    if amplitudes:
        for k in range(states.shape[1]):
            cols[f"re_{k}"] = states[:, k].real
            cols[f"im_{k}"] = states[:, k].imag
    return cols


def run_dynamics(cfg, man):
    """oat / tat / qkr: exact, BMF and HP tiers from the x-polarised state."""
    p, N, name = cfg.params, cfg.params.N, cfg.subcommand
    times = _time_grid(cfg)
    psi0 = spin.coherent_state(N, math.pi / 2, 0.0)
    states = evolve.evolve_states(p, psi0, times, dt=cfg["dt"])
    exact = _exact_columns(times, states, cfg["amplitudes"])
    man.csv(f"{name}_exact.csv", exact)
    tb = bmf.integrate_bmf(bmf.bmf_initial(N, math.pi / 2, 0.0), p, sample_times=times,
                           dt=cfg["dt"])
    man.csv(f"{name}_bmf.csv", tb.columns())
    th = hp.integrate_hp(hp.HpMoments(), p, sample_times=times, dt=cfg["dt"], warn=False)
    man.csv(f"{name}_hp.csv", th.columns())
    man.csv(f"{name}_qfi.csv",
            {"t": times, "F_Q": exact["F_Q"], "F_B": tb.f_b(), "F_HP": th.f_hp()})


def run_lyap_map(cfg, man):
    A, c = np.array(cfg["A_grid"]), np.array(cfg["c_grid"])
    lam = chaos.lyapunov_map(A, c, m=cfg["periods"], delta0=cfg["delta0"], tau0=cfg["tau0"],
                             tau1=cfg["tau1"], threads=cfg.threads, n_sub=cfg["substeps"])
    AA, CC = np.meshgrid(A, c, indexing="ij")
    man.csv("lyapunov_map.csv", {"A": AA.ravel(), "c": CC.ravel(), "lambda_L": lam.ravel()})


def run_poincare(cfg, man):
    n = cfg["seeds"]
    seeds = chaos.seed_grid(n, n)
    pts = chaos.poincare_section(cfg.params, seeds, cfg["periods"], cfg["substeps"], cfg.threads)
    man.csv("poincare.csv", {
        "seed_id": [q.seed_id for q in pts], "n": [q.period_index for q in pts],
        "phi": [q.phi for q in pts], "s_z": [q.s_z for q in pts],
    })
    frac, flags = chaos.bounded_fraction(cfg.params, seeds, cfg["periods"], n_sub=cfg["substeps"])
    man.csv("poincare_bounded.csv", {"seed_id": np.arange(len(seeds)), "bounded": flags})
    man.text("poincare_summary.txt", {"seeds": len(seeds), "bounded_fraction": frac})


def run_breaktime(cfg, man):
    tier = cfg["tier"] if cfg["tier"] != "exact" else "BMF"
    recs = breaktime.breaktime_scan(cfg["N_list"], cfg.params, cfg["g"], tier, cfg["regime"],
                                    cfg["dt"], cfg["t_max"], cfg.threads)
    fields = ("N", "A", "c", "regime", "t_IB", "t_HP", "g", "drive")
    man.csv("breaktimes.csv", {f: [getattr(r, f) for r in recs] for f in fields})
    summary = {}
    for field in ("t_IB", "t_HP"):
        if all(math.isfinite(getattr(r, field)) for r in recs):
            try:
                fits, best = breaktime.compare_models(recs, n_min=cfg["n_min"], field=field)
            except BmfqfiError as exc:
                summary[f"{field}.error"] = str(exc)
                continue
            summary[f"{field}.best"] = best
            for m, f in fits.items():
                summary[f"{field}.{m}.alpha"] = f.alpha
                summary[f"{field}.{m}.residual"] = f.residual
    man.text("breaktime_fit.txt", summary)


def run_qpt(cfg, man):
    tier = cfg["tier"] if cfg["tier"] in qpt.TIERS else "both"
    res = qpt.adiabatic_sweep(cfg.params.N, cfg.params.c, cfg["v"], cfg["A_max"],
                              cfg["dt"] if "dt" in cfg.explicit else None, tier, cfg["pole"],
                              cfg["sample_dA"])
    man.csv("qpt_sweep.csv", res.columns())
    man.text("qpt_summary.txt", {"A_star_Q": res.A_star_Q, "A_star_B": res.A_star_B})


def run_depth(cfg, man):
    if cfg["input"]:
        if not os.path.isfile(cfg["input"]):
            raise ConfigError(f"input file {cfg['input']!r} not found")
        data = read_csv(cfg["input"])
        if "F_Q" not in data or "t" not in data:
            raise ConfigError(f"{cfg['input']} needs t and F_Q columns")
        times, F = data["t"], data["F_Q"]
    else:
        times = _time_grid(cfg)
        psi0 = spin.coherent_state(cfg.params.N, math.pi / 2, 0.0)
        F = evolve.qfi_series(evolve.evolve_states(cfg.params, psi0, times, dt=cfg["dt"]))
    N = cfg.params.N
    d = [spin.entanglement_depth(min(f, N * N), N, margin=DEPTH_MARGIN) for f in F]
    man.csv("depth.csv", {"t": times, "F_Q": F, "depth": [x.k_plus_one for x in d],
                          "s_floor": [x.s_floor for x in d], "r_rem": [x.r_rem for x in d]})


RUNNERS = {
    "oat": run_dynamics, "tat": run_dynamics, "qkr": run_dynamics,
    "lyap-map": run_lyap_map, "poincare": run_poincare,
    "breaktime-scan": run_breaktime, "qpt": run_qpt, "depth": run_depth,
}


def run(cfg):
    """Execute ``cfg``; returns an exit code. The manifest is always written,
    with a FAILED row when a solver error stopped the run."""
    os.makedirs(cfg.out, exist_ok=True)
    if not os.access(cfg.out, os.W_OK):
        raise ConfigError(f"output directory {cfg.out!r} is not writable")
    man = Manifest(cfg.out, config_hash({"subcommand": cfg.subcommand, **cfg.hashed_values()}))
    try:
        RUNNERS[cfg.subcommand](cfg, man)
    except (ArithmeticError, BmfqfiError) as exc:
        man.write(failed=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER if isinstance(exc, ArithmeticError) else EXIT_CONFIG
    man.write()
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="bmfqfi", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="INI file with [run] and per-subcommand sections")
    for key in FLAGS:
        ap.add_argument(f"--{key}", dest=key, default=None)
    ap.add_argument("--N-list", dest="N_list", default=None, help="comma list of N")
    ap.add_argument("--regime", default=None)
    ap.add_argument("--v", default=None)
    ap.add_argument("--amplitudes", action="store_const", const="true", default=None,
                    help="add Re/Im amplitude columns to exact trajectories")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override any config key")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {}
    for k in FLAGS + ("N_list", "regime", "v", "amplitudes"):
        if getattr(args, k) is not None:
            overrides[k] = (getattr(args, k), "flag --" + k.replace("_", "-"))
    try:
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            overrides[key.strip()] = (value, f"--set {key.strip()}")
        cfg = parse_config(args.subcommand, args.config, overrides)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
