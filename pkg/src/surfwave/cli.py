"""Command-line entry point ``surfwave``.

Exit codes: 0 success, 2 configuration error, 3 physics precondition
violated, 4 artifact mismatch (snapshot/config disagreement or unreadable
artifact), 1 when a verification suite fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .analysis import (analyticity_strip_width, existence_time_scale, homogeneous_norm, interpolation_check,
                       l1_moment, psi_from_phi)
from .config import ConfigError, RunConfig, RunManifest, load_config
from .dispersion import DomainError, find_roots, select_root
from .fields import (decay_rates, interior_residuals, jump_residuals, render_snapshot)
from .io import SnapshotFormatError, read_snapshot, write_field_block, write_field_csv, write_snapshot, \
    write_snapshot_csv
from .profiles import build_profile
from .solver import run
from .spectral import SymmetryError, to_physical
from .verify import INTERPOLATION_PAIRS, run_suites

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PHYSICS, EXIT_MISMATCH = 0, 1, 2, 3, 4
log = logging.getLogger("surfwave")


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    return cfg.with_overrides(formulation=getattr(args, "formulation", None), n_modes=getattr(args, "n_modes", None),
                              length=getattr(args, "length", None), t_end=getattr(args, "t_end", None),
                              seed=getattr(args, "seed", None), snapshot_every=getattr(args, "snapshot_every", None))


def _root_dict(root) -> dict:
    return {"lambda": root.phase_velocity, "sigma": root.sigma, "d": root.discriminant,
            "regime": root.regime.value, "rescale": None if math.isnan(root.rescale) else root.rescale}


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _selected_root(cfg: RunConfig):
    roots = find_roots(cfg.physical)
    try:
        return select_root(roots, cfg.root_index)
    except (DomainError, IndexError) as exc:
        raise CommandError(EXIT_PHYSICS, str(exc)) from None


# --- subcommands ------------------------------------------------------------------

def cmd_roots(args) -> int:
    cfg = _load(args)
    roots = find_roots(cfg.physical)
    regime = roots[0].regime.value if roots else "NoRoot"
    print(f"# case={int(cfg.physical.case())} regime={regime} roots={len(roots)}")
    print("index\tlambda\tsigma\td\tregime\trescale\tusable")
    for i, r in enumerate(roots):
        print(f"{i}\t{r.phase_velocity:.15g}\t{r.sigma:.15g}\t{r.discriminant:.15g}\t{r.regime.value}\t"
              f"{r.rescale:.15g}\t{str(r.usable).lower()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    root = _selected_root(cfg)
    try:
        initial = build_profile(cfg.profile["name"], cfg.grid, cfg.seed,
                                **{k: v for k, v in cfg.profile.items() if k != "name"})
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from None
    manifest = RunManifest.from_config(cfg, _root_dict(root))
    digest = manifest.config_hash
    out = _out_dir(args)
    (out / "manifest.json").write_text(manifest.to_json())
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    counter = [0]

    def writer(state):
        path = snap_dir / f"snap_{counter[0]:05d}.bin"
        write_snapshot(path, state, cfg.grid, digest)
        write_snapshot_csv(path.with_suffix(".csv"), state, cfg.grid, digest)
        counter[0] += 1
        return str(path.relative_to(out))

    with (out / "diagnostics.ndjson").open("w") as stream:
        def sink(record: dict):
            stream.write(json.dumps({"manifest": digest, **record}) + "\n")

        if cfg.solver.t_end == 0:
            record = run(initial, cfg.solver, cfg.grid, sink, cfg.norms, None, writer)
        else:
            record = run(initial, cfg.solver, cfg.grid, sink, cfg.norms, cfg.snapshot_every, writer)
    print(json.dumps(record.exit_record()))
    return EXIT_OK


def _print_rows(suite: str, rows) -> bool:
    ok = True
    for row in rows:
        print(f"{suite}\t{row.tsv()}")
        ok &= bool(row.passed)
    return ok


def cmd_verify(args) -> int:
    cfg = _load(args)
    options = dict(cfg.verify)
    names = options.pop("suites", None)
    sigmas = options.pop("sigmas", None)
    quick = options.pop("quick", False) or args.quick
    suite_opts: dict[str, dict] = {}
    if sigmas:
        suite_opts["kernels"] = {"sigmas": tuple(sigmas)}
    if quick:
        suite_opts.setdefault("kernels", {})["n_points"] = 10_000
        suite_opts["symmetrization"] = {"n_profiles": 3, "n_k": 16}
        suite_opts["interpolation"] = {"n_states": 20}
    if options:
        raise CommandError(EXIT_CONFIG, f"unknown keys in verify: {sorted(options)}")
    if args.suite:
        names = args.suite
    try:
        results = run_suites(names, **suite_opts)
    except KeyError as exc:
        raise CommandError(EXIT_CONFIG, f"unknown suite {exc}") from None
    print("suite\tname\tsamples\tmax_abs_err\tpass")
    summary = {suite: _print_rows(suite, rows) for suite, rows in results.items()}
    for suite, ok in summary.items():
        print(f"# {suite}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all(summary.values()) else EXIT_FAIL


def _eta_grid(spec, default, sign: float) -> np.ndarray:
    if spec is None:
        return default
    arr = np.asarray(spec, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise CommandError(EXIT_CONFIG, "eta grids must be nonempty lists")
    if np.any(sign * arr < 0) or (sign < 0 and np.any(arr == 0)):
        raise CommandError(EXIT_CONFIG, "plasma eta must be >= 0 and vacuum eta < 0")
    return arr


def cmd_fields(args) -> int:
    cfg = _load(args)
    try:
        snap = read_snapshot(args.snapshot)
    except (OSError, SnapshotFormatError) as exc:
        raise CommandError(EXIT_MISMATCH, f"cannot read snapshot: {exc}") from None
    if not snap.grid.compatible(cfg.grid):
        raise CommandError(EXIT_MISMATCH, f"snapshot grid (N={snap.grid.n_modes}, L={snap.grid.length}) does not "
                                          f"match config grid (N={cfg.grid.n_modes}, L={cfg.grid.length})")
    root = _selected_root(cfg)
    opts = dict(cfg.fields)
    eta_p = _eta_grid(opts.get("eta_plasma"), np.linspace(0.0, 2.0, 9), 1.0)
    eta_v = _eta_grid(opts.get("eta_vacuum"), -np.linspace(0.25, 2.0, 8), -1.0)
    epsilon = opts.get("epsilon")
    try:
        fs = render_snapshot(snap.state, root, cfg.physical, cfg.grid, eta_p, eta_v, epsilon)
    except SymmetryError as exc:
        raise CommandError(EXIT_MISMATCH, str(exc)) from None
    digest = RunManifest.from_config(cfg, _root_dict(root)).config_hash
    out = _out_dir(args)
    write_field_block(out / "fields.bin", fs, digest)
    write_field_csv(out, fs, digest)
    coeffs = snap.state.coeffs
    active = np.abs(cfg.grid.k[np.abs(coeffs) > 0])
    active = active[active > 0]
    k_min = float(active.min()) if active.size else 0.0
    jumps = jump_residuals(snap.state, root, cfg.physical, cfg.grid)
    interior = interior_residuals(snap.state, root, cfg.physical, cfg.grid)
    report = {
        "manifest": digest,
        "snapshot_manifest": snap.manifest_hash,
        "root": _root_dict(root),
        "jump_residuals": dict(zip(("kinematic", "plasma_field", "vacuum_field", "pressure", "electric"),
                                   map(float, jumps))),
        "interior_residuals": interior,
        "jump_pass": bool(np.all(jumps <= 1e-10)),
        "decay_pass": fs.decay_ok(k_min) if k_min > 0 else True,
        "k_min": k_min,
    }
    if active.size and np.unique(active).size == 1:
        report["decay_rates"] = decay_rates(fs)
        report["expected_rates"] = {"plasma": k_min, "vacuum": root.sigma * k_min}
    (out / "fields_report.json").write_text(json.dumps(report, indent=2))
    print(json.dumps(report))
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _load(args)
    paths = sorted(Path(p) for p in args.snapshots)
    if not paths:
        raise CommandError(EXIT_CONFIG, "no snapshot files given")
    records = []
    for path in paths:
        try:
            snap = read_snapshot(path)
        except (OSError, SnapshotFormatError) as exc:
            raise CommandError(EXIT_MISMATCH, f"{path}: {exc}") from None
        grid = snap.grid
        psi = psi_from_phi(snap.state, grid)
        values = to_physical(snap.state, grid)
        entry = {
            "file": str(path), "manifest": snap.manifest_hash, "tau": snap.state.tau,
            "psi_l2": homogeneous_norm(psi, 0.0, grid),
            "hs_norms": {f"{s:g}": homogeneous_norm(psi, s, grid) for s in cfg.norms.s_values},
            "l1_moment": l1_moment(psi, grid),
            "oscillation": float(values.max() - values.min()),
            "strip_width": analyticity_strip_width(snap.state, grid),
            "existence_scale": existence_time_scale(psi, max(max(cfg.norms.s_values), cfg.norms.s_prime), grid),
            "interpolation": {},
        }
        if not math.isfinite(entry["strip_width"]):
            entry["strip_width"] = None
        for p, q in INTERPOLATION_PAIRS:
            res = interpolation_check(psi, p, q, grid)
            entry["interpolation"][f"p={p:g},q={q:g}"] = {"lhs": res.lhs, "rhs": res.rhs, "pass": res.passed}
        records.append(entry)
    text = "\n".join(json.dumps(r) for r in records) + "\n"
    if args.out:
        _out_dir(args).joinpath("analysis.ndjson").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load(args)
    opts = dict(cfg.bench)
    sizes = tuple(args.sizes or opts.get("sizes", bench_mod.DEFAULT_SIZES))
    try:
        rows = bench_mod.bench_sizes(sizes, repeats=int(opts.get("repeats", 5)),
                                     min_time=float(opts.get("min_time", 0.05)))
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from None
    rep = bench_mod.report(rows)
    print("path\tn_modes\twarm_ns\tcold_ns\twarm_rel_spread\tbatch")
    for row in rows:
        print(row.line())
    for path, exp in rep["exponents"].items():
        print(f"# exponent {path}: {exp:.3f}")
    if args.out:
        _out_dir(args).joinpath("bench.json").write_text(json.dumps(rep, indent=2))
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfwave", description="Surface-wave amplitude equation toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="YAML configuration file")
        if out:
            p.add_argument("--out", help="output directory")
        p.add_argument("--formulation")
        p.add_argument("--n-modes", type=int)
        p.add_argument("--length", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--snapshot-every", type=float)
        return p

    common(sub.add_parser("roots", help="list dispersion roots"), out=False).set_defaults(func=cmd_roots)
    common(sub.add_parser("simulate", help="evolve an initial profile")).set_defaults(func=cmd_simulate)
    for name in ("verify-kernels", "verify"):
        p = common(sub.add_parser(name, help="run the self-check suites"), out=False)
        p.add_argument("--suite", action="append", help="restrict to a suite (repeatable)")
        p.add_argument("--quick", action="store_true", help="smaller samples")
        p.set_defaults(func=cmd_verify)
    p = common(sub.add_parser("fields", help="first-order fields of a snapshot"))
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_fields)
    p = common(sub.add_parser("analyze", help="diagnostics of snapshot files"))
    p.add_argument("snapshots", nargs="+")
    p.set_defaults(func=cmd_analyze)
    p = common(sub.add_parser("bench", help="time the right-hand sides"))
    p.add_argument("--sizes", type=int, nargs="+")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except CommandError as exc:
        log.error("%s", exc)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
