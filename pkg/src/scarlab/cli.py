"""Command-line interface: reproducible runs with hashed artifact manifests.

Every task writes its artifacts plus a ``manifest.json`` recording the fully
resolved configuration, library version, sector dimensions, wall times and
the sha256 of every emitted file, so a rerun can be verified byte-for-byte
with the ``verify`` subcommand. Numeric CSV fields use shortest round-trip
decimal representation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import USE_NUMBA
from .basis import full_basis
from .config import InvalidConfigError, SpinChainConfig
from .generalized import hpxp_equivalence
from .model import build_hamiltonian, build_Q_operators
from .pxp import build_magnon_ops, build_pxp, spin1_to_pxp
from .quench import StepFailureError, evolve, initial_state, revival_metrics
from .scars import (
    approximate_ground_state,
    detect_scar_tower,
    eigenstate_overlaps,
    ladder_fidelity,
    optimize_alpha,
    scar_spacing_report,
)
from .sectors import (
    SectorError,
    connectivity_fragments,
    decompose_by_C,
    frozen_pattern_subsectors,
    momentum_sectors,
    project_operator,
    sector_manifest,
)
from .spectral import (
    DenseCapError,
    TooFewLevelsError,
    dense_cap,
    diagonalize,
    level_statistics,
)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows):
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


class Run:
    """Output directory, timing and manifest bookkeeping for one task."""

    def __init__(self, args, task):
        self.task = task
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.t0 = time.time()
        self.config = {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func",)}
        self.timings = {}
        self.extra = {}

    def time(self, name):
        run = self

        class _T:
            def __enter__(self):
                self.t = time.time()

            def __exit__(self, *exc):
                run.timings[name] = round(time.time() - self.t, 4)

        return _T()

    def write_json(self, name, payload):
        path = self.out / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                                   default=_json_default) + "\n")
        return path

    def write_csv(self, name, header, rows):
        path = self.out / name
        _write_csv(path, header, rows)
        return path

    def finish(self):
        arts = {}
        for p in sorted(self.out.iterdir()):
            if p.name == "manifest.json" or not p.is_file():
                continue
            arts[p.name] = _sha256(p)
        manifest = {
            "task": self.task,
            "version": __version__,
            "config": self.config,
            "timings": self.timings,
            "wall_time": round(time.time() - self.t0, 4),
            "artifacts": arts,
            "environment": {"dense_cap": dense_cap(), "use_numba": USE_NUMBA},
        }
        manifest.update(self.extra)
        (self.out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True,
                       default=_json_default) + "\n")
        return manifest


def _cfg_from_args(args) -> SpinChainConfig:
    return SpinChainConfig(twoJ=args.twoJ, N=args.N, a=args.a, theta=args.theta)


def _full_sector(cfg):
    from .sectors import Sector

    fb = full_basis(cfg)
    return Sector(label={"kind": "basis", "name": "full"}, cfg=cfg,
                  codes=fb.codes, parent_codes=fb.codes)


def _resolve_blocks(cfg, sector_sel: str, momentum_sel: str):
    """Build the requested operator block(s).

    Returns ``(blocks, note)`` where blocks is a list of (operator, Sector)
    pairs. ``C=c`` selectors restrict the basis before building, which at
    a != 0 means the projected block (the pattern count is conserved only at
    a = 0); a note records this.
    """
    note = {}
    if sector_sel in ("full", None):
        parent = _full_sector(cfg)
        note["sector"] = "full"
    else:
        want = 0 if sector_sel in ("C0", "C=0") else int(sector_sel.split("=")[1])
        parent = next(s for s in decompose_by_C(cfg) if s.label["C"] == want)
        note["sector"] = f"C={want}"
        if cfg.a != 0.0:
            note["sector_projected_at_nonzero_a"] = True
    H = build_hamiltonian(cfg, parent.chain_basis())
    if momentum_sel in (None, "none"):
        note["block_dim"] = H.dim
        return [(H, parent)], note
    blocks = momentum_sectors(parent, cfg)
    note["momentum_dims"] = [b.dim for b in blocks]
    if momentum_sel == "all":
        return [(project_operator(H, b), b) for b in blocks], note
    if momentum_sel == "largest":
        k = int(np.argmax([b.dim for b in blocks]))
    else:
        k = int(momentum_sel)
    block = blocks[k]
    note["momentum_k"] = k
    note["block_dim"] = block.dim
    return [(project_operator(H, block), block)], note


def _project_initial(psi_full, sector):
    """Full-chain amplitudes -> sector coordinates (any sector level)."""
    parent_amps = np.asarray(psi_full, dtype=complex)[sector.parent_codes]
    return sector.project_state(parent_amps)


def cmd_spectrum(args):
    run = Run(args, "spectrum")
    cfg = _cfg_from_args(args)
    blocks, note = _resolve_blocks(cfg, args.sector, args.momentum)
    if len(blocks) != 1:
        raise InvalidConfigError("spectrum requires a single momentum block")
    H, _ = blocks[0]
    with run.time("diagonalize"):
        sd = diagonalize(H, mode=args.mode, k=args.k,
                         compute_vectors=not args.no_vectors)
    res = sd.residuals if sd.residuals is not None else np.zeros(sd.dim)
    run.write_csv("eigenvalues.csv", ["index", "eigenvalue", "residual"],
                  [(i, e, r) for i, (e, r) in enumerate(zip(sd.eigenvalues, res))])
    run.write_json("summary.json", {
        "block": note, "dim": sd.dim,
        "e_min": float(sd.eigenvalues[0]), "e_max": float(sd.eigenvalues[-1]),
        "max_residual": float(np.max(res)),
    })
    run.extra["block"] = note
    run.finish()
    return EXIT_OK


def cmd_rstat(args):
    run = Run(args, "rstat")
    cfg = _cfg_from_args(args)
    blocks, note = _resolve_blocks(cfg, args.sector, args.momentum)
    rows = []
    all_stats = []
    with run.time("diagonalize+stats"):
        for Hb, sec in blocks:
            sd = diagonalize(Hb, compute_vectors=False)
            st = level_statistics(sd.eigenvalues, window=args.window,
                                  edge_trim=args.trim, seed=args.seed)
            k = sec.k if sec is not None and sec.kind == "momentum" else None
            all_stats.append((k, st))
            rows.extend((k if k is not None else -1, s) for s in st["spacings"])
    run.write_csv("spacings.csv", ["k", "unfolded_spacing"], rows)
    payload = {"block": note, "blocks": [
        {"k": k, "r_mean": st["r_mean"], "r_se": st["r_se"],
         "ks_wigner": st["ks_wigner"], "ks_poisson": st["ks_poisson"],
         "n_spacings": st["n_spacings"], "unfolding": st["unfolding"]}
        for k, st in all_stats]}
    if len(all_stats) == 1:
        payload.update(payload["blocks"][0])
    run.write_json("rstat.json", payload)
    run.extra["block"] = note
    run.finish()
    return EXIT_OK


def cmd_dynamics(args):
    run = Run(args, "dynamics")
    cfg = _cfg_from_args(args)
    blocks, note = _resolve_blocks(cfg, args.sector, args.momentum)
    if len(blocks) != 1:
        raise InvalidConfigError("dynamics requires a single block")
    H, sector = blocks[0]
    psi_full = initial_state(cfg, args.kind)
    psi0 = _project_initial(psi_full, sector)
    nrm = np.linalg.norm(psi0)
    note["initial_state_block_weight"] = float(nrm ** 2)
    if nrm < 1e-12:
        raise InvalidConfigError("initial state has no weight in this block")
    psi0 = psi0 / nrm
    times = np.arange(0.0, args.tmax + 1e-12, args.dt)
    with run.time("evolve"):
        traj = evolve(psi0, H, times, method=args.method, tol=args.tol)
    met = revival_metrics(traj, prominence=args.prominence)
    run.write_csv("trajectory.csv", ["t", "fidelity", "energy", "norm"],
                  zip(traj.times, traj.fidelity, traj.energy, traj.norm))
    run.write_json("revivals.json", {
        "block": note, "method": traj.method, "metrics": met,
        "traj_meta": traj.meta,
    })
    run.extra["block"] = note
    run.finish()
    return EXIT_OK


def cmd_scars(args):
    run = Run(args, "scars")
    cfg = _cfg_from_args(args)
    blocks, note = _resolve_blocks(cfg, args.sector, args.momentum)
    if len(blocks) != 1:
        raise InvalidConfigError("scars requires a single block "
                                 "(use --momentum <k>)")
    H, sector = blocks[0]
    with run.time("diagonalize"):
        sd = diagonalize(H)
    psi_full = initial_state(cfg, args.kind)
    psi0 = _project_initial(psi_full, sector)
    with run.time("detect"):
        tower = detect_scar_tower(sd, psi0, cfg, sector=sector,
                                  window=args.window, entropy_cut=args.cut)
    from .basis import ChainBasis

    parent_basis = ChainBasis(cfg, sector.parent_codes, label="scar-parent")
    if sector.kind == "momentum":
        qp = build_Q_operators(cfg.a, cfg, parent_basis)
        Qm = project_operator(qp["Qminus"], sector)
        Qp = project_operator(qp["Qplus"], sector)
    else:
        q = build_Q_operators(cfg.a, cfg, sector.chain_basis())
        Qm, Qp = q["Qminus"], q["Qplus"]
    lad_down = ladder_fidelity(tower, Qm, "lower")
    lad_up = ladder_fidelity(tower, Qp, "raise")
    # approximate ground state and its overlap with the exact block GS
    gs_parent = approximate_ground_state(cfg, parent_basis)
    gs_block = sector.project_state(gs_parent) if sector.kind == "momentum" \
        else gs_parent
    gs_block = gs_block / max(np.linalg.norm(gs_block), 1e-300)
    gs_overlap = float(np.abs(np.vdot(gs_block, sd.eigenvectors[:, 0])) ** 2)
    overlaps = eigenstate_overlaps(sd, psi0)
    run.write_csv("scatter.csv", ["index", "energy", "overlap"],
                  [(i, e, o) for i, (e, o)
                   in enumerate(zip(sd.eigenvalues, overlaps))])
    report = {
        "block": note,
        "tower": {
            "energies": tower.energies,
            "overlaps": tower.overlaps,
            "window_overlaps": tower.window_overlaps,
            "entropies": tower.entropies,
            "n_members": tower.n_members,
            "missing_rungs": tower.missing_rungs,
            "completeness": tower.completeness,
            "separation": tower.separation,
        },
        "ladder": {"lower": lad_down, "raise": lad_up},
        "spacing": scar_spacing_report(tower),
        "approximate_gs_overlap_sq": gs_overlap,
    }
    run.write_json("scar_report.json", report)
    run.extra["block"] = note
    run.finish()
    return EXIT_OK


def cmd_pxp_check(args):
    run = Run(args, "pxp-check")
    cfg = SpinChainConfig(twoJ=2, N=args.N, a=0.0)
    with run.time("check"):
        from .sectors import decompose_by_C as dec

        sec = next(s for s in dec(cfg) if s.label["C"] == 0)
        Hs = build_hamiltonian(cfg, sec.chain_basis())
        ring = build_pxp(2 * cfg.N)
        iso = spin1_to_pxp(cfg, sec)
        e1 = np.sort(np.linalg.eigvalsh(Hs.to_dense())) * np.sqrt(2.0)
        e2 = np.sort(np.linalg.eigvalsh(ring.H.to_dense()))
        dev = float(np.abs(e1 - e2).max())
        mapped = iso.map_operator(Hs)
        intertwine = float(
            np.abs((mapped.matrix - ring.H.matrix / np.sqrt(2.0)).toarray()).max())
    payload = {
        "N": cfg.N, "M": 2 * cfg.N,
        "dim_spin_sector": sec.dim, "dim_ring": ring.basis.dim,
        "isospectral": bool(dev <= 1e-10),
        "max_spectral_deviation": dev,
        "intertwining_residual": intertwine,
    }
    run.write_json("pxp_check.json", payload)
    run.finish()
    print(f"isospectral: {payload['isospectral']}, "
          f"max deviation {dev:.3e}")
    return EXIT_OK


def cmd_fragments(args):
    run = Run(args, "fragments")
    cfg = _cfg_from_args(args)
    with run.time("decompose"):
        secs = decompose_by_C(cfg)
        payload = {"C_sectors": sector_manifest(secs), "frozen": []}
        for s in secs:
            if s.label["C"] > 0:
                subs = frozen_pattern_subsectors(s, cfg)
                payload["frozen"].append({
                    "C": s.label["C"],
                    "n_subsectors": len(subs),
                    "subsectors": sector_manifest(subs),
                })
        if cfg.dim <= 20000:
            H = build_hamiltonian(cfg)
            comps = connectivity_fragments(H)
            payload["connectivity"] = {
                "n_components": len(comps),
                "component_dims": [c.dim for c in comps[:64]],
            }
    run.write_json("fragments.json", payload)
    run.finish()
    return EXIT_OK


def cmd_sweep(args):
    run = Run(args, "sweep")
    a_values = [float(x) for x in args.a_values.split(",")]
    theta_values = [float(x) for x in args.theta_values.split(",")] \
        if args.theta_values else [args.theta]
    twoJ_values = [int(x) for x in args.twoJ_values.split(",")] \
        if args.twoJ_values else [args.twoJ]
    grid = [(tj, a, th) for tj in twoJ_values for a in a_values
            for th in theta_values]

    def one(point):
        tj, a, th = point
        row = {"twoJ": tj, "a": a, "theta": th, "N": args.N}
        try:
            cfg = SpinChainConfig(twoJ=tj, N=args.N, a=a, theta=th)
            sector_sel = args.sector if a == 0.0 or args.sector == "full" \
                else "full"
            H, sec, note = _resolve_block(cfg, sector_sel, args.momentum, run)
            blocks = H if isinstance(H, list) else [(H, sec)]
            rbest = None
            for Hb, _ in blocks:
                sd = diagonalize(Hb, compute_vectors=False)
                st = level_statistics(sd.eigenvalues, window=args.window,
                                      edge_trim=args.trim, seed=args.seed)
                if rbest is None:
                    rbest = st
            row.update({
                "block_dim": blocks[0][0].dim,
                "r_mean": rbest["r_mean"], "r_se": rbest["r_se"],
                "ks_wigner": rbest["ks_wigner"],
                "ks_poisson": rbest["ks_poisson"],
                "status": "ok", "sector": note.get("sector", "full"),
            })
        except Exception as exc:  # per-point failures recorded, sweep continues
            row.update({"status": f"error: {type(exc).__name__}: {exc}"})
        return row

    with run.time("sweep"):
        if args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                rows = list(pool.map(one, grid))
        else:
            rows = [one(p) for p in grid]
    cols = ["twoJ", "N", "a", "theta", "sector", "block_dim", "r_mean",
            "r_se", "ks_wigner", "ks_poisson", "status"]
    run.write_csv("sweep.csv", cols,
                  [[r.get(c, "") for c in cols] for r in rows])
    run.write_json("sweep.json", {"rows": rows})
    run.finish()
    return EXIT_OK


def cmd_verify(args):
    path = Path(args.manifest)
    manifest = json.loads(path.read_text())
    base = path.parent
    bad = []
    for name, digest in manifest.get("artifacts", {}).items():
        p = base / name
        if not p.exists():
            bad.append(f"missing: {name}")
        elif _sha256(p) != digest:
            bad.append(f"hash mismatch: {name}")
    if bad:
        for b in bad:
            print(b, file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"manifest ok: {len(manifest.get('artifacts', {}))} artifacts verified")
    return EXIT_OK


def _add_model_args(p, with_sector=True):
    p.add_argument("--twoJ", type=int, required=True, help="2j (integer >= 1)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    if with_sector:
        p.add_argument("--sector", default="full",
                       help="full | C0 | C=<n>")
        p.add_argument("--momentum", default="none",
                       help="none | <k> | all | largest")


def _add_common(p):
    p.add_argument("--out", default="scarlab-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--config", default=None,
                   help="JSON file overriding flags (wins on conflict)")


def build_parser():
    ap = argparse.ArgumentParser(prog="scarlab",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="task", required=True)

    p = sub.add_parser("spectrum", help="diagonalize one block")
    _add_model_args(p)
    p.add_argument("--mode", default="dense", choices=["dense", "lanczos"])
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--no-vectors", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("rstat", help="level-spacing statistics")
    _add_model_args(p)
    p.add_argument("--window", type=int, default=11)
    p.add_argument("--trim", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_rstat)

    p = sub.add_parser("dynamics", help="fidelity trajectory")
    _add_model_args(p)
    p.add_argument("--kind", default="all-up-z",
                   choices=["all-up-z", "all-down-x"])
    p.add_argument("--tmax", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--method", default="eigenbasis",
                   choices=["eigenbasis", "krylov"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--prominence", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("scars", help="tower detection and ladder analysis")
    _add_model_args(p)
    p.add_argument("--kind", default="all-up-z")
    p.add_argument("--window", type=float, default=0.5)
    p.add_argument("--cut", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_scars)

    p = sub.add_parser("pxp-check", help="spin-1 <-> constrained-ring check")
    p.add_argument("--N", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_pxp_check)

    p = sub.add_parser("fragments", help="sector decomposition report")
    _add_model_args(p, with_sector=False)
    _add_common(p)
    p.set_defaults(func=cmd_fragments)

    p = sub.add_parser("sweep", help="parameter-grid statistics table")
    _add_model_args(p)
    p.add_argument("--a-values", required=True,
                   help="comma-separated a grid")
    p.add_argument("--theta-values", default=None)
    p.add_argument("--twoJ-values", default=None)
    p.add_argument("--window", type=int, default=11)
    p.add_argument("--trim", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check a run manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_verify)
    return ap


def _apply_config_file(args):
    if getattr(args, "config", None):
        payload = json.loads(Path(args.config).read_text())
        known = set(vars(args))
        for key, val in payload.items():
            k = key.replace("-", "_")
            if k not in known:
                raise InvalidConfigError(f"unknown config key {key!r}")
            if getattr(args, k) != val:
                print(f"config file overrides --{key}={getattr(args, k)!r} "
                      f"with {val!r}", file=sys.stderr)
            setattr(args, k, val)
    return args


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args = _apply_config_file(args)
        return args.func(args)
    except DenseCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidConfigError, SectorError, json.JSONDecodeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepFailureError, TooFewLevelsError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
