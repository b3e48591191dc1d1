"""Command-line surface for the pipeline.

Subcommands: mesh, basis, hodge, harmonize, flow, decompose, holonomy,
selftest.  All runs are deterministic given the same configuration and
seed; reports avoid timestamps so repeated runs are byte-identical.
Exit codes: 0 success, 1 module error (error JSON on stdout), 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

CONFIG_SCHEMA_VERSION = 1
_DEFAULTS = {
    "resolution": 24,
    "degree": 4,
    "normalization": "negative",
    "seed": 1,
    "tol": 1e-7,
    "out": "runs",
}


def load_config(path):
    """Key=value text config with a schema_version key."""
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("bad config line: %r" % raw)
            key, val = (s.strip() for s in line.split("=", 1))
            cfg[key] = val
    ver = int(cfg.pop("schema_version", CONFIG_SCHEMA_VERSION))
    if ver != CONFIG_SCHEMA_VERSION:
        raise ValueError("unsupported config schema_version %d" % ver)
    return cfg


def build_runconfig(args):
    cfg = dict(_DEFAULTS)
    if args.config:
        raw = load_config(args.config)
        for k, v in raw.items():
            if k not in _DEFAULTS:
                raise ValueError("unknown config key %r" % k)
            cfg[k] = v
    for k in ("resolution", "degree", "seed"):
        if getattr(args, k, None) is not None:
            cfg[k] = getattr(args, k)
        cfg[k] = int(cfg[k])
    if args.tol is not None:
        cfg["tol"] = args.tol
    cfg["tol"] = float(cfg["tol"])
    if args.out is not None:
        cfg["out"] = args.out
    if not 2 <= cfg["degree"] <= 6:
        raise ValueError("degree must be within 2..6")
    if cfg["tol"] <= 0:
        raise ValueError("tolerances must be positive")
    if cfg["normalization"] not in ("negative", "positive"):
        raise ValueError("normalization must be negative or positive")
    return cfg


_SURFACE_CACHE = {}


def get_surface(cfg):
    from .surface import BolzaSurface
    key = cfg["resolution"]
    if key not in _SURFACE_CACHE:
        _SURFACE_CACHE[key] = BolzaSurface(resolution=key)
    return _SURFACE_CACHE[key]


def _outdir(cfg):
    os.makedirs(cfg["out"], exist_ok=True)
    return cfg["out"]


def _random_structure(surface, cfg):
    from .jets import HigherStructure
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["degree"]
    mu = {}
    for k in range(3, n + 1):
        frame = surface.harmonic_frame(k)
        c = rng.standard_normal(len(frame)) + 1j * rng.standard_normal(len(frame))
        vals = sum(ci * h.values for ci, h in zip(c, frame)) * 0.12
        w = surface.random_smooth_field((1 - k, 0), rng, 0.15)
        mu[k] = vals + surface.dbar_op(w).values
    return HigherStructure(surface, n, cfg["normalization"], mu)


def cmd_mesh(cfg, args):
    from . import io
    surface = get_surface(cfg)
    path = os.path.join(_outdir(cfg), "mesh.json")
    io.save_mesh(surface, path)
    return {"written": path, "n_primary": surface.mesh.n_primary,
            "area": surface.area,
            "relation_defect": surface.group.relation_defect()}


def cmd_basis(cfg, args):
    surface = get_surface(cfg)
    k = args.k
    basis, rep = surface.holomorphic_basis(k)
    report = {"k": k, "dimension": len(basis),
              "expected_riemann_roch": 2 * k - 1}
    report.update(rep)
    from . import io
    path = os.path.join(_outdir(cfg), "basis_k%d.json" % k)
    io.dump_json({"schema_version": io.SCHEMA_VERSION, "kind": "basis_report",
                  **report}, path)
    return report


def cmd_hodge(cfg, args):
    from . import io
    from .hodge import get_solver
    surface = get_surface(cfg)
    k = args.k
    if args.tensor:
        mu = io.load_tensor(surface, args.tensor)
    else:
        rng = np.random.default_rng(cfg["seed"])
        frame = surface.harmonic_frame(k)
        c = rng.standard_normal(len(frame)) + 1j * rng.standard_normal(len(frame))
        mu_vals = sum(ci * h.values for ci, h in zip(c, frame)) * 0.2
        w = surface.random_smooth_field((1 - k, 0), rng, 0.3)
        from .surface import TensorField
        mu = TensorField(surface, (1 - k, 1),
                         mu_vals + surface.dbar_op(w).values)
    split = get_solver(surface, k).decompose(mu)
    out = _outdir(cfg)
    io.save_tensor(split.harmonic, os.path.join(out, "hodge_harmonic.json"))
    io.save_tensor(split.potential, os.path.join(out, "hodge_potential.json"))
    meta = {"schema_version": io.SCHEMA_VERSION, "kind": "hodge_report",
            "degree": k, "reconstruction_residual": split.residual,
            "harmonic_norm": split.harmonic.norm(),
            "orthogonality": abs(surface.inner(
                split.harmonic, surface.dbar_op(split.potential)))}
    io.dump_json(meta, os.path.join(out, "hodge_report.json"))
    return meta


def cmd_harmonize(cfg, args):
    from . import io
    from .harmonize import harmonic_representative, harmonicity_residual
    surface = get_surface(cfg)
    I = _random_structure(surface, cfg)
    pre = {str(k): harmonicity_residual(I, k) for k in range(3, I.degree + 1)}
    rep = harmonic_representative(I, tol=cfg["tol"])
    post = {str(k): harmonicity_residual(rep, k) for k in range(3, I.degree + 1)}
    disp = rep.distance(I)
    from .harmonize import energy
    report = {
        "schema_version": io.SCHEMA_VERSION, "kind": "harmonize_report",
        "degree": I.degree,
        "pre_residuals": pre, "post_residuals": post,
        "displacement": disp,
        "displacement_below_tol": bool(disp < cfg["tol"]),
        "energies": {str(k): energy(rep, k) for k in range(3, I.degree + 1)},
    }
    io.dump_json(report, os.path.join(_outdir(cfg), "harmonize_report.json"))
    return report


def cmd_flow(cfg, args):
    from . import io
    from .flows import HamiltonianJet, flow_integrate, homogeneous_real
    surface = get_surface(cfg)
    I = _random_structure(surface, cfg)
    rng = np.random.default_rng(cfg["seed"] + 1)
    k = args.k if args.k is not None else 2
    if not 2 <= k <= I.degree - 1:
        raise ValueError("flow degree k must be within 2..degree-1")
    c = surface.random_smooth_field((-k, 0), rng, args.amplitude)
    H = HamiltonianJet.autonomous(
        homogeneous_real(surface, k, c.values, I.degree - 1))
    record = flow_integrate(I, H, steps=args.steps)
    out = _outdir(cfg)
    io.dump_json(io.flow_report_payload(record),
                 os.path.join(out, "flow_report.json"))
    io.save_flow_csv(record, os.path.join(out, "flow_trace.csv"))
    check = surface.dbar_op(c)
    disp = record.final.mu[k + 1] - I.mu[k + 1]
    defect = float(np.abs(disp - check.values).max())
    return {"kind": "flow_report", "hamiltonian_degree": k,
            "displacement_law_defect": defect,
            "written": ["flow_report.json", "flow_trace.csv"]}


def cmd_decompose(cfg, args):
    from . import io
    from .flows import (HamiltonianJet, decompose_inductive,
                        default_test_panel, flow_endpoint, recompose)
    from .jets import JetField
    surface = get_surface(cfg)
    n = cfg["degree"]
    rng = np.random.default_rng(cfg["seed"])
    pieces = []
    for _ in range(2):
        J = JetField(surface, n - 1)
        for k in range(2, n):
            c = surface.random_smooth_field((-k, 0), rng, args.amplitude).values
            J.coeffs[k, 0] += c
            J.coeffs[0, k] += np.conj(c)
        pieces.append((0.5, J))
    H = HamiltonianJet(pieces)
    panel = default_test_panel(surface, n)
    parts = decompose_inductive(H, panel)
    re = recompose(parts)
    defect = 0.0
    for I in panel[:2]:
        a = flow_endpoint(I, H)
        b = flow_endpoint(I, re)
        defect = max(defect, a.distance(b))
    report = {"schema_version": io.SCHEMA_VERSION, "kind": "decompose_report",
              "degrees": list(range(2, n)),
              "part_sup_norms": [float(np.abs(P.coeffs).max()) for P in parts],
              "recomposition_defect": defect}
    io.dump_json(report, os.path.join(_outdir(cfg), "decompose_report.json"))
    return report


def cmd_holonomy(cfg, args):
    from . import io
    from .affine import hitchin_map
    from .jets import HigherStructure
    surface = get_surface(cfg)
    rng = np.random.default_rng(cfg["seed"])
    if args.fuchsian:
        I = HigherStructure(surface, 3, cfg["normalization"])
    else:
        frame = surface.harmonic_frame(3)
        c = rng.standard_normal(len(frame)) + 1j * rng.standard_normal(len(frame))
        mu3 = sum(ci * h.values for ci, h in zip(c, frame)) * 0.15
        w = surface.random_smooth_field((-2, 0), rng, 0.2)
        I = HigherStructure(surface, 3, cfg["normalization"],
                            {3: mu3 + surface.dbar_op(w).values})
    hol = hitchin_map(I)
    payload = io.holonomy_payload(hol)
    _, resid, sig = hol.invariant_form_fit()
    payload["fuchsian"] = bool(resid < 1e-6 and sorted(sig) == [-1, 1, 1])
    io.dump_json(payload, os.path.join(_outdir(cfg), "holonomy_report.json"))
    return {"kind": "holonomy_report",
            "relation_defect": payload["relation_defect"],
            "det_defect": payload["det_defect"],
            "fuchsian": payload["fuchsian"],
            "traces": payload["traces"]}


def cmd_selftest(cfg, args):
    from . import acceptance
    report, ok = acceptance.run_all(resolution=cfg["resolution"],
                                    seed=cfg["seed"],
                                    fast=args.fast)
    from . import io
    io.dump_json(report, os.path.join(_outdir(cfg), "selftest_report.json"))
    return {"kind": "selftest", "passed": ok,
            "written": "selftest_report.json",
            "criteria": {k: v["passed"] for k, v in report["criteria"].items()}}


def make_parser():
    ap = argparse.ArgumentParser(
        prog="jetsurf",
        description="higher complex structures on the Bolza surface")
    ap.add_argument("--config", type=str, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--resolution", type=int, default=None)
    ap.add_argument("--degree", type=int, default=None)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--out", type=str, default=None)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("mesh")
    p = sub.add_parser("basis")
    p.add_argument("k", type=int)
    p = sub.add_parser("hodge")
    p.add_argument("k", type=int, nargs="?", default=3)
    p.add_argument("--tensor", type=str, default=None)
    sub.add_parser("harmonize")
    p = sub.add_parser("flow")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--amplitude", type=float, default=0.2)
    p = sub.add_parser("decompose")
    p.add_argument("--amplitude", type=float, default=0.1)
    p = sub.add_parser("holonomy")
    p.add_argument("--fuchsian", action="store_true")
    p = sub.add_parser("selftest")
    p.add_argument("--fast", action="store_true")
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = build_runconfig(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 2
    handler = {
        "mesh": cmd_mesh, "basis": cmd_basis, "hodge": cmd_hodge,
        "harmonize": cmd_harmonize, "flow": cmd_flow,
        "decompose": cmd_decompose, "holonomy": cmd_holonomy,
        "selftest": cmd_selftest,
    }[args.command]
    try:
        result = handler(cfg, args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__},
                         sort_keys=True))
        return 1
    print(json.dumps(result, sort_keys=True, default=float))
    if args.command == "selftest" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
