"""Configuration layer and CLI tying the modules into reproducible runs.

Configs are flat key-value files with dotted keys (diff-friendly, one value
per line); bulk outputs are CSV, reports JSON.  Every artifact carries the
config hash so runs cannot be mixed accidentally.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import fem, lemmas, metrics, mesh as meshmod, oracle, orlicz, solve
from .errors import ArtifactError, ConfigError, OtlError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3
EXIT_SOLVER = 4


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "geometry.R": "1.0",
    "geometry.rho": "0.5",
    "geometry.h": "0.0625",
    "model.kind": "power",
    "model.p": "3.0",
    "model.a": "",
    "model.alpha_log": "",
    "model.g0": "2.0",
    "model.g1": "2.0",
    "data.kind": "constant",
    "data.c": "1.0",
    "data.s": "0.0",
    "data.theta0": "0.0",
    "data.eps": "0.5",
    "solver.delta0": "0.1",
    "solver.delta_min": "1e-06",
    "solver.delta_shrink": "0.1",
    "solver.grad_tol": "",
    "solver.max_newton": "100",
    "solver.armijo_c": "0.0001",
    "solver.cg_tol": "1e-10",
    "metrics.centers": "interface:8",
    "metrics.radii": "dyadic:0.025:0.2",
    "seed": "0",
    "output_dir": "out",
}


class ExperimentConfig:
    """Flat dotted-key configuration with typed accessors."""

    def __init__(self, values: dict):
        self.values = dict(_DEFAULTS)
        for k, v in values.items():
            if k not in _DEFAULTS:
                raise ConfigError(f"unknown config key {k!r}")
            self.values[k] = str(v).strip()
        self._validate()

    @classmethod
    def from_file(cls, path):
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        values = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                k, v = line.split("=", 1)
                values[k.strip()] = v.strip()
        return cls(values)

    def _f(self, key):
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(f"config key {key} is not a number: {self.values[key]!r}")

    def _i(self, key):
        try:
            return int(self.values[key])
        except ValueError:
            raise ConfigError(f"config key {key} is not an integer: {self.values[key]!r}")

    def _validate(self):
        R, rho, h = self._f("geometry.R"), self._f("geometry.rho"), self._f("geometry.h")
        if not (0 < rho < R):
            raise ConfigError(f"geometry.rho must lie in (0, geometry.R): rho={rho}, R={R}")
        if not (0 < h < (R - rho) / 2):
            raise ConfigError(f"geometry.h={h} infeasible for the annulus width")
        self.nonlinearity()  # raises ConfigError on bad model block
        self.interface_data()
        self.solver_config()

    def serialize(self) -> str:
        return "".join(f"{k} = {self.values[k]}\n" for k in sorted(self.values))

    def config_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]

    def build_mesh(self):
        return meshmod.build_disk_mesh(self._f("geometry.R"),
                                       self._f("geometry.rho"),
                                       self._f("geometry.h"))

    def nonlinearity(self):
        kind = self.values["model.kind"]
        try:
            return orlicz.Nonlinearity(
                kind=kind,
                p=self._f("model.p"),
                g0=self._f("model.g0"),
                g1=self._f("model.g1"),
                a=self._f("model.a") if self.values["model.a"] else None,
                alpha_log=self._f("model.alpha_log") if self.values["model.alpha_log"] else None,
            )
        except OtlError as exc:
            raise ConfigError(f"model block invalid: {exc}")

    def interface_data(self):
        try:
            return fem.InterfaceData(
                kind=self.values["data.kind"],
                c=self._f("data.c"),
                s=self._f("data.s"),
                theta0=self._f("data.theta0"),
                p=self._f("model.p"),
                eps=self._f("data.eps"),
            )
        except OtlError as exc:
            raise ConfigError(f"data block invalid: {exc}")

    def solver_config(self):
        try:
            return solve.SolverConfig(
                delta0=self._f("solver.delta0"),
                delta_min=self._f("solver.delta_min"),
                delta_shrink=self._f("solver.delta_shrink"),
                grad_tol=self._f("solver.grad_tol") if self.values["solver.grad_tol"] else None,
                max_newton=self._i("solver.max_newton"),
                armijo_c=self._f("solver.armijo_c"),
                cg_tol=self._f("solver.cg_tol"),
                seed=self._i("seed"),
            )
        except OtlError as exc:
            raise ConfigError(f"solver block invalid: {exc}")

    def metric_centers(self, mesh):
        spec = self.values["metrics.centers"]
        kind, _, arg = spec.partition(":")
        if kind == "interface":
            k = int(arg)
            th = 2 * np.pi * np.arange(k) / k
            return self._f("geometry.rho") * np.stack([np.cos(th), np.sin(th)], axis=1)
        if kind == "grid":
            n = int(arg)
            lim = 0.6 * self._f("geometry.R")
            xs = np.linspace(-lim, lim, n)
            X, Y = np.meshgrid(xs, xs)
            pts = np.stack([X.ravel(), Y.ravel()], axis=1)
            return pts[np.linalg.norm(pts, axis=1) < 0.7 * self._f("geometry.R")]
        raise ConfigError(f"unknown metrics.centers spec {spec!r}")

    def metric_radii(self):
        spec = self.values["metrics.radii"]
        parts = spec.split(":")
        if parts[0] != "dyadic" or len(parts) != 3:
            raise ConfigError(f"unknown metrics.radii spec {spec!r}")
        rmin, rmax = float(parts[1]), float(parts[2])
        if not (0 < rmin <= rmax):
            raise ConfigError("metrics.radii needs 0 < rmin <= rmax")
        radii = []
        r = rmax
        while r >= rmin * (1 - 1e-12):
            radii.append(r)
            r /= 2.0
        return np.array(radii)


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def run_solve(config: ExperimentConfig, out_dir):
    """Solve the configured problem and write all solver artifacts."""
    os.makedirs(out_dir, exist_ok=True)
    h = config.config_hash()
    mesh = config.build_mesh()
    nl = config.nonlinearity()
    f = config.interface_data()
    cfg = config.solver_config()
    u, trace = solve.minimize(mesh, nl, f, cfg)

    meshmod.export_csv(mesh, out_dir, h)
    fem.export_solution_csv(mesh, u, os.path.join(out_dir, "solution.csv"), h)
    fem.export_gradient_csv(mesh, u, os.path.join(out_dir, "gradient.csv"), h)
    _write_json(os.path.join(out_dir, "trace.json"),
                {"config_hash": h, "iterations": trace})
    _write_json(os.path.join(out_dir, "manifest.json"), {
        "config_hash": h,
        "config": config.values,
        "numpy_version": np.__version__,
        "files": ["vertices.csv", "triangles.csv", "interface.csv",
                  "solution.csv", "gradient.csv", "trace.json"],
    })
    return u, trace


def _load_solution(config: ExperimentConfig, out_dir):
    manifest_path = os.path.join(out_dir, "manifest.json")
    solution_path = os.path.join(out_dir, "solution.csv")
    if not (os.path.exists(manifest_path) and os.path.exists(solution_path)):
        raise ArtifactError(f"solver artifacts missing in {out_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("config_hash") != config.config_hash():
        raise ArtifactError("artifact config hash does not match this config")
    mesh = config.build_mesh()
    coeffs = np.empty(mesh.n_vertices)
    with open(solution_path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("vertex_id"):
                continue
            vid, _, _, val = line.strip().split(",")
            coeffs[int(vid)] = float(val)
    return mesh, fem.DiscreteField(mesh, coeffs)


def run_metrics(config: ExperimentConfig, out_dir):
    """Compute the regularity report from existing solver artifacts."""
    mesh, u = _load_solution(config, out_dir)
    h = config.config_hash()
    f = config.interface_data()
    centers = config.metric_centers(mesh)
    radii = config.metric_radii()

    report = metrics.bmo_profile(mesh, u, centers, radii)
    report.osc_values = metrics.oscillation_modulus(mesh, u, centers, radii)
    report.loglip_C = metrics.fit_log_lip(report.osc_values, radii)
    report.alpha_hat = metrics.holder_exponent(report.osc_values, radii) \
        if radii.size >= 2 else float("nan")
    # the exponent theorem needs p < d; d = 2 here, so the fit is exploratory
    report.alpha_hat_exploratory = True
    report.provenance = h
    if f.bounded:
        x0 = centers[0]
        for R in radii:
            rr = metrics.local_boundedness_ratio(mesh, u, f, x0, R)
            report.lb_ratios.append({"R": float(R), **rr})

    _write_json(os.path.join(out_dir, "report.json"), report.to_dict())
    with open(os.path.join(out_dir, "metrics.csv"), "w") as fh:
        fh.write(f"# config_hash={h}\n")
        fh.write("center_x,center_y,r,bmo,osc\n")
        for i, c in enumerate(centers):
            for j, r in enumerate(radii):
                fh.write(f"{float(c[0])!r},{float(c[1])!r},{float(r)!r},"
                         f"{float(report.bmo_values[i, j])!r},"
                         f"{float(report.osc_values[i, j])!r}\n")
    return report


def run_convergence(config: ExperimentConfig, h_list, out_dir):
    """Mesh-refinement study against the closed-form radial solution."""
    f = config.interface_data()
    if f.kind != "constant" and f.s != 0.0:
        raise ConfigError("convergence study needs constant interface data")
    os.makedirs(out_dir, exist_ok=True)
    hsh = config.config_hash()
    p = config._f("model.p")
    R, rho = config._f("geometry.R"), config._f("geometry.rho")
    exact = oracle.radial_solution(2, p, rho, R, f.c)
    nl = config.nonlinearity()
    cfg = config.solver_config()

    rows = []
    prev = None
    for h_target in h_list:
        mesh = meshmod.build_disk_mesh(R, rho, h_target)
        u, _ = solve.minimize(mesh, nl, f, cfg)
        ue = exact.field(mesh.vertices[:, 0], mesh.vertices[:, 1])
        err = u.coeffs - ue
        tri_err = err[mesh.triangles]
        l2 = float(np.sqrt(np.sum(mesh.areas / 12.0 *
                                  (tri_err.sum(axis=1) ** 2 + (tri_err ** 2).sum(axis=1)))))
        linf = float(np.abs(err).max())
        eoc_l2 = eoc_linf = ""
        if prev is not None:
            ratio = np.log(prev[0] / h_target)
            eoc_l2 = repr(float(np.log(prev[1] / l2) / ratio))
            eoc_linf = repr(float(np.log(prev[2] / linf) / ratio))
        rows.append((h_target, l2, linf, eoc_l2, eoc_linf))
        prev = (h_target, l2, linf)

    path = os.path.join(out_dir, "convergence.csv")
    with open(path, "w") as fh:
        fh.write(f"# config_hash={hsh}\n")
        fh.write("h,l2_error,linf_error,eoc_l2,eoc_linf\n")
        for h_target, l2, linf, e2, ei in rows:
            fh.write(f"{h_target!r},{l2!r},{linf!r},{e2},{ei}\n")
    return rows


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _build_parser():
    ap = argparse.ArgumentParser(prog="otl",
                                 description="degenerate interface-problem laboratory")
    ap.add_argument("--threads", type=int,
                    default=int(os.environ.get("OTL_THREADS", "0")),
                    help="worker threads (0 = auto); runs are deterministic either way")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("validate-g", help="check the structure conditions of the model")
    sp.add_argument("--config", required=True)

    for name in ("solve", "metrics"):
        add_common(sub.add_parser(name))

    sp = sub.add_parser("oracle", help="print the radial closed form and write the profile")
    add_common(sp)

    sp = sub.add_parser("convergence")
    add_common(sp)
    sp.add_argument("--h-list", default="0.125,0.0625,0.03125")

    sp = sub.add_parser("lemmas")
    sp.add_argument("mode", choices=["serrin", "iterate"])
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--out", default=None)
    return ap


def _load_config(args):
    config = ExperimentConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        config.values["seed"] = str(args.seed)
    return config


def _out_dir(args, config):
    return args.out if args.out else config.values["output_dir"]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate-g":
            config = ExperimentConfig.from_file(args.config)
            rep = orlicz.validate_ellipticity(config.nonlinearity())
            print(json.dumps(rep, sort_keys=True))
            return EXIT_OK if rep["pass"] else EXIT_CONFIG

        if args.command == "lemmas":
            if args.mode == "serrin":
                rep = lemmas.check_serrin(args.p, n_trials=args.trials, seed=args.seed)
                payload = {"violations": rep["violations"],
                           "n_trials": rep["n_trials"],
                           "worst_log_margin": rep["worst_log_margin"]}
            else:
                rng = np.random.default_rng(args.seed)
                bad = []
                n = max(1, args.trials)
                for k in range(n):
                    beta = float(rng.uniform(0.1, 1.5))
                    alpha = beta + float(rng.uniform(0.1, 1.5))
                    inst = lemmas.IterationInstance(
                        C1=float(rng.uniform(0.5, 10.0)), alpha=alpha, beta=beta,
                        C2=float(rng.uniform(0.0, 5.0)), mu=0.0, R0=1.0)
                    c1 = max(inst.C1, 1.0)
                    delta = 0.5 * (alpha + beta)
                    theta = (2 * c1) ** (-1.0 / (alpha - delta))
                    inst.phi = lemmas.extremal_phi(inst, theta, delta)
                    res = lemmas.iterate_phi(inst, check_hyp=False)
                    if not res["pass"]:
                        bad.append({"trial": k, "result": res})
                payload = {"violations": bad, "n_trials": n}
            print(json.dumps(payload, sort_keys=True))
            if args.out:
                _write_json(args.out, payload)
            return EXIT_OK

        config = _load_config(args)
        out = _out_dir(args, config)

        if args.command == "solve":
            run_solve(config, out)
        elif args.command == "metrics":
            run_metrics(config, out)
        elif args.command == "convergence":
            h_list = [float(x) for x in args.h_list.split(",")]
            run_convergence(config, h_list, out)
        elif args.command == "oracle":
            p = config._f("model.p")
            f = config.interface_data()
            if not f.bounded or f.kind != "constant":
                raise ConfigError("oracle needs constant interface data")
            sol = oracle.radial_solution(2, p, config._f("geometry.rho"),
                                         config._f("geometry.R"), f.c)
            print(json.dumps({"kappa": sol.kappa, "A": sol.A,
                              "u_inner": sol.u_inner}, sort_keys=True))
            os.makedirs(out, exist_ok=True)
            rr = np.linspace(0.0, sol.R, 2001)
            with open(os.path.join(out, "oracle_profile.csv"), "w") as fh:
                fh.write(f"# config_hash={config.config_hash()}\n")
                fh.write("r,u,du\n")
                for r in rr:
                    fh.write(f"{float(r)!r},{sol.u(r)!r},{sol.du(r)!r}\n")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactError as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
