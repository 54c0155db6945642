"""Command-line interface: ``multibubble <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 3 regime error
(construction hypotheses violated), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .bubbles import check_M_eps, eps_ij
from .chart import ChartModel
from .constants import compute_constants, constants_report
from .critical_points import CriticalPointReport, closed_form_m2, deflated_search
from .errors import DomainError, NumericalError, RegimeError
from .expansion import KINDS, calibrate_conventions, fit_quantity, verify_expansion_series
from .hamiltonian import COLLISION_TOL, CurvatureModel, eval_F, hess_F
from .montecarlo import IntegratorSpec
from .reduction import assemble, balance_ratio, read_back, solve_gamma

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    model_path: str = None
    parameters: dict = field(default_factory=dict)
    output_path: str = None

    def validate(self):
        p = self.parameters
        if "n" in p and (p["n"] < 5):
            raise DomainError(f"n={p['n']}: the construction requires n >= 5")
        if "m" in p and p["m"] < 1:
            raise DomainError("m must be at least 1")
        # convention accepts samples=0 to skip its Monte Carlo check
        floors = {"seeds": 0, "samples": 0 if self.command == "convention" else 1, "grid": 1, "workers": 1}
        for key, floor in floors.items():
            if key in p and p[key] is not None and p[key] < floor:
                raise DomainError(f"{key} must be at least {floor}")
        if "eps" in p:
            eps = p["eps"] if isinstance(p["eps"], list) else [p["eps"]]
            if not eps:
                raise DomainError("eps list is empty")
            if any(not (0 < e < 1) for e in eps):
                raise DomainError("eps values must lie in (0, 1)")
        for key in ("tol", "C", "mu", "span"):
            if key in p and not p[key] > 0:
                raise DomainError(f"{key} must be positive")
        return self

    def record(self) -> dict:
        """The part of the manifest echoed into outputs (no paths, so outputs compare byte for byte)."""
        return {"command": self.command, "parameters": self.parameters}


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _eps_list(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse eps list {text!r}") from exc
    if not vals:
        raise DomainError("eps list is empty")
    return vals


def _load_model(path) -> CurvatureModel:
    try:
        return CurvatureModel.from_json(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot read curvature model {path!r}: {exc}") from exc


def _select_crit(model: CurvatureModel, m: int, args) -> CriticalPointReport:
    if getattr(args, "crit_file", None):
        import json

        with open(args.crit_file) as fh:
            doc = json.load(fh)
        reports = [CriticalPointReport.from_dict(d) for d in doc["critical_points"]]
    elif m == 2:
        return closed_form_m2(model, -1)
    else:
        reports = [r for r in deflated_search(model, m, args.seeds, args.seed) if r.nondegenerate]
    reports = [r for r in reports if r.m == m]
    if not reports:
        raise RegimeError(f"no non-degenerate critical point with m={m} available")
    if not 0 <= args.crit_index < len(reports):
        raise DomainError(f"crit index {args.crit_index} out of range (found {len(reports)})")
    return reports[args.crit_index]


# ---------------------------------------------------------------- commands

def cmd_constants(args) -> int:
    RunManifest("constants", parameters={"n": args.n}).validate()
    _emit(serialize.dumps(constants_report(args.n)), args.output)
    return EXIT_OK


def cmd_critical_points(args) -> int:
    man = RunManifest("critical-points", args.model, {"m": args.m, "seeds": args.seeds, "seed": args.seed,
                                                      "tol": args.tol, "max_iter": args.max_iter}).validate()
    model = _load_model(args.model)
    reports = deflated_search(model, args.m, args.seeds, args.seed, tol=args.tol, max_iter=args.max_iter,
                              workers=args.workers)
    notes = []
    w = np.linalg.eigvalsh(model.sym_hess)
    if w[-1] <= 0:
        notes.append("hessK1 is negative semidefinite: z is a local maximum of K restricted to the boundary, "
                     "r -> F(r Lambda) is strictly decreasing along every ray and F has no critical point")
    if not reports:
        notes.append("no critical point found")
    doc = {"manifest": man.record(), "critical_points": [r.to_dict() for r in reports], "notes": notes}
    _emit(serialize.dumps(doc), args.output)
    return EXIT_OK


def cmd_configure(args) -> int:
    man = RunManifest("configure", args.model, {"m": args.m, "eps": args.eps, "crit_index": args.crit_index,
                                                "C": args.C, "mu": args.mu}).validate()
    model = _load_model(args.model)
    constants = compute_constants(model.n)
    kappa = balance_ratio(model, constants)
    gamma = solve_gamma(model, constants)
    crit = _select_crit(model, args.m, args)
    chart = ChartModel(model)
    ens = assemble(model, crit, args.eps, constants=constants, chart=chart, C=args.C, mu=args.mu, check=False)
    report = check_M_eps(ens, C=args.C, mu=args.mu, model=chart)
    doc = {
        "manifest": man.record(),
        "gamma": gamma,
        "kappa": kappa,
        "lambda_inv_over_eps": [1.0 / (b.lam * args.eps) for b in ens.bubbles],
        "critical_point": crit.to_dict(),
        "ensemble": ens.to_dict(),
        "reduced_variables": read_back(model, ens, crit, constants, chart).to_dict(),
        "eps_ij": {f"{i},{j}": eps_ij(ens.bubbles[i], ens.bubbles[j])
                   for i in range(ens.m) for j in range(i + 1, ens.m)},
        "M_eps": report.to_dict(),
    }
    _emit(serialize.dumps(doc), args.output)
    if not report.ok:
        sys.stderr.write("ensemble violates M_eps: "
                         + "; ".join(f"{v.constraint} {v.index} margin {v.margin:.3g}" for v in report.violations)
                         + "\n")
        return EXIT_REGIME
    return EXIT_OK


VERIFY_HEADER = ["eps", "kind", "analytic", "numeric", "stderr", "residual", "fitted_order",
                 "ci_low", "ci_high", "target_order", "leading_scale", "target_met", "status"]


def cmd_verify_expansion(args) -> int:
    eps_list = _eps_list(args.eps)
    kinds = tuple(args.kinds.split(",")) if args.kinds else KINDS
    if any(k not in KINDS for k in kinds):
        raise DomainError(f"kinds must be drawn from {KINDS}")
    RunManifest("verify-expansion", args.model, {"m": args.m, "eps": eps_list, "samples": args.samples,
                                                  "seed": args.seed, "workers": args.workers}).validate()
    model = _load_model(args.model)
    constants = compute_constants(model.n)
    crit = _select_crit(model, args.m, args)
    spec = IntegratorSpec(samples=args.samples, seed=args.seed, target_rel_err=args.target_rel_err,
                          workers=args.workers)
    series = verify_expansion_series(model, constants, crit, eps_list, spec, i=args.bubble, kinds=kinds)
    rows = []
    residuals = {k: [] for k in kinds}
    stderrs = {k: [] for k in kinds}
    for rep in series.reports:
        ana = float(np.linalg.norm(np.atleast_1d(rep.analytic)))
        num = float(np.linalg.norm(np.atleast_1d(rep.numeric)))
        if rep.kind != "x":
            ana, num = float(rep.analytic), float(rep.numeric)
        rows.append([rep.eps, rep.kind, ana, num, rep.stderr_norm, rep.abs_err if rep.kind == "x" else float(rep.residual),
                     None, None, None, None, rep.leading_scale, int(rep.target_met),
                     "ok" if rep.target_met else "stderr_target_missed"])
        ens = assemble(model, crit, rep.eps, constants=constants, check=False)
        r, s = fit_quantity(rep, ens, args.bubble)
        residuals[rep.kind].append(float(np.linalg.norm(np.atleast_1d(r))))
        stderrs[rep.kind].append(float(np.linalg.norm(np.atleast_1d(s))))
    for k in kinds:
        fit = series.fits.get(k)
        if fit is None:
            continue
        target = series.targets[k][0]
        status = "pass" if series.passed(k) else "fail"
        if not fit.sign_consistent:
            status += ";sign_change"
        if not fit.resolved:
            status += ";unresolved"
        rows.append(["fit", k, None, None, fit.stderr, None, fit.exponent, fit.ci_low, fit.ci_high, target,
                     None, None, status])
    _emit(serialize.csv_text(VERIFY_HEADER, rows), args.output)
    if args.figure:
        from .plotting import expansion_figure

        expansion_figure({"eps": eps_list, "residuals": residuals, "stderrs": stderrs,
                          "fits": {k: f.to_dict() for k, f in series.fits.items()}}, args.figure)
    return EXIT_OK


def _hessian_plane(model, m, span, args):
    crit = _select_crit(model, m, args)
    base = crit.cfg
    w, V = np.linalg.eigh(hess_F(model, base))
    order = np.argsort(np.abs(w), kind="stable")[:2]
    u, v = (V[:, k].reshape(base.shape) for k in order)
    size = span * np.linalg.norm(base) / np.sqrt(m)
    return base, u, v, (-size, size), (-size, size), w[order]


def _file_plane(model, path):
    import json

    with open(path) as fh:
        d = json.load(fh)
    try:
        base = np.asarray(d["base"], float)
        u = np.asarray(d["u"], float)
        v = np.asarray(d["v"], float)
        srange, trange = tuple(d["s"]), tuple(d["t"])
    except KeyError as exc:
        raise DomainError(f"plane file is missing key {exc}") from exc
    if not (base.shape == u.shape == v.shape) or base.ndim != 2 or base.shape[1] != model.dim:
        raise DomainError("plane base, u and v must all have shape (m, n-1)")
    return base, u, v, srange, trange, None


def _axis(rng, k):
    lo, hi = float(rng[0]), float(rng[1])
    return np.array([0.5 * (lo + hi)]) if k == 1 else np.linspace(lo, hi, k)


def cmd_landscape(args) -> int:
    man = RunManifest("landscape", args.model, {"m": args.m, "plane": args.plane, "grid": args.grid,
                                                "span": args.span}).validate()
    model = _load_model(args.model)
    if args.plane == "hessian":
        base, u, v, srange, trange, eigs = _hessian_plane(model, args.m, args.span, args)
    else:
        base, u, v, srange, trange, eigs = _file_plane(model, args.plane)
    s_axis, t_axis = _axis(srange, args.grid), _axis(trange, args.grid)
    rows = []
    values = np.full((s_axis.size, t_axis.size), np.nan)
    for a, s in enumerate(s_axis):
        for b, t in enumerate(t_axis):
            cfg = base + s * u + t * v
            try:
                f = eval_F(model, cfg)
                values[a, b] = f
                rows.append([s, t, f, 0])
            except DomainError:
                rows.append([s, t, None, 1])
    if np.all(np.isnan(values)):
        raise DomainError("every configuration on the slice has coincident points")
    _emit(serialize.csv_text(["s", "t", "F", "singular"], rows), args.output)
    if eigs is not None:
        sys.stderr.write(f"slice directions: Hessian eigenvalues {eigs[0]:.6g} (s), {eigs[1]:.6g} (t)\n")
    if args.figure:
        from .plotting import landscape_figure

        landscape_figure(s_axis, t_axis, values, args.figure, title=f"F on a 2-D slice, m={args.m}")
    return EXIT_OK


def cmd_convention(args) -> int:
    eps_list = _eps_list(args.eps)
    man = RunManifest("convention", args.model, {"m": args.m, "eps": eps_list, "samples": args.samples,
                                                  "seed": args.seed}).validate()
    model = _load_model(args.model)
    constants = compute_constants(model.n)
    crit = _select_crit(model, args.m, args) if args.samples > 0 else None
    spec = IntegratorSpec(samples=max(args.samples, 1), seed=args.seed, workers=args.workers)
    rep = calibrate_conventions(model, constants, eps_list, spec if args.samples > 0 else None, crit)
    _emit(serialize.dumps({"manifest": man.record(), "conventions": rep.to_dict()}), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multibubble", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model=True, out_help="output file (default stdout)"):
        if model:
            p.add_argument("--model", required=True, help="curvature model JSON")
        p.add_argument("--output", "-o", default=None, help=out_help)

    def crit_args(p):
        p.add_argument("--m", type=int, default=2, help="number of bubbles")
        p.add_argument("--crit-file", default=None, help="critical-points JSON to pick from")
        p.add_argument("--crit-index", type=int, default=0)
        p.add_argument("--seeds", type=int, default=100, help="Newton seeds when searching for m != 2")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("constants", help="universal constants by quadrature and closed form")
    p.add_argument("--n", type=int, required=True)
    common(p, model=False)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("critical-points", help="critical points of F")
    common(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_critical_points)

    p = sub.add_parser("configure", help="assemble the bubble ensemble at one eps")
    common(p)
    crit_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--mu", type=float, default=0.5)
    p.set_defaults(func=cmd_configure)

    p = sub.add_parser("verify-expansion", help="analytic vs numeric pairings over an eps series (CSV)")
    common(p)
    crit_args(p)
    p.add_argument("--eps", required=True, help="comma-separated eps values")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--target-rel-err", type=float, default=0.01)
    p.add_argument("--bubble", type=int, default=0)
    p.add_argument("--kinds", default=None, help="subset of alpha,lambda,x")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--figure", default=None, help="also write a log-log PNG of the residuals")
    p.set_defaults(func=cmd_verify_expansion)

    p = sub.add_parser("landscape", help="F sampled on a 2-D affine slice (CSV)")
    common(p)
    crit_args(p)
    p.add_argument("--plane", default="hessian",
                   help="'hessian' (two smallest-|eigenvalue| directions at the critical point) or a plane JSON")
    p.add_argument("--span", type=float, default=0.5, help="half-width of the hessian slice relative to the point size")
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--figure", default=None, help="also write a contour PNG")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("convention", help="calibrate chart factors and c2 normalization (JSON)")
    common(p)
    crit_args(p)
    p.add_argument("--eps", default="1e-2,3e-3,1e-3,3e-4")
    p.add_argument("--samples", type=int, default=500_000, help="0 skips the Monte Carlo c2 check")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_convention)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RegimeError as exc:
        sys.stderr.write(f"regime error: {exc}\n")
        return EXIT_REGIME
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
