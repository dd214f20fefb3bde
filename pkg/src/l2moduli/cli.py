"""Command-line entry point: ``l2moduli <command> [options]``.

Every command writes plain text (CSV or JSON) to ``--out`` or stdout.  CSV output
starts with ``#`` metadata lines (profile, orders, tolerances, version and the
full configuration) followed by a header row.  Nothing time-dependent is
written, so a fixed configuration reproduces its output byte for byte.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 accuracy failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import AccuracyError, InvalidInputError, L2ModuliError
from .profiles import get_profile
from .quadrature import ORDER_ENV, default_order

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_ACCURACY = 3

SUITES = ("kaehler", "constraints", "fs", "limits", "characters", "rp2", "dynamics")


class UsageError(InvalidInputError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    spacing: str = "lin"

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """``start,stop,count[,lin|log]``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) not in (3, 4):
            raise UsageError(f"grid must be start,stop,count[,lin|log], got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}: {exc}") from exc
        spacing = parts[3] if len(parts) == 4 else "lin"
        grid = cls(start, stop, count, spacing)
        grid.values()  # validate eagerly
        return grid

    def values(self) -> np.ndarray:
        if self.count < 1:
            raise UsageError("empty grid")
        if self.spacing not in ("lin", "log"):
            raise UsageError(f"grid spacing must be lin or log, got {self.spacing!r}")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise UsageError("grid bounds must be finite")
        if self.spacing == "log":
            if self.start <= 0 or self.stop <= 0:
                raise UsageError("log grid needs positive bounds")
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.start!r},{self.stop!r},{self.count},{self.spacing}"


@dataclass
class RunConfig:
    command: str
    profile: str = "l2"
    grid: str | None = None
    order: int | None = None
    tol: float | None = None
    out: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def header(self, **more) -> list[str]:
        lines = [
            f"l2moduli {__version__}",
            f"command: {self.command}",
            f"profile: {self.profile}",
            f"quadrature_order: {self.order}",
            f"tolerance: {self.tol}",
            f"seed: {self.seed}",
        ]
        lines += [f"{k}: {v}" for k, v in more.items()]
        lines.append("config: " + json.dumps(asdict(self), sort_keys=True, default=str))
        return lines


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _with_header(lines, body: str) -> str:
    return "".join(f"# {line}\n" for line in lines) + body


def _positive(name, value):
    if value is not None and not value > 0:
        raise UsageError(f"{name} must be positive")
    return value


def _profile_name(text: str) -> str:
    try:
        return get_profile(text).name
    except (InvalidInputError, KeyError, ValueError, OSError) as exc:
        raise UsageError(f"unknown profile {text!r}") from exc


def _order(args) -> int:
    order = args.order if args.order is not None else default_order()
    if order < 4:
        raise UsageError("--order must be at least 4")
    return order


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_tabulate(args) -> int:
    from .curvature import CurvatureReport

    profile = _profile_name(args.profile)
    grid = GridSpec.parse(args.grid)
    # curvature functions are closed form: --order and --tol are validated and echoed only
    order = _order(args) if args.order is not None else None
    tol = _positive("--tol", args.tol)
    cfg = RunConfig(
        "tabulate", profile, str(grid), order, tol, args.out, args.seed, {"diagnostics": args.diagnostics}
    )
    report = CurvatureReport.compute(profile, grid.values())
    body = report.to_csv(header_lines=cfg.header(grid=str(grid)), diagnostics=args.diagnostics)
    _emit(body, args.out)
    return EXIT_OK


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""


def _check(suite, name, value, tol, detail="") -> Check:
    value = float(value)
    return Check(suite, name, value, float(tol), bool(np.isfinite(value) and value < tol), detail)


def _suite_kaehler(args, order):
    from .quadrature import SphereQuadrature, kaehler_symmetry_residual
    from .rational_maps import RationalMap, is_valid_degree

    rng = np.random.default_rng(args.seed)
    quad = SphereQuadrature(order)
    tol = args.tol or 1e-5
    out = []
    for degree, count in ((1, 2), (2, 1)):
        made = 0
        while made < count:
            coeffs = rng.normal(size=2 * degree + 2) + 1j * rng.normal(size=2 * degree + 2)
            rmap = RationalMap(degree, coeffs)
            if not is_valid_degree(rmap, 1e-3):
                continue
            res = kaehler_symmetry_residual(rmap, args.step, quad)
            out.append(_check("kaehler", f"degree{degree}_map{made}", res, tol, f"step={args.step!r}"))
            made += 1
    return out


def _suite_constraints(args, order):
    from .invariant_metrics import positivity_check, verify_closure, verify_hermiticity

    lams = np.geomspace(0.1, 10.0, 25)
    tol = args.tol or 1e-8
    out = []
    for name in ("l2", "fs"):
        out.append(_check("constraints", f"hermiticity_{name}", verify_hermiticity(name, lams), tol))
        out.append(_check("constraints", f"closure_{name}", verify_closure(name, lams), tol))
        pos = positivity_check(name, np.geomspace(1e-3, 1e3, 200))
        out.append(Check("constraints", f"positivity_{name}", 0.0, 0.0, pos.passed, pos.reason))
    return out


def _suite_fs(args, order):
    from .curvature import hol_e1, hol_e3, ricci_generators, scalar_curvature
    from .invariant_metrics import frame_geometry, fs_gram_chart

    lams = np.linspace(0.0, 10.0, 101)
    prof = get_profile("fs")
    abar, _ = ricci_generators(prof, lams)
    gram_err = max(
        float(np.max(np.abs(fs_gram_chart(l) - frame_geometry(prof, l).gram))) for l in (0.0, 0.5, 2.0)
    )
    return [
        _check("fs", "hol_e1_minus_4", np.max(np.abs(hol_e1(prof, lams) - 4)), args.tol or 1e-9),
        _check("fs", "hol_e3_minus_4", np.max(np.abs(hol_e3(prof, lams) - 4)), args.tol or 1e-9),
        _check("fs", "kappa_minus_48", np.max(np.abs(scalar_curvature(prof, lams) - 48)), args.tol or 1e-8),
        _check("fs", "abar_minus_8A", np.max(np.abs(abar - 8 * prof.A(lams))), args.tol or 1e-9),
        _check("fs", "chart_gram_vs_closed_form", gram_err, 1e-12),
    ]


def _suite_limits(args, order):
    from .curvature import ricci_generators, scalar_curvature

    prof = get_profile("l2")
    abar, bbar = ricci_generators(prof, np.array([1e-5]))
    big = 1e3
    return [
        _check("limits", "A0_minus_4pi_over_3", abs(prof.A(0.0) - 4 * np.pi / 3), 1e-6),
        _check("limits", "B0_minus_pi_over_3", abs(prof.B(0.0) - np.pi / 3), 1e-6),
        _check("limits", "kappa0_minus_18_over_pi", abs(scalar_curvature(prof, 0.0) - 18 / np.pi), 1e-6),
        _check("limits", "Abar_small_minus_4", abs(abar[0] - 4), 1e-4),
        _check("limits", "Bbar_small_minus_1", abs(bbar[0] - 1), 1e-4),
        _check("limits", "lam2A_large_minus_pi", abs(big * big * prof.A(big) - np.pi), 1e-4),
    ]


def _suite_characters(args, order):
    from .invariant_metrics import character_integrals

    values = character_integrals()
    expected = (7, 5, 3, 1)
    labels = ("so2_symmetric", "so2_antisymmetric", "so3_symmetric", "so3_antisymmetric")
    return [
        _check("characters", lab, abs(v - e), args.tol or 1e-10, f"value={v!r}")
        for lab, v, e in zip(labels, values, expected)
    ]


def _suite_rp2(args, order):
    from .rational_maps import check_rp2_equivariance
    from .rp2 import (
        boundary_rhos,
        build_fixed_map,
        equivariance_grid,
        f_rho_table,
        lagrangian_residual_frame,
        n1_fixed_is_unitary,
        random_chart,
        random_fixed_matrix,
    )

    rng = np.random.default_rng(args.seed)
    grid = equivariance_grid()
    eq = max(check_rp2_equivariance(build_fixed_map(random_chart(n, rng)), grid) for n in (1, 3, 5))
    unit = n1_fixed_is_unitary(samples=10, seed=args.seed)
    lag = max(lagrangian_residual_frame(random_fixed_matrix(rng)) for _ in range(5))
    table = f_rho_table(3, boundary_rhos(2, 4))
    ratio = table.ratio
    return [
        _check("rp2", "equivariance", eq, args.tol or 1e-10),
        Check("rp2", "n1_fixed_set_unitary", unit.unitarity_residual, unit.tol, unit.passed),
        _check("rp2", "lagrangian_frame", lag, 1e-10),
        Check(
            "rp2",
            "f_rho_log_ratio_bounded",
            float(np.max(ratio)),
            np.inf,
            bool(np.all(np.isfinite(ratio)) and np.max(ratio) < 2 * ratio[0]),
            "ratios=" + ",".join(f"{r:.6f}" for r in ratio),
        ),
    ]


def _suite_dynamics(args, order):
    from .dynamics import geodesic_flow, hamiltonian_flow, random_state

    rng = np.random.default_rng(args.seed)
    state = random_state(rng)
    traj = geodesic_flow("l2", state, 0.25, 1e-3)
    e_drift, q_drift = traj.drift()
    ham = hamiltonian_flow("l2", lambda l: l * l / 2, lambda l: l, state.unitary, state.lamvec, 1.0)
    return [
        _check("dynamics", "energy_drift", e_drift, 1e-6, "T=0.25"),
        _check("dynamics", "charge_drift", q_drift, 1e-5, "T=0.25"),
        _check("dynamics", "hamiltonian_lambda_drift", np.ptp(np.linalg.norm(ham.lamvec, axis=1)), 1e-10),
        _check("dynamics", "hamiltonian_H_drift", np.ptp(ham.hamiltonian), 1e-10),
    ]


_SUITE_FUNCS = {
    "kaehler": _suite_kaehler,
    "constraints": _suite_constraints,
    "fs": _suite_fs,
    "limits": _suite_limits,
    "characters": _suite_characters,
    "rp2": _suite_rp2,
    "dynamics": _suite_dynamics,
}


def run_suites(names, args) -> dict:
    order = _order(args)
    checks = []
    for name in names:
        checks.extend(_SUITE_FUNCS[name](args, order))
    return {
        "version": __version__,
        "suites": list(names),
        "quadrature_order": order,
        "seed": args.seed,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }


def _suite_names(raw) -> list[str]:
    names = []
    for item in raw or ["all"]:
        for name in item.split(","):
            name = name.strip()
            if name == "all":
                names.extend(SUITES)
            elif name in SUITES:
                names.append(name)
            else:
                raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    return list(dict.fromkeys(names))


def cmd_verify(args) -> int:
    names = _suite_names(args.suite)
    _positive("--tol", args.tol)
    _positive("--step", args.step)
    report = run_suites(names, args)
    _emit(json.dumps(report, indent=2, sort_keys=True, default=float) + "\n", args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _load_init(text):
    from .dynamics import FlowState

    if text is None:
        return None
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return FlowState.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"bad --init state: {exc}") from exc


def cmd_geodesic(args) -> int:
    from .dynamics import geodesic_flow, random_state

    profile = _profile_name(args.profile)
    _positive("--dt", args.dt)
    state = _load_init(args.init) or random_state(np.random.default_rng(args.seed))
    traj = geodesic_flow(profile, state, args.T, args.dt, sample_every=args.sample_every)
    e_drift, q_drift = traj.drift()
    cfg = RunConfig("geodesic", profile, None, None, None, args.out, args.seed, {"T": args.T, "dt": args.dt})
    lines = cfg.header(
        **{k: v for k, v in traj.metadata.items() if k != "profile"},
        initial_state=state.to_json(),
        energy_drift=repr(e_drift),
        charge_drift=repr(q_drift),
        chart_switches=traj.chart_switches,
        rejected_steps=traj.rejected_steps,
    )
    traj.metadata = {}
    _emit(_with_header(lines, traj.to_csv()), args.out)
    return EXIT_OK


def cmd_hamiltonian(args) -> int:
    import csv
    import io

    from .dynamics import hamiltonian_flow, random_state

    profile = _profile_name(args.profile)
    state = _load_init(args.init) or random_state(np.random.default_rng(args.seed))
    p = args.power
    if p <= 0:
        raise UsageError("--power must be positive")
    traj = hamiltonian_flow(
        profile, lambda l: l**p / p, lambda l: l ** (p - 1), state.unitary, state.lamvec, args.T, args.samples
    )
    cfg = RunConfig("hamiltonian", profile, None, None, None, args.out, args.seed, {"T": args.T, "power": p})
    lines = cfg.header(hamiltonian=f"lambda^{p}/{p}", omega=repr(traj.omega), period=repr(traj.period))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "lam1", "lam2", "lam3", "u00_re", "u00_im", "u01_re", "u01_im", "H"])
    for t, lv, u, h in zip(traj.times, traj.lamvec, traj.unitaries, traj.hamiltonian):
        w.writerow([repr(float(x)) for x in (t, *lv, u[0, 0].real, u[0, 0].imag, u[0, 1].real, u[0, 1].imag, h)])
    _emit(_with_header(lines, buf.getvalue()), args.out)
    return EXIT_OK


def cmd_volume(args) -> int:
    from .global_geometry import GlobalReport

    profile = _profile_name(args.profile)
    report = GlobalReport.compute(profile, samples=args.samples, seed=args.seed)
    data = asdict(report)
    data["metadata"]["version"] = __version__
    data["metadata"]["config"] = {"profile": profile, "samples": args.samples, "seed": args.seed}
    ok = max(report.volume_ratios, default=0.0) < 0.5 and max(report.length_ratios, default=0.0) < 0.5
    data["converged"] = bool(ok)
    _emit(json.dumps(data, indent=2, sort_keys=True, default=float) + "\n", args.out)
    return EXIT_OK if ok else EXIT_ACCURACY


def _rho_values(args) -> np.ndarray:
    from .rp2 import boundary_rhos

    text = args.rho_grid
    if text.startswith("k:"):
        try:
            lo, hi = (int(x) for x in text[2:].split(","))
        except ValueError as exc:
            raise UsageError(f"bad --rho-grid {text!r}") from exc
        if hi < lo:
            raise UsageError("empty rho grid")
        return boundary_rhos(lo, hi)
    return GridSpec.parse(text).values()


def cmd_rp2(args) -> int:
    from .rp2 import f_rho_table, incompleteness_length

    order = _order(args)
    tol = _positive("--tol", args.tol) or 1e-8
    cfg = RunConfig("rp2", "l2", args.rho_grid, order, tol, args.out, args.seed, {"n": args.n})
    if args.length:
        result = incompleteness_length(args.n, kmax=args.kmax, order=order)
        lines = cfg.header(kmax=args.kmax)
        _emit(_with_header(lines, result.to_csv()), args.out)
        return EXIT_OK if result.converged else EXIT_ACCURACY
    table = f_rho_table(args.n, _rho_values(args), order=order, tol=tol)
    _emit(table.to_csv(header_lines=cfg.header()), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="l2moduli", description="Geometry of the L2 metric on spaces of rational maps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, profile=True):
        if profile:
            sp.add_argument("--profile", default="l2", help="coefficient profile: l2 or fs")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--order", type=int, help=f"quadrature order (default ${ORDER_ENV} or built-in)")
        sp.add_argument("--tol", type=float)

    t = sub.add_parser("tabulate", help="curvature functions on a lambda grid (CSV)")
    common(t)
    t.add_argument("--grid", default="0,10,101,lin", help="start,stop,count[,lin|log]")
    t.add_argument("--diagnostics", action="store_true", help="add asymptotic ratio columns")
    t.set_defaults(func=cmd_tabulate)

    v = sub.add_parser("verify", help="run verification suites (JSON report)")
    common(v, profile=False)
    v.add_argument("--suite", action="append", help=f"{', '.join(SUITES)} or all; repeatable or comma-separated")
    v.add_argument("--step", type=float, default=1e-4, help="finite-difference step for the kaehler suite")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("geodesic", help="integrate the geodesic flow (CSV)")
    common(g)
    g.add_argument("--init", help="initial state as JSON, or @file")
    g.add_argument("--T", type=float, default=1.0)
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("--sample-every", type=int, default=10)
    g.set_defaults(func=cmd_geodesic)

    h = sub.add_parser("hamiltonian", help="flow of H = lambda^p / p (CSV)")
    common(h)
    h.add_argument("--init", help="initial state as JSON, or @file")
    h.add_argument("--T", type=float, default=1.0)
    h.add_argument("--power", type=float, default=2.0)
    h.add_argument("--samples", type=int, default=101)
    h.set_defaults(func=cmd_hamiltonian)

    vol = sub.add_parser("volume", help="volume, length of the radial curve, diameter bound (JSON)")
    common(vol)
    vol.add_argument("--samples", type=int, default=20000, help="random rotations for the SO(3) diameter")
    vol.set_defaults(func=cmd_volume)

    r = sub.add_parser("rp2", help="f(rho) table or incompleteness length (CSV)")
    common(r, profile=False)
    r.add_argument("--n", type=int, default=3, help="odd degree >= 3")
    r.add_argument("--rho-grid", default="k:2,6", help="k:kmin,kmax for rho = 1 - 10^-k, or a grid spec")
    r.add_argument("--length", action="store_true", help="compute the incompleteness length instead")
    r.add_argument("--kmax", type=int, default=6)
    r.set_defaults(func=cmd_rp2)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except InvalidInputError as exc:
        print(f"l2moduli: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"l2moduli: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except L2ModuliError as exc:
        print(f"l2moduli: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
