"""Scenario execution, artifact writing, and study drivers.

Exit-code contract (documented in the README):
    0  success
    2  usage error (bad flags, too few refinement levels, unknown preset)
    3  configuration error (parse failure, unknown/missing key, invariant)
    4  I/O failure writing artifacts
    5  solver abort (non-finite state or negativity beyond tolerance)
    6  incompatible request (e.g. the drug-addiction functional below
       threshold, where that equilibrium does not exist)
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..errors import (
    ConfigError,
    DomainError,
    NoEndemicEquilibriumError,
    SchrkitError,
)
from ..kinetics import (
    EquilibriumPoint,
    Model,
    ModelParams,
    drug_free_equilibrium,
    effective_threshold_extended,
    endemic_equilibrium_basic,
    endemic_equilibrium_extended,
    r0_basic,
    r0_extended,
)
from ..rdsolver import (
    Trajectory,
    get_backend,
    integrate,
    spatial_order_study,
    steady_state_residual,
    temporal_order_study,
)
from ..stability import (
    DEFAULT_JMAX,
    StabilityReport,
    choose_alphas,
    classify,
    dissipation_report,
    neumann_modes,
)
from .scenario import Scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_ABORT = 5
EXIT_INCOMPATIBLE = 6


def _fmt(x: float) -> str:
    """Floating-point cell format: 17 significant digits."""
    return f"{x:.17g}"


def _out_dir(s: Scenario) -> Path:
    return s.out_dir if s.out_dir is not None else Path.cwd()


def threshold_value(p: ModelParams, model: Model) -> float:
    """The quantity governing which attractor a run settles on."""
    return r0_basic(p) if model is Model.BASIC else effective_threshold_extended(p)


def compute_equilibria(p: ModelParams, model: Model):
    """Drug-free point plus the drug-addiction point when it exists."""
    e_free = drug_free_equilibrium(p, model)
    try:
        if model is Model.BASIC:
            e_star = endemic_equilibrium_basic(p)
        else:
            e_star = endemic_equilibrium_extended(p)
    except NoEndemicEquilibriumError:
        e_star = None
    return e_free, e_star


# ---------------------------------------------------------------------------
# Artifact writers.

def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    labels = traj.config.model.labels
    x = traj.config.grid.nodes
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x," + ",".join(labels) + "\n")
        for t, fld in zip(traj.times, traj.fields):
            for j in range(len(x)):
                row = [_fmt(t), _fmt(x[j])]
                row += [_fmt(fld.data[i, j]) for i in range(len(labels))]
                fh.write(",".join(row) + "\n")


def write_diagnostics_csv(path: Path, traj: Trajectory) -> None:
    labels = traj.config.model.labels
    header = (["t"] + [f"mass_{c}" for c in labels]
              + ["min_value", "steady_residual"])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i, t in enumerate(traj.times):
            row = [_fmt(t)]
            row += [_fmt(m) for m in traj.masses[i]]
            row += [_fmt(traj.min_values[i]), _fmt(traj.residuals[i])]
            fh.write(",".join(row) + "\n")


def write_lyapunov_csv(path: Path, trace) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,value,slope\n")
        n = len(trace.times)
        for i in range(n):
            slope = _fmt(trace.slopes[i]) if i < n - 1 else ""
            fh.write(f"{_fmt(trace.times[i])},{_fmt(trace.values[i])},{slope}\n")


def _report_lines(report: StabilityReport) -> list[str]:
    lines = [
        f"equilibrium: {report.kind}",
        f"model: {report.model.value}",
        f"r0: {_fmt(report.r0)}",
    ]
    if report.r0_effective is not None:
        lines.append(f"effective_threshold: {_fmt(report.r0_effective)}")
        if not math.isclose(report.r0_effective, report.r0, rel_tol=1e-9):
            lines.append(
                "note: effective invasion threshold differs from the "
                "first-passage reproduction number (treatment return flow "
                "mu2 > 0); the verdict follows the effective threshold.")
    lines += [
        f"verdict: {report.verdict}",
        f"max_real_part: {_fmt(report.max_real_part)}",
        f"modes: {len(report.modes)}",
    ]
    return lines


def write_stability_text(path: Path, report: StabilityReport) -> None:
    lines = _report_lines(report)
    lines.append("")
    lines.append("mode  lambda_j        roots (real+imag j)")
    for mr in report.modes:
        roots = "  ".join(f"{r.real:+.10g}{r.imag:+.10g}j" for r in mr.roots)
        lines.append(f"{mr.mode_index:>4}  {mr.lambda_j:<14.10g}  {roots}")
        if mr.alpha1 is not None:
            lines.append(f"      alpha1={_fmt(mr.alpha1)} alpha2={_fmt(mr.alpha2)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_stability_kv(path: Path, report: StabilityReport) -> None:
    lines = [
        f"equilibrium={report.kind}",
        f"model={report.model.value}",
        f"r0={_fmt(report.r0)}",
        f"verdict={report.verdict}",
        f"max_real_part={_fmt(report.max_real_part)}",
        f"n_modes={len(report.modes)}",
    ]
    if report.r0_effective is not None:
        lines.insert(3, f"effective_threshold={_fmt(report.r0_effective)}")
    for mr in report.modes:
        prefix = f"mode.{mr.mode_index}"
        lines.append(f"{prefix}.lambda={_fmt(mr.lambda_j)}")
        for k, r in enumerate(mr.roots):
            lines.append(f"{prefix}.root.{k}.re={_fmt(r.real)}")
            lines.append(f"{prefix}.root.{k}.im={_fmt(r.imag)}")
        if mr.alpha1 is not None:
            lines.append(f"{prefix}.alpha1={_fmt(mr.alpha1)}")
            lines.append(f"{prefix}.alpha2={_fmt(mr.alpha2)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_plot_script(path: Path, s: Scenario) -> None:
    """gnuplot script reproducing the time-series panels from the CSVs."""
    labels = s.config.model.labels
    diag = f"{s.name}.diagnostics.csv"
    cols = ", ".join(
        f"'{diag}' using 1:{i + 2} with lines title '{c}'"
        for i, c in enumerate(labels))
    text = (
        "# gnuplot script: per-compartment population mass over time\n"
        "set datafile separator ','\n"
        f"set title '{s.name}'\n"
        "set xlabel 't'\n"
        "set ylabel 'integrated density'\n"
        "set key outside\n"
        f"plot {cols}\n"
    )
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands.

def resolve_lyapunov_choice(s: Scenario, choice: str | None = None) -> str:
    """'auto' picks the functional matching the model and regime."""
    if choice is None:
        choice = s.lyapunov
    if choice != "auto":
        return choice
    p, model = s.config.params, s.config.model
    above = threshold_value(p, model) > 1.0
    if model is Model.BASIC:
        return "g2" if above else "g1"
    return "extended-endemic" if above else "extended-free"


def _summary(s: Scenario, traj: Trajectory, e_free, e_star) -> str:
    p, model = s.config.params, s.config.model
    lines = [
        f"scenario {s.name} ({model.value} model, backend {traj.backend})",
        f"  r0 = {r0_basic(p) if model is Model.BASIC else r0_extended(p):.10g}",
    ]
    if model is Model.EXTENDED:
        lines.append(
            f"  effective threshold = {effective_threshold_extended(p):.10g}")
    lines.append(f"  drug-free equilibrium: {tuple(e_free.point.values)}")
    if e_star is not None:
        vals = ", ".join(f"{v:.6f}" for v in e_star.point.values)
        lines.append(f"  drug-addiction equilibrium: ({vals})")
    else:
        lines.append("  drug-addiction equilibrium: absent (below threshold)")
    lines += [
        f"  termination: {traj.termination} at t = {traj.times[-1]:g}",
        f"  final steady-state residual = {traj.residuals[-1]:.3e}",
        f"  min value seen (pre-clamp) = {traj.min_seen:.3e}",
    ]
    if traj.abort_reason:
        lines.append(f"  ABORT: {traj.abort_reason}")
    return "\n".join(lines)


def run(s: Scenario, threads: int = 1) -> int:
    """Integrate a scenario and write its requested artifacts.

    threads only affects the per-mode root computations of an embedded
    stability report; the integration itself is sequential.
    """
    out = _out_dir(s)
    p, model = s.config.params, s.config.model
    try:
        e_free, e_star = compute_equilibria(p, model)
        traj = integrate(s.config)
    except SchrkitError as exc:
        print(f"error: {exc}")
        return EXIT_CONFIG

    try:
        out.mkdir(parents=True, exist_ok=True)
        if "trajectory" in s.outputs:
            write_trajectory_csv(out / f"{s.name}.trajectory.csv", traj)
        if "diagnostics" in s.outputs:
            write_diagnostics_csv(out / f"{s.name}.diagnostics.csv", traj)
            write_plot_script(out / f"{s.name}.plot.gp", s)
        if "stability" in s.outputs:
            code = stability_report_cmd(s, threads=threads)
            if code != EXIT_OK:
                return code
        if "lyapunov" in s.outputs:
            code = lyapunov_cmd(s, resolve_lyapunov_choice(s), traj=traj)
            if code != EXIT_OK:
                return code
        if traj.termination == "aborted":
            (out / f"{s.name}.ABORTED").write_text(
                (traj.abort_reason or "aborted") + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"i/o error: {exc}")
        return EXIT_IO

    print(_summary(s, traj, e_free, e_star))
    return EXIT_ABORT if traj.termination == "aborted" else EXIT_OK


def stability_report_cmd(s: Scenario, j_max: int = DEFAULT_JMAX,
                         threads: int = 1) -> int:
    """Classify the drug-free point, and the drug-addiction point when it
    exists, across modes 0..j_max; write text and key-value reports."""
    out = _out_dir(s)
    p, model = s.config.params, s.config.model
    try:
        modes = neumann_modes(s.config.grid.length, j_max)
        e_free, e_star = compute_equilibria(p, model)
        reports = [("drug-free", classify(p, e_free, modes, model, threads))]
        if e_star is not None:
            reports.append(
                ("drug-addiction", classify(p, e_star, modes, model, threads)))
    except SchrkitError as exc:
        print(f"error: {exc}")
        return EXIT_CONFIG

    try:
        out.mkdir(parents=True, exist_ok=True)
        for tag, report in reports:
            stem = f"{s.name}.stability.{tag}"
            write_stability_text(out / f"{stem}.txt", report)
            write_stability_kv(out / f"{stem}.kv", report)
            print(f"{s.name}: {tag} equilibrium is {report.verdict} "
                  f"(max real part {report.max_real_part:.6g})")
        if e_star is None:
            print(f"{s.name}: drug-addiction equilibrium absent "
                  f"(threshold {threshold_value(p, model):.6g} <= 1)")
    except OSError as exc:
        print(f"i/o error: {exc}")
        return EXIT_IO
    return EXIT_OK


def lyapunov_cmd(s: Scenario, functional: str,
                 traj: Trajectory | None = None) -> int:
    """Evaluate a Lyapunov functional along the scenario trajectory and
    export the trace."""
    out = _out_dir(s)
    p, model = s.config.params, s.config.model
    functional = resolve_lyapunov_choice(s, functional)
    if functional == "none":
        print("error: no functional requested")
        return EXIT_USAGE

    try:
        kwargs = {}
        if functional == "g2":
            kwargs["equilibrium"] = endemic_equilibrium_basic(p)
        elif functional == "extended-endemic":
            kwargs["equilibrium"] = endemic_equilibrium_extended(p)
        elif functional == "extended-free":
            alphas = choose_alphas(p)
            if alphas is None:
                raise DomainError(
                    "no feasible drug-free weights for these parameters "
                    "(invasion threshold not below one)")
            kwargs["alphas"] = alphas
    except NoEndemicEquilibriumError as exc:
        print(f"error: {exc}")
        return EXIT_INCOMPATIBLE
    except SchrkitError as exc:
        print(f"error: {exc}")
        return EXIT_INCOMPATIBLE

    try:
        if traj is None:
            traj = integrate(s.config)
        trace = dissipation_report(traj, functional, **kwargs)
    except SchrkitError as exc:
        print(f"error: {exc}")
        return EXIT_CONFIG

    try:
        out.mkdir(parents=True, exist_ok=True)
        write_lyapunov_csv(out / f"{s.name}.lyapunov.{functional}.csv", trace)
    except OSError as exc:
        print(f"i/o error: {exc}")
        return EXIT_IO

    frac = trace.fraction_nonpositive()
    print(f"{s.name}: {functional} nonpositive-slope fraction = {frac:.4f} "
          f"({len(trace.flagged)} flagged samples)")
    return EXIT_OK


def convergence_study_cmd(kind: str, levels, out_dir,
                          d: float = 0.1, length: float = 2.0,
                          mx: int = 40, dt: float = 5e-6) -> int:
    """Manufactured-solution refinement study; writes one CSV."""
    if len(levels) < 3:
        print("error: need at least 3 refinement levels")
        return EXIT_USAGE
    try:
        if kind == "spatial":
            study = spatial_order_study(
                tuple(int(v) for v in levels), d=d, length=length, dt=dt)
        elif kind == "temporal":
            study = temporal_order_study(
                tuple(float(v) for v in levels), d=d, length=length, mx=mx)
        else:
            print(f"error: unknown study kind {kind!r}")
            return EXIT_USAGE
    except SchrkitError as exc:
        print(f"error: {exc}")
        return EXIT_CONFIG

    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"convergence.{kind}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("level,sup_error,observed_order\n")
            for i, (lvl, err) in enumerate(zip(study.levels, study.errors)):
                order = _fmt(study.orders[i - 1]) if i > 0 else ""
                fh.write(f"{_fmt(lvl)},{_fmt(err)},{order}\n")
    except OSError as exc:
        print(f"i/o error: {exc}")
        return EXIT_IO

    orders = ", ".join(f"{o:.3f}" for o in study.orders)
    print(f"{kind} study: observed orders {orders}")
    return EXIT_OK
