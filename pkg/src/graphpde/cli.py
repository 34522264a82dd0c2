"""Command-line front end.

Exit codes: 0 success, 1 ``verify`` threshold exceeded, 2 bad input,
3 solver did not converge.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from .evolution import solve_schrodinger, solve_wave
from .expm import expm
from .generators import random_function
from .graph import (GraphError, GraphFunction, green_identity_residual, green_sides,
                    interior_green_sides, parse_document)
from .nonlinear import (ConvergenceError, GroundStateProblem, NlsProblem, nehari_functional,
                        solve_ground_state, solve_nls)
from .spectral import assemble, eigendecompose, schrodinger_kernel

EXIT_THRESHOLD = 1
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3


def fmt(x: float) -> str:
    x = float(x)
    if x == 0:
        x = 0.0  # no "-0"
    return format(x, ".15g")


def rnd(x: float) -> float:
    return float(fmt(x))


def sci(x: float) -> str:
    return format(float(x), ".3e")


@dataclass
class RunConfig:
    subcommand: str
    graph_path: str
    output_path: str | None = None
    times: list | None = None
    t_max: float | None = None
    samples: int = 10
    fmt: str = "table"
    options: dict = field(default_factory=dict)

    def time_grid(self) -> np.ndarray:
        if self.times:
            return np.array(sorted(self.times), dtype=float)
        if self.t_max is None:
            raise click.UsageError("give --times or --t-max")
        if self.samples < 1 or self.t_max < 0:
            raise click.UsageError("--samples must be >= 1 and --t-max >= 0")
        return np.linspace(0.0, self.t_max, self.samples + 1)


class Report:
    """Collects ordered table sections or a structured document."""

    def __init__(self, kind: str):
        self.kind = kind
        self.sections: list[tuple[str, list[str], list[list]]] = []
        self.meta: dict = {}

    def table(self, name, header, rows):
        self.sections.append((name, header, rows))

    def render(self) -> str:
        if self.kind == "structured":
            doc = dict(self.meta)
            for name, header, rows in self.sections:
                doc[name] = [dict(zip(header, (_jsonable(v) for v in r))) for r in rows]
            return json.dumps(doc, indent=2) + "\n"
        out = []
        for key, val in self.meta.items():
            out.append(f"# {key}: {val if isinstance(val, str) else fmt(val)}")
        for name, header, rows in self.sections:
            out.append(f"# {name}")
            out.append(",".join(header))
            for r in rows:
                out.append(",".join(v if isinstance(v, str) else fmt(v) for v in r))
        return "\n".join(out) + "\n"


def _jsonable(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    return rnd(v)


def _load(cfg: RunConfig):
    with open(cfg.graph_path, encoding="utf-8") as fh:
        return parse_document(fh.read())


def _trajectory_tables(rep: Report, traj, wave: bool = False):
    rows = []
    for t, u in zip(traj.times, traj.states):
        for v, z in zip(u.domain.closure, u.values):
            rows.append([t, v, z.real, z.imag])
    rep.table("trajectory", ["t", "vertex", "re", "im"], rows)
    header = ["t", "mass", "dirichlet_energy"] + (["wave_energy"] if wave else [])
    summary = []
    for t, c in zip(traj.times, traj.conserved):
        row = [t, c.mass, c.dirichlet_energy]
        if wave:
            row.append(c.wave_energy)
        summary.append(row)
    rep.table("summary", header, summary)


def _drifts(rep: Report, traj, names):
    rows = [[name, sci(traj.max_relative_drift(name))] for name in names]
    rep.table("conservation", ["quantity", "max_relative_drift"], rows)


def cmd_spectrum(cfg: RunConfig, rep: Report) -> int:
    domain, _ = _load(cfg)
    spec = eigendecompose(assemble(domain))
    rep.table("eigenvalues", ["j", "lambda"], [[str(j), lam] for j, lam in enumerate(spec.eigenvalues)])
    header = ["vertex"] + [f"phi_{j}" for j in range(spec.size)]
    rows = [[v] + list(spec.eigenvectors[k]) for k, v in enumerate(domain.interior)]
    rep.table("eigenvectors", header, rows)
    return 0


def _require_initial(extras, key="initial"):
    if key not in extras:
        raise GraphError(f"graph document has no '{key}' section")
    return extras[key]


def cmd_schrodinger(cfg: RunConfig, rep: Report) -> int:
    domain, extras = _load(cfg)
    f = _require_initial(extras)
    traj = solve_schrodinger(domain, f, cfg.time_grid())
    _trajectory_tables(rep, traj)
    _drifts(rep, traj, ["mass", "dirichlet_energy"])
    return 0


def cmd_wave(cfg: RunConfig, rep: Report) -> int:
    domain, extras = _load(cfg)
    f = _require_initial(extras)
    g = extras.get("initial_velocity", GraphFunction.zeros(domain))
    traj = solve_wave(domain, f, g, cfg.time_grid())
    _trajectory_tables(rep, traj, wave=True)
    _drifts(rep, traj, ["wave_energy"])
    return 0


def cmd_nls(cfg: RunConfig, rep: Report) -> int:
    domain, extras = _load(cfg)
    f = _require_initial(extras)
    times = cfg.time_grid()
    o = cfg.options
    horizon = o["T"] if o["T"] is not None else float(times[-1])
    if horizon <= 0:
        raise click.UsageError("horizon T must be positive")
    substep = o["substep"]
    try:
        prob = NlsProblem(domain, o["p"], f, horizon, picard_tol=o["picard_tol"],
                          max_picard_iters=o["max_picard_iters"], substep=substep)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    rep.meta.update(p=o["p"], T=horizon, substep=substep)
    traj = solve_nls(prob, times)
    _trajectory_tables(rep, traj)
    _drifts(rep, traj, ["mass"])
    return 0


def cmd_ground_state(cfg: RunConfig, rep: Report) -> int:
    domain, extras = _load(cfg)
    o = cfg.options
    try:
        prob = GroundStateProblem(domain, o["p"], extras.get("potential"), tol=o["tol"],
                                  max_iters=o["max_iters"], seed=o["seed"])
    except ValueError as exc:
        raise click.UsageError(str(exc))
    u = solve_ground_state(prob)
    r = nehari_functional(prob, u)
    rep.meta.update(p=o["p"], J=r.J, constraint_gap=r.constraint_gap, el_residual=r.el_residual)
    rep.table("ground_state", ["vertex", "u"],
              [[v, z.real] for v, z in zip(domain.interior, u.interior)])
    return 0


def cmd_verify(cfg: RunConfig, rep: Report) -> int:
    domain, _ = _load(cfg)
    o = cfg.options
    rng = np.random.default_rng(o["seed"])
    green = boundary = 0.0
    for _ in range(o["trials"]):
        f = random_function(rng, domain, dirichlet=False)
        g = random_function(rng, domain, dirichlet=False)
        lhs, _rhs = green_sides(f, g)
        green = max(green, green_identity_residual(f, g) / (1 + abs(lhs)))
        fd = random_function(rng, domain)
        lhs1, rhs1 = interior_green_sides(fd)
        boundary = max(boundary, abs(lhs1 - rhs1) / (1 + abs(lhs1)))

    lap = assemble(domain)
    spec = eigendecompose(lap)
    lam, phi = spec.eigenvalues, spec.eigenvectors
    scale = max(1.0, float(lam[-1]))
    eig_res = float(np.max(np.linalg.norm(lap.matrix @ phi - phi * lam, axis=0))) / scale
    ortho = float(np.max(np.abs(phi.T @ phi - np.eye(spec.size))))
    unitarity = oracle = 0.0
    for t in o["kernel_times"]:
        k = schrodinger_kernel(spec, t)
        unitarity = max(unitarity, float(np.max(np.abs(k @ k.conj().T - np.eye(spec.size)))))
        oracle = max(oracle, float(np.max(np.abs(k - expm(-1j * t * lap.matrix)))))

    checks = [
        ("green_identity", green, o["green_tol"]),
        ("green_boundary_form", boundary, o["green_tol"]),
        ("eigen_residual", eig_res, 1e-10),
        ("orthonormality", ortho, 1e-10),
        ("unitarity", unitarity, o["unitarity_tol"]),
        ("expm_agreement", oracle, 1e-9),
    ]
    rows = [[name, sci(value), sci(limit), "pass" if value <= limit else "FAIL"]
            for name, value, limit in checks]
    rows.append(["min_eigenvalue", sci(lam[0]), "> 0", "pass" if lam[0] > 0 else "FAIL"])
    ok = all(r[-1] == "pass" for r in rows)
    rep.table("verify", ["check", "value", "threshold", "status"], rows)
    return 0 if ok else EXIT_THRESHOLD


COMMANDS = {
    "spectrum": cmd_spectrum,
    "schrodinger": cmd_schrodinger,
    "wave": cmd_wave,
    "nls": cmd_nls,
    "ground-state": cmd_ground_state,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute one subcommand, write its report, and return the exit status."""
    rep = Report(cfg.fmt)
    try:
        status = COMMANDS[cfg.subcommand](cfg, rep)
    except (GraphError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except ConvergenceError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CONVERGENCE
    text = rep.render()
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    return status


# ---------------------------------------------------------------------------
# click wiring


def _parse_times(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of numbers")


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(["table", "structured"]),
                     default="table", show_default=True)(f)
    f = click.option("-o", "--output", "output", type=click.Path(dir_okay=False),
                     help="Write the report here instead of stdout.")(f)
    f = click.argument("graph", type=click.Path(exists=True, dir_okay=False))(f)
    return f


def _timed(f):
    f = click.option("--samples", type=int, default=10, show_default=True,
                     help="Uniform samples after t=0 when --t-max is used.")(f)
    f = click.option("--t-max", type=float, help="Final time of a uniform grid.")(f)
    f = click.option("--times", callback=_parse_times, help="Comma-separated sample times.")(f)
    return f


def _exit(cfg):
    sys.exit(run(cfg))


@click.group()
def main():
    """Schrödinger, wave and nonlinear flows on finite graphs with Dirichlet boundary."""


@main.command()
@_common
def spectrum(graph, output, fmt):
    """Eigenvalues and eigenvectors of the Dirichlet Laplacian."""
    _exit(RunConfig("spectrum", graph, output, fmt=fmt))


@main.command()
@_common
@_timed
def schrodinger(graph, output, fmt, times, t_max, samples):
    """Linear Schrödinger flow of the document's initial data."""
    _exit(RunConfig("schrodinger", graph, output, times, t_max, samples, fmt))


@main.command()
@_common
@_timed
def wave(graph, output, fmt, times, t_max, samples):
    """Wave equation with initial position and velocity from the document."""
    _exit(RunConfig("wave", graph, output, times, t_max, samples, fmt))


@main.command()
@_common
@_timed
@click.option("--p", "p", type=float, default=3.0, show_default=True, help="Nonlinearity exponent.")
@click.option("--T", "T", type=float, help="Horizon; defaults to the last sample time.")
@click.option("--substep", type=float, default=0.01, show_default=True)
@click.option("--picard-tol", type=float, default=1e-12, show_default=True)
@click.option("--max-picard-iters", type=int, default=50, show_default=True)
def nls(graph, output, fmt, times, t_max, samples, **opts):
    """Nonlinear Schrödinger flow by Duhamel-Picard substeps."""
    _exit(RunConfig("nls", graph, output, times, t_max, samples, fmt, opts))


@main.command("ground-state")
@_common
@click.option("--p", "p", type=float, default=3.0, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-iters", type=int, default=20000, show_default=True)
def ground_state(graph, output, fmt, **opts):
    """Positive Nehari ground state; the potential comes from the document."""
    _exit(RunConfig("ground-state", graph, output, fmt=fmt, options=opts))


@main.command()
@_common
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--green-tol", type=float, default=1e-12, show_default=True)
@click.option("--unitarity-tol", type=float, default=1e-10, show_default=True)
def verify(graph, output, fmt, **opts):
    """Check summation by parts, the spectrum and kernel unitarity with seeded data."""
    opts["kernel_times"] = (0.1, 1.0, 5.0)
    _exit(RunConfig("verify", graph, output, fmt=fmt, options=opts))


if __name__ == "__main__":
    main()
