"""Nonlinear Schrödinger flow and Nehari ground states on a graph domain.

The NLS ``i u_t + Δu = κ|u|^{p-1}u`` is advanced by Picard iteration on its
Duhamel form

    u(τ) = S_τ u0 - i ∫_0^τ S_{τ-s} N(u(s)) ds,

restarted at the end of every substep.  Ground states of
``-Δu + Vu = |u|^{p-1}u`` are found by minimising the action over the Nehari
manifold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import Conserved, Trajectory, _check_initial
from .graph import Domain, GraphFunction, dirichlet_energy, mass_norm_sq
from .spectral import Spectrum, assemble, spectrum_of

SUBNODES = 8


class ConvergenceError(RuntimeError):
    """An iterative solver stopped without meeting its tolerance."""


class PicardDivergenceError(ConvergenceError):
    def __init__(self, message, ratio, interval=None):
        super().__init__(message)
        self.ratio = ratio
        self.interval = interval


@dataclass(frozen=True)
class NlsProblem:
    domain: Domain
    p: float
    initial: GraphFunction
    horizon: float
    picard_tol: float = 1e-12
    max_picard_iters: int = 50
    substep: float = 0.01
    # 0 switches the nonlinearity off (linear flow)
    coupling: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"nonlinearity exponent must exceed 1, got {self.p}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.substep <= self.horizon:
            raise ValueError("substep must lie in (0, horizon]")
        if self.max_picard_iters < 1:
            raise ValueError("max_picard_iters must be at least 1")
        _check_initial(self.domain, self.initial, "initial datum")


def _cumulative_weights(m: int = SUBNODES) -> np.ndarray:
    """Row ``k`` integrates over ``[0, s_k]`` on ``m + 1`` unit-spaced nodes.

    Even ``k`` uses composite Simpson, odd ``k >= 3`` finishes with the 3/8
    rule, and ``k = 1`` integrates the cubic through nodes 0..3, so every row
    is exact for cubics.
    """
    w = np.zeros((m + 1, m + 1))
    simpson = np.array([1.0, 4.0, 1.0]) / 3.0
    for k in range(1, m + 1):
        if k == 1:
            w[1, :4] = np.array([9.0, 19.0, -5.0, 1.0]) / 24.0
            continue
        even = k if k % 2 == 0 else k - 3
        for a in range(0, even, 2):
            w[k, a:a + 3] += simpson
        if k % 2:
            w[k, k - 3:k + 1] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 / 8.0
    return w


_WEIGHTS = _cumulative_weights()


def nonlinearity(u: np.ndarray, p: float) -> np.ndarray:
    return np.abs(u) ** (p - 1) * u


@dataclass
class PicardStep:
    """Outcome of one Duhamel substep.

    ``nodes`` holds the interior state at the quadrature nodes (last row is the
    end of the substep); ``gaps`` are successive sup-differences of the iterates.
    """

    tau: float
    nodes: np.ndarray
    gaps: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.gaps)

    @property
    def ratios(self) -> list[float]:
        g = self.gaps
        return [g[k] / g[k - 1] for k in range(1, len(g)) if g[k - 1] > 0]


def picard_substep(spec: Spectrum, prob: NlsProblem, u0: np.ndarray, tau: float,
                   t0: float = 0.0) -> PicardStep:
    """Picard iteration for the Duhamel equation on ``[t0, t0 + tau]``.

    ``u0`` holds interior values.  Raises :class:`PicardDivergenceError` when
    the iterates fail to settle within ``max_picard_iters``.
    """
    lam = spec.eigenvalues
    phi = spec.eigenvectors
    s = np.linspace(0.0, tau, SUBNODES + 1)
    h = tau / SUBNODES
    fwd = np.exp(-1j * np.outer(s, lam))
    back = np.conj(fwd)
    c0 = phi.T @ u0
    nodes = (fwd * c0) @ phi.T
    step = PicardStep(tau, nodes)
    if prob.coupling == 0:
        return step

    last_ratio = float("nan")
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(prob.max_picard_iters):
            forcing = prob.coupling * nonlinearity(nodes, prob.p)
            integral = h * (_WEIGHTS @ (back * (forcing @ phi)))
            new = (fwd * (c0 - 1j * integral)) @ phi.T
            gap = float(np.max(np.linalg.norm(new - nodes, axis=1)))
            if step.gaps and step.gaps[-1] > 0:
                last_ratio = gap / step.gaps[-1]
            step.gaps.append(gap)
            nodes = new
            if not np.isfinite(gap):
                break
            scale = max(1.0, float(np.max(np.linalg.norm(nodes, axis=1))))
            if gap <= prob.picard_tol * scale:
                step.nodes = nodes
                return step
    interval = (t0, t0 + tau)
    raise PicardDivergenceError(
        f"Picard iteration did not converge on [{t0:.6g}, {t0 + tau:.6g}] after "
        f"{len(step.gaps)} iterations (last contraction ratio {last_ratio:.3g}); "
        f"reduce the substep",
        ratio=last_ratio, interval=interval,
    )


def duhamel_picard(prob: NlsProblem, t0: float, f0: GraphFunction, tau: float,
                   spectrum: Spectrum | None = None) -> GraphFunction:
    """Advance ``f0`` by ``tau`` (at most one substep) through the Duhamel fixed point."""
    if tau > prob.substep * (1 + 1e-12):
        raise ValueError(f"tau={tau} exceeds the substep {prob.substep}")
    _check_initial(prob.domain, f0, "substep datum")
    spec = spectrum if spectrum is not None else spectrum_of(prob.domain)
    step = picard_substep(spec, prob, f0.interior, tau, t0)
    return GraphFunction.from_interior(prob.domain, step.nodes[-1])


def solve_nls(prob: NlsProblem, times, spectrum: Spectrum | None = None,
              steps: list | None = None) -> Trajectory:
    """Sample the NLS solution at ascending ``times`` inside ``[0, horizon]``.

    If ``steps`` is a list, every :class:`PicardStep` taken is appended to it.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        raise ValueError("at least one sample time is required")
    if np.any(np.diff(times) < 0):
        raise ValueError("sample times must be ascending")
    if times[0] < 0 or times[-1] > prob.horizon * (1 + 1e-12):
        raise ValueError(f"sample times must lie in [0, {prob.horizon}]")
    spec = spectrum if spectrum is not None else spectrum_of(prob.domain)

    u = prob.initial.interior.copy()
    t = 0.0
    states = []
    for target in times:
        span = target - t
        if span > 0:
            n = max(1, math.ceil(span / prob.substep - 1e-9))
            h = span / n
            for k in range(n):
                step = picard_substep(spec, prob, u, h, t + k * h)
                u = step.nodes[-1]
                if steps is not None:
                    steps.append(step)
            t = float(target)
        if t == 0 and target == 0:
            states.append(GraphFunction(prob.domain, prob.initial.values.copy()))
        else:
            states.append(GraphFunction.from_interior(prob.domain, u))
    conserved = [Conserved(mass_norm_sq(f), dirichlet_energy(f)) for f in states]
    return Trajectory(times, states, conserved)


# ---------------------------------------------------------------------------
# ground states


@dataclass(frozen=True, eq=False)
class GroundStateProblem:
    domain: Domain
    p: float
    potential: np.ndarray | None = None
    tol: float = 1e-10
    max_iters: int = 20000
    seed: int = 0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"nonlinearity exponent must exceed 1, got {self.p}")
        n = self.domain.n_interior
        v = self.potential
        if v is None:
            v = np.zeros(n)
        elif isinstance(v, GraphFunction):
            if np.any(v.interior.imag):
                raise ValueError("potential must be real")
            v = v.interior.real.copy()
        else:
            v = np.asarray(v, dtype=float).copy()
        if v.shape != (n,):
            raise ValueError(f"potential needs {n} interior values, got shape {v.shape}")
        if np.any(v < 0):
            raise ValueError("potential must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "potential", v)

    def operator(self) -> np.ndarray:
        """``-Δ + V`` on interior values."""
        return assemble(self.domain).matrix + np.diag(self.potential)


@dataclass(frozen=True)
class NehariReport:
    J: float
    constraint_gap: float
    el_residual: float
    quadratic: float


def _interior(u) -> np.ndarray:
    return u.interior if isinstance(u, GraphFunction) else np.asarray(u)


def _quadratic(a: np.ndarray, u: np.ndarray) -> float:
    return float(np.real(np.vdot(u, a @ u)))


def nehari_functional(prob: GroundStateProblem, u, operator: np.ndarray | None = None) -> NehariReport:
    """Action, Nehari constraint gap and Euler-Lagrange residual of ``u``.

    ``J(u) = q(u)/2 - Σ|u|^{p+1}/(p+1)`` with ``q(u) = uᵀ(-Δ+V)u``, where the
    Laplacian quadratic form counts every edge once.
    """
    a = prob.operator() if operator is None else operator
    u = _interior(u)
    q = _quadratic(a, u)
    power = float(np.sum(np.abs(u) ** (prob.p + 1)))
    J = 0.5 * q - power / (prob.p + 1)
    residual = a @ u - nonlinearity(u, prob.p)
    el = float(np.max(np.abs(residual))) if u.size else 0.0
    return NehariReport(J, q - power, el, q)


def ray_scale(prob: GroundStateProblem, u, operator: np.ndarray | None = None) -> float:
    """Factor ``t`` with ``t·u`` on the Nehari manifold."""
    a = prob.operator() if operator is None else operator
    u = _interior(u)
    q = _quadratic(a, u)
    power = float(np.sum(np.abs(u) ** (prob.p + 1)))
    if power == 0:
        raise ValueError("cannot project the zero function onto the Nehari manifold")
    return (q / power) ** (1.0 / (prob.p - 1))


def probe_battery(prob: GroundStateProblem, operator: np.ndarray | None = None) -> list[np.ndarray]:
    """Vertex deltas and the principal eigenvector, each scaled onto the manifold."""
    a = prob.operator() if operator is None else operator
    n = prob.domain.n_interior
    probes = [np.eye(n)[k] for k in range(n)]
    _, vecs = np.linalg.eigh(a)
    probes.append(np.abs(vecs[:, 0]))
    return [ray_scale(prob, v, a) * v for v in probes]


def _descend(prob, a, u, tol, max_iters):
    """Projected gradient descent on the Nehari manifold within the positive cone.

    Switches to Newton's method on the Euler-Lagrange equation once the
    residual is small; a Newton result is accepted only if it stays positive
    and does not raise the action.
    """
    p = prob.p
    alpha = 1.0 / (np.linalg.norm(a, 2) + 1.0)
    rep = nehari_functional(prob, u, a)
    switch = 1e-3 * max(1.0, float(np.max(u)) ** p)
    iters = 0
    while iters < max_iters:
        if rep.el_residual <= switch:
            cand = _newton(prob, a, u, tol)
            if cand is not None:
                crep = nehari_functional(prob, cand, a)
                if crep.J <= rep.J + 1e-9 * max(1.0, abs(rep.J)):
                    return cand, crep, iters
            switch *= 0.1
        grad = a @ u - u ** p
        gsq = float(grad @ grad)
        while True:
            trial = np.abs(u - alpha * grad)
            if np.any(trial > 0):
                trial = ray_scale(prob, trial, a) * trial
                trep = nehari_functional(prob, trial, a)
                if trep.J <= rep.J - 1e-4 * alpha * gsq:
                    break
            alpha *= 0.5
            if alpha < 1e-300:
                return u, rep, iters
        u, rep = trial, trep
        alpha *= 2.0
        iters += 1
    return u, rep, iters


def _newton(prob, a, u, tol, max_steps=30):
    p = prob.p
    u = u.copy()
    for _ in range(max_steps):
        res = a @ u - u ** p
        if np.max(np.abs(res)) <= 1e-3 * tol:
            break
        jac = a - p * np.diag(u ** (p - 1))
        try:
            u = u - np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            return None
        if not np.all(u > 0):
            return None
    u = ray_scale(prob, u, a) * u
    rep = nehari_functional(prob, u, a)
    if rep.el_residual > tol or not np.all(u > 0):
        return None
    return u


def solve_ground_state(prob: GroundStateProblem) -> GraphFunction:
    """Positive minimiser of the action over the Nehari manifold.

    Starts from a seeded random positive vector; if any probe from
    :func:`probe_battery` has a lower action than the result, the descent is
    rerun from that probe and the best state kept.
    """
    a = prob.operator()
    n = prob.domain.n_interior
    rng = np.random.default_rng(prob.seed)
    start = rng.uniform(0.5, 1.5, n)
    start = ray_scale(prob, start, a) * start

    best, rep, _ = _descend(prob, a, start, prob.tol, prob.max_iters)
    tried = set()
    while True:
        probes = probe_battery(prob, a)
        lower = [k for k, v in enumerate(probes)
                 if k not in tried and nehari_functional(prob, v, a).J < rep.J - 1e-12]
        if not lower:
            break
        k = lower[0]
        tried.add(k)
        cand, crep, _ = _descend(prob, a, probes[k], prob.tol, prob.max_iters)
        if crep.el_residual <= prob.tol and crep.J < rep.J:
            best, rep = cand, crep

    scale = max(1.0, rep.quadratic)
    if not (rep.el_residual <= prob.tol and abs(rep.constraint_gap) <= prob.tol * scale
            and np.all(best > 0)):
        raise ConvergenceError(
            f"ground-state search stopped with Euler-Lagrange residual {rep.el_residual:.3e} "
            f"(tolerance {prob.tol:.1e})"
        )
    return GraphFunction.from_interior(prob.domain, best)
