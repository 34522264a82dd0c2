"""Exact spectral solutions of the linear Schrödinger and wave equations.

Every sample time is evaluated directly from the eigen-coefficients of the
initial data, so there is no time stepping and no accumulated error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import GraphError, GraphFunction, Domain, dirichlet_energy, mass_norm_sq
from .spectral import Spectrum, spectrum_of


class InitialDataError(GraphError):
    """Initial data that violate the boundary condition or domain."""


@dataclass(frozen=True)
class Conserved:
    mass: float
    dirichlet_energy: float
    wave_energy: float | None = None


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[GraphFunction]
    conserved: list[Conserved]
    velocities: list[GraphFunction] | None = None

    def max_relative_drift(self, name: str) -> float:
        vals = np.array([getattr(c, name) for c in self.conserved], dtype=float)
        ref = vals[0]
        return float(np.max(np.abs(vals - ref)) / max(1.0, abs(ref)))


def _check_initial(domain: Domain, f: GraphFunction, what: str):
    if f.domain is not domain and f.domain != domain:
        raise InitialDataError(f"{what} is defined on a different domain")
    if not f.is_dirichlet():
        raise InitialDataError(f"{what} does not vanish on the boundary")


def _spectrum_for(domain: Domain, spectrum: Spectrum | None) -> Spectrum:
    if spectrum is None:
        return spectrum_of(domain)
    if spectrum.domain is not domain and spectrum.domain != domain:
        raise GraphError("spectrum belongs to a different domain")
    return spectrum


@dataclass
class SchrodingerFlow:
    """``u(t) = Σ_j c_j e^{-iλ_j t} φ_j`` for fixed initial data."""

    spectrum: Spectrum
    initial: GraphFunction
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.coeffs = self.spectrum.coefficients(self.initial)

    def _phased(self, t):
        return self.coeffs * np.exp(-1j * self.spectrum.eigenvalues * t)

    def state(self, t: float) -> GraphFunction:
        if t == 0:
            return GraphFunction(self.initial.domain, self.initial.values.copy())
        return GraphFunction.from_interior(
            self.spectrum.domain, self.spectrum.synthesize(self._phased(t)))

    def time_derivative(self, t: float) -> GraphFunction:
        d = -1j * self.spectrum.eigenvalues * self._phased(t)
        return GraphFunction.from_interior(self.spectrum.domain, self.spectrum.synthesize(d))


@dataclass
class WaveFlow:
    """``u(t) = Σ_j [a_j cos(ω_j t) + b_j sin(ω_j t)/ω_j] φ_j`` with ``ω_j = √λ_j``."""

    spectrum: Spectrum
    position: GraphFunction
    velocity: GraphFunction
    a: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.a = self.spectrum.coefficients(self.position)
        self.b = self.spectrum.coefficients(self.velocity)
        self.omega = np.sqrt(np.maximum(self.spectrum.eigenvalues, 0.0))

    def _sinc_term(self, t):
        # sin(ωt)/ω → t as ω → 0
        w = self.omega
        out = np.full_like(w, float(t))
        nz = w > 0
        out[nz] = np.sin(w[nz] * t) / w[nz]
        return out

    def _fn(self, coeffs):
        return GraphFunction.from_interior(self.spectrum.domain, self.spectrum.synthesize(coeffs))

    def state(self, t: float) -> GraphFunction:
        return self._fn(self.a * np.cos(self.omega * t) + self.b * self._sinc_term(t))

    def velocity_at(self, t: float) -> GraphFunction:
        w = self.omega
        return self._fn(-self.a * w * np.sin(w * t) + self.b * np.cos(w * t))

    def acceleration(self, t: float) -> GraphFunction:
        lam = self.spectrum.eigenvalues
        return self._fn(-lam * (self.a * np.cos(self.omega * t) + self.b * self._sinc_term(t)))


def _as_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        raise ValueError("at least one sample time is required")
    if not np.all(np.isfinite(times)):
        raise ValueError("sample times must be finite")
    return times


def solve_schrodinger(domain: Domain, f: GraphFunction, times, spectrum: Spectrum | None = None) -> Trajectory:
    """Sample the solution of ``i u_t + Δu = 0``, ``u(0) = f``."""
    _check_initial(domain, f, "initial datum")
    times = _as_times(times)
    flow = SchrodingerFlow(_spectrum_for(domain, spectrum), f)
    states = [flow.state(t) for t in times]
    conserved = [Conserved(mass_norm_sq(u), dirichlet_energy(u)) for u in states]
    return Trajectory(times, states, conserved)


def wave_energy(u: GraphFunction, ut: GraphFunction) -> float:
    """``Σ_edges |∇u|² + Σ|u_t|²`` with every undirected edge counted once.

    Counting edges twice (the ordered-pair Dirichlet energy) would weight the
    potential term double and the sum would no longer be conserved.
    """
    return 0.5 * dirichlet_energy(u) + mass_norm_sq(ut)


def solve_wave(domain: Domain, f: GraphFunction, g: GraphFunction, times,
               spectrum: Spectrum | None = None) -> Trajectory:
    """Sample the solution of ``u_tt = Δu`` with ``u(0) = f``, ``u_t(0) = g``."""
    _check_initial(domain, f, "initial position")
    _check_initial(domain, g, "initial velocity")
    times = _as_times(times)
    flow = WaveFlow(_spectrum_for(domain, spectrum), f, g)
    states = [flow.state(t) for t in times]
    velocities = [flow.velocity_at(t) for t in times]
    conserved = [
        Conserved(mass_norm_sq(u), dirichlet_energy(u), wave_energy(u, v))
        for u, v in zip(states, velocities)
    ]
    return Trajectory(times, states, conserved, velocities)
