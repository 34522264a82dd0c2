"""Exit criteria, one test per criterion, each printing a PASS/FAIL line."""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from graphpde.cli import main
from graphpde.evolution import SchrodingerFlow, solve_schrodinger, solve_wave
from graphpde.expm import expm
from graphpde.generators import random_domain, random_function
from graphpde.graph import GraphFunction, dump_document, green_sides, laplacian, parse_graph
from graphpde.nonlinear import (GroundStateProblem, NlsProblem, nehari_functional,
                                probe_battery, solve_ground_state, solve_nls)
from graphpde.spectral import assemble, eigendecompose, schrodinger_kernel, spectrum_of

P3 = '{"edges": [["a", "b"], ["b", "c"]], "interior": ["b"]}'
P4 = '{"edges": [["0", "1"], ["1", "2"], ["2", "3"]], "interior": ["1", "2"]}'


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(1)
    return [random_domain(rng, int(rng.integers(3, 51))) for _ in range(100)]


def test_c1_green_identity(corpus, criterion):
    rng = np.random.default_rng(11)
    worst = 0.0
    for d in corpus:
        f = random_function(rng, d, dirichlet=False)
        g = random_function(rng, d, dirichlet=False)
        lhs, rhs = green_sides(f, g)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
    criterion(1, "Green identity on 100 random graphs", worst <= 1e-12, f"max scaled residual {worst:.2e} <= 1e-12")


def test_c2_spectral_validity(corpus, criterion):
    eig = ortho = 0.0
    min_lam = np.inf
    for d in corpus:
        lap = assemble(d)
        s = eigendecompose(lap)
        lam, phi = s.eigenvalues, s.eigenvectors
        eig = max(eig, np.max(np.linalg.norm(lap.matrix @ phi - phi * lam, axis=0)) / max(1, lam[-1]))
        ortho = max(ortho, np.max(np.abs(phi.T @ phi - np.eye(s.size))))
        min_lam = min(min_lam, lam[0])
    p4 = spectrum_of(parse_graph(P4)).eigenvalues
    p4_err = np.max(np.abs(p4 - [1, 3]))
    ok = eig <= 1e-10 and ortho <= 1e-10 and min_lam > 0 and p4_err <= 1e-12
    criterion(2, "spectral validity", ok,
              f"eig {eig:.1e}, ortho {ortho:.1e}, min lambda {min_lam:.3g}, P4 err {p4_err:.1e}")


def test_c3_kernel(corpus, criterion):
    unit = oracle = 0.0
    checked = 0
    identity_exact = True
    for d in corpus:
        lap = assemble(d)
        s = eigendecompose(lap)
        identity_exact &= np.array_equal(schrodinger_kernel(s, 0.0), np.eye(s.size))
        for t in (0.1, 1.0, 5.0):
            k = schrodinger_kernel(s, t)
            unit = max(unit, np.max(np.abs(k @ k.conj().T - np.eye(s.size))))
            if d.n_closure <= 20:
                oracle = max(oracle, np.max(np.abs(k - expm(-1j * t * lap.matrix))))
                checked += 1
    ok = identity_exact and unit <= 1e-10 and oracle <= 1e-9 and checked > 0
    criterion(3, "Schrodinger kernel", ok,
              f"S_0 == I: {identity_exact}, unitarity {unit:.1e}, expm oracle {oracle:.1e} over {checked} (graph, t) pairs")


def test_c4_schrodinger_conservation(corpus, criterion):
    rng = np.random.default_rng(4)
    ts = np.linspace(0, 10, 50)
    mass = energy = resid = 0.0
    for d in corpus[:30]:
        f = random_function(rng, d)
        s = spectrum_of(d)
        traj = solve_schrodinger(d, f, ts, spectrum=s)
        mass = max(mass, traj.max_relative_drift("mass"))
        energy = max(energy, traj.max_relative_drift("dirichlet_energy"))
        flow = SchrodingerFlow(s, f)
        for t, u in zip(ts, traj.states):
            resid = max(resid, np.linalg.norm(1j * flow.time_derivative(t).interior + laplacian(u)))
    ok = mass <= 1e-10 and energy <= 1e-10 and resid <= 1e-10
    criterion(4, "mass and Dirichlet energy conservation", ok,
              f"mass {mass:.1e}, energy {energy:.1e}, PDE residual {resid:.1e}")


def test_c5_wave_energy(corpus, criterion):
    rng = np.random.default_rng(5)
    ts = np.linspace(0, 10, 50)
    drift = init = 0.0
    for d in corpus[:30]:
        f = random_function(rng, d, real=True)
        g = random_function(rng, d, real=True)
        traj = solve_wave(d, f, g, ts)
        drift = max(drift, traj.max_relative_drift("wave_energy"))
        init = max(init, np.max(np.abs(traj.states[0].values - f.values)),
                   np.max(np.abs(traj.velocities[0].values - g.values)))
    ok = drift <= 1e-10 and init <= 1e-12
    criterion(5, "wave energy and initial conditions", ok,
              f"energy drift {drift:.1e}, initial-condition error {init:.1e}")


def test_c6_nls(corpus, criterion):
    p3 = parse_graph(P3)
    ts = np.linspace(0, 1, 101)
    err = 0.0
    for amp, p in [(1.0, 3.0), (2.0, 3.0), (0.6 + 0.8j, 2.0), (1.5, 4.0)]:
        f = GraphFunction.from_mapping(p3, {"b": amp})
        traj = solve_nls(NlsProblem(p3, p, f, 1.0), ts)
        exact = amp * np.exp(-1j * (2 + abs(amp) ** (p - 1)) * ts)
        err = max(err, np.max(np.abs([u["b"] for u in traj.states] - exact)))

    f = GraphFunction.from_mapping(p3, {"b": 1.0})
    errs = []
    for h in (0.2, 0.1, 0.05):
        u = solve_nls(NlsProblem(p3, 3.0, f, 1.0, substep=h), [1.0]).states[0]["b"]
        errs.append(abs(u - np.exp(-3j)))
    order = float(np.min(np.log2(np.array(errs[:-1]) / errs[1:])))

    rng = np.random.default_rng(6)
    mass = 0.0
    for d in [d for d in corpus if d.n_closure <= 20][:10]:
        traj = solve_nls(NlsProblem(d, 3.0, random_function(rng, d), 1.0), np.linspace(0, 1, 5))
        mass = max(mass, traj.max_relative_drift("mass"))
    ok = err <= 1e-8 and order >= 2 and mass <= 1e-8
    criterion(6, "NLS closed form, order, mass", ok,
              f"closed-form error {err:.1e}, observed order {order:.2f}, mass drift {mass:.1e}")


def test_c7_picard(corpus, criterion, tmp_path):
    p3 = parse_graph(P3)
    worst = 0.0
    for amp in (0.5, 1.0, 2.0, 2j, np.sqrt(2) * (1 + 1j)):
        steps = []
        f = GraphFunction.from_mapping(p3, {"b": amp})
        solve_nls(NlsProblem(p3, 3.0, f, 1.0), np.linspace(0, 1, 11), steps=steps)
        worst = max(worst, max(max(s.ratios) for s in steps))
    rng = np.random.default_rng(7)
    for d in [d for d in corpus if d.n_closure <= 20][:5]:
        steps = []
        solve_nls(NlsProblem(d, 3.0, random_function(rng, d), 0.5), [0.5], steps=steps)
        worst = max(worst, max(max(s.ratios) for s in steps))

    path = tmp_path / "big.json"
    path.write_text(json.dumps({"edges": [["a", "b"], ["b", "c"]], "interior": ["b"],
                                "initial": {"b": [5.0, 0.0]}}))
    res = CliRunner().invoke(main, ["nls", str(path), "--T", "10", "--substep", "10", "--times", "10"])
    ok = worst < 1 and res.exit_code == 3
    criterion(7, "Picard contraction and forced failure", ok,
              f"max ratio {worst:.3f}, exit code at substep 10 |f|=5: {res.exit_code}")


def test_c8_ground_state(corpus, criterion):
    p3 = parse_graph(P3)
    closed = 0.0
    for p in (2.0, 3.0, 5.0):
        for v in (0.0, 0.7, 4.0):
            u = solve_ground_state(GroundStateProblem(p3, p, [v]))["b"].real
            closed = max(closed, abs(u - (2 + v) ** (1 / (p - 1))))

    rng = np.random.default_rng(8)
    el = gap = 0.0
    positive = minimal = True
    small = [d for d in corpus if d.n_closure <= 30][:15]
    assert len(small) == 15
    for d in small:
        for p in (2.0, 3.0):
            prob = GroundStateProblem(d, p, rng.uniform(0, 2, d.n_interior))
            u = solve_ground_state(prob)
            r = nehari_functional(prob, u)
            el = max(el, r.el_residual)
            gap = max(gap, abs(r.constraint_gap))
            positive &= bool(np.all(u.interior.real > 0))
            minimal &= all(r.J <= nehari_functional(prob, q).J + 1e-12 for q in probe_battery(prob))
    ok = closed <= 1e-10 and el <= 1e-8 and gap <= 1e-8 and positive and minimal
    criterion(8, "Nehari ground state", ok,
              f"closed-form error {closed:.1e}, EL residual {el:.1e}, gap {gap:.1e}, "
              f"positive {positive}, probe-minimal {minimal}")


def test_c9_cli(criterion, tmp_path):
    rng = np.random.default_rng(9)
    d = random_domain(rng, 30)
    path = tmp_path / "g.json"
    path.write_text(dump_document(d, initial=random_function(rng, d)))
    runner = CliRunner()
    runs = [
        ["verify", str(path), "--seed", "3"],
        ["schrodinger", str(path), "--t-max", "5", "--samples", "5"],
        ["wave", str(path), "--t-max", "5", "--samples", "5", "--format", "structured"],
        ["nls", str(path), "--t-max", "0.1", "--samples", "2"],
        ["ground-state", str(path), "--seed", "4"],
        ["spectrum", str(path)],
    ]
    identical = all(runner.invoke(main, a).output == runner.invoke(main, a).output for a in runs)
    good = runner.invoke(main, runs[0])
    bad = runner.invoke(main, runs[0] + ["--green-tol", "1e-30", "--unitarity-tol", "1e-30"])
    p4 = tmp_path / "p4.json"
    p4.write_text(P4)
    p4_res = runner.invoke(main, ["verify", str(p4)])
    ok = identical and good.exit_code == 0 and bad.exit_code == 1 and p4_res.exit_code == 0
    criterion(9, "CLI determinism and verify exit codes", ok,
              f"byte-identical {identical}, exits pass/P4/fail = {good.exit_code}/{p4_res.exit_code}/{bad.exit_code}")
