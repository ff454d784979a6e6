"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; the
collected lines are echoed in the terminal summary either way.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, smooth_random
from fracnehari.functional import (
    J_value,
    energy,
    ground_energy_upper_bound,
    nehari_scale,
    norm_sq_upper_bound,
    project,
    ray_energies,
    sobolev_gradient,
    sq_estimate,
)
from fracnehari.grid import GridSpec, frac_laplacian, h_half_inner, norms
from fracnehari.moser import moser_integral
from fracnehari.nonlinearity import audit, log_sample, make_builtin, min_Cq
from fracnehari.oracle import soliton, soliton_laplacian
from fracnehari.solver import SolveConfig, recenter, solve
from fracnehari.verify import FUNCTIONALS, SplitExperiment, default_bump_pair

L, N = 80.0, 4096
ALPHA0 = math.pi / 4


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def critical(lam):
    return make_builtin("paper_critical", lam=lam, q=4, alpha0=ALPHA0)


@pytest.fixture(scope="module")
def oracle_grid():
    return GridSpec(L, N, "free")


@pytest.fixture(scope="module")
def solve_grid():
    return GridSpec(L, N, "periodic")


@pytest.fixture(scope="module")
def critical_runs(solve_grid):
    return {lam: solve(SolveConfig(solve_grid, critical(lam))) for lam in (20, 40, 80)}


def test_criterion_01_operator_oracle(oracle_grid):
    t = time.perf_counter()
    u = soliton(oracle_grid)
    lap = frac_laplacian(u).values
    elapsed = time.perf_counter() - t
    x = oracle_grid.x
    mask = np.abs(x) <= 10
    exact = soliton_laplacian(x[mask])
    err = float(np.max(np.abs(lap[mask] - exact)) / np.max(np.abs(exact)))
    record(1, "soliton operator oracle", err <= 1e-4 and elapsed < 1.0,
           f"max rel err {err:.2e} (tol 1e-4), {elapsed:.3f} s")


def test_criterion_02_closed_form_norms(oracle_grid):
    t = time.perf_counter()
    n = norms(soliton(oracle_grid))
    cube = n.lp(3) ** 3
    elapsed = time.perf_counter() - t
    errs = {
        "l2_sq": abs(n.l2_sq - 2 * math.pi) / (2 * math.pi),
        "seminorm_sq": abs(n.seminorm_sq - math.pi) / math.pi,
        "cube": abs(cube - 3 * math.pi) / (3 * math.pi),
    }
    ok = all(e <= 1e-3 for e in errs.values()) and elapsed < 1.0
    record(2, "closed-form norms", ok, ", ".join(f"{k} {v:.2e}" for k, v in errs.items()) + f" (tol 1e-3), {elapsed:.3f} s")


def test_criterion_03_nehari_membership_and_energy(oracle_grid):
    nl = make_builtin("pure_power", p=2)
    t = time.perf_counter()
    u = soliton(oracle_grid)
    rep = energy(u, nl)
    t1 = nehari_scale(u, nl)
    t2 = nehari_scale(2.0 * u, nl)
    elapsed = time.perf_counter() - t
    phi_rel = abs(rep.Phi) / rep.norm_sq
    J_err = abs(rep.J - math.pi / 2)
    ok = phi_rel <= 1e-6 and J_err <= 1e-3 and abs(t1 - 1) <= 1e-6 and abs(t2 - 0.5) <= 1e-6 and elapsed < 1.0
    record(3, "Nehari membership and energy", ok,
           f"|Phi|/||u||^2 {phi_rel:.2e}, |J-pi/2| {J_err:.2e}, t0(u*)-1 {t1 - 1:.2e}, "
           f"t0(2u*)-1/2 {t2 - 0.5:.2e}, {elapsed:.3f} s")


def test_criterion_04_ground_state_solve(solve_grid):
    nl = make_builtin("pure_power", p=2)
    t = time.perf_counter()
    u, rep, trace = solve(SolveConfig(solve_grid, nl, init="gaussian"))
    elapsed = time.perf_counter() - t
    centered, _ = recenter(u, 5.0)
    dist = float(np.max(np.abs(centered.values - soliton(solve_grid).values)))
    J_err = abs(rep.J - math.pi / 2)
    ok = (trace.termination == "converged" and rep.dual_residual < 1e-8 and J_err <= 1e-3
          and dist <= 1e-2 and trace.iterations <= 500 and elapsed < 60)
    record(4, "ground-state solve", ok,
           f"{trace.termination} in {trace.iterations} its, residual {rep.dual_residual:.1e}, "
           f"|J-pi/2| {J_err:.2e}, sup dist {dist:.2e}, {elapsed:.2f} s")


def test_criterion_05_paper_critical(solve_grid, critical_runs):
    nl = critical(40)
    theta, q = 4.0, 4.0
    C_q = min_Cq(nl, q, log_sample())
    hyp = audit(nl, theta=theta, C_q=C_q, q=q)
    u, rep, trace = critical_runs[40]
    S4 = sq_estimate(solve_grid, q)
    m_bound = ground_energy_upper_bound(q, C_q, S4.value)
    n_bound = norm_sq_upper_bound(q, C_q, theta, S4.value)
    h_rel = abs(rep.H_integral - 2 * rep.J) / abs(2 * rep.J)
    ok = (hyp.passed and trace.termination == "converged" and rep.J <= m_bound
          and rep.norm_sq <= n_bound and h_rel <= 1e-8)
    record(5, "paper_critical run (lambda=40, q=4)", ok,
           f"audit {'pass' if hyp.passed else 'FAIL'} (C_q={C_q:.4g}), {trace.termination}, "
           f"J {rep.J:.5g} <= {m_bound:.5g}, ||u||^2 {rep.norm_sq:.5g} <= {n_bound:.5g}, "
           f"H identity {h_rel:.1e} (S_4={S4.value:.5g})")


def test_criterion_06_monotone_in_lambda(critical_runs):
    J = [critical_runs[lam][1].J for lam in (20, 40, 80)]
    conv = all(critical_runs[lam][2].termination == "converged" for lam in (20, 40, 80))
    ok = conv and J[0] - J[1] > 1e-6 and J[1] - J[2] > 1e-6
    record(6, "J nonincreasing in lambda", ok, "J(20, 40, 80) = " + ", ".join(f"{j:.6g}" for j in J))


def test_criterion_07_moser_small_amplitude():
    grid = GridSpec(40.0, 2048, "periodic")
    g = grid.field(lambda x: np.exp(-0.5 * x * x))
    eps = 1e-3
    errs = {}
    for alpha in (0.5, 1.0, 2.0):
        ratio = moser_integral(eps * g, alpha) / (eps**2 * norms(g).l2_sq)
        errs[alpha] = abs(ratio - alpha) / alpha
    record(7, "Moser small-amplitude law", all(e <= 1e-2 for e in errs.values()),
           ", ".join(f"alpha={a:g} rel err {e:.1e}" for a, e in errs.items()) + " (tol 1e-2)")


def test_criterion_08_brezis_lieb_decay(solve_grid):
    u, w = default_bump_pair(solve_grid)
    exp = SplitExperiment(u, w, (10.0, 20.0, 40.0), critical(40)).run()
    mono = exp.monotone(strict=True)
    final = {fn: float(exp.normalized[fn][-1]) for fn in FUNCTIONALS}
    ok = all(mono.values()) and all(v < 1e-6 for v in final.values())
    record(8, "Brezis-Lieb decay", ok,
           "monotone " + ("yes" if all(mono.values()) else "no") + "; at d=40: "
           + ", ".join(f"{k} {v:.1e}" for k, v in final.items()))


@pytest.mark.parametrize("name", ["pure_power", "paper_critical"])
def test_criterion_09_gradient_consistency(name):
    grid = GridSpec(40.0, 1024, "periodic")
    nl = make_builtin("pure_power", p=2) if name == "pure_power" else critical(40)
    rng = np.random.default_rng(2024)
    u = 0.6 * smooth_random(grid, rng)
    g = sobolev_gradient(u, nl)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        v = smooth_random(grid, rng)
        fd = (J_value(u + eps * v, nl) - J_value(u - eps * v, nl)) / (2 * eps)
        pair = h_half_inner(g, v)
        worst = max(worst, abs(fd - pair) / max(abs(pair), 1e-300))
    record(9, f"gradient consistency ({name})", worst <= 1e-6, f"worst rel err {worst:.1e} over 20 directions (tol 1e-6)")


CONFIGS = [
    (boundary, fam, kw)
    for boundary in ("periodic", "free")
    for fam, kw in (
        ("pure_power", {"p": 2}),
        ("paper_critical", {"lam": 40, "q": 4, "alpha0": ALPHA0}),
        ("exp_power", {"alpha0": 1.0, "nu": 2.0}),
    )
]


@pytest.mark.parametrize("boundary, family, params", CONFIGS, ids=[f"{b}-{f}" for b, f, _ in CONFIGS])
def test_criterion_10_invariant_suite(boundary, family, params):
    grid = GridSpec(40.0, 1024, boundary)
    nl = make_builtin(family, **params)
    rng = np.random.default_rng(99)
    u0 = 0.5 * smooth_random(grid, rng)
    results = {}

    w, t0 = project(u0, nl)
    results["idempotence"] = abs(nehari_scale(w, nl) - 1.0) <= 1e-9

    ts = np.linspace(t0 / 10, 10 * t0, 100)
    try:
        ray = ray_energies(u0, nl, ts)
    except ArithmeticError:
        ray = ray_energies(u0, nl, ts[ts <= 2 * t0])
    results["ray_maximum"] = bool(np.all(ray <= J_value(w, nl) * (1 + 1e-12)))

    # seeded noise breaks the symmetry; convergence is not part of this
    # criterion, so the run is capped rather than driven to tolerance
    cfg = SolveConfig(grid, nl, init_noise=0.02, seed=5, max_iters=150)
    first = solve(cfg)
    second = solve(cfg)
    trace = first[2]
    results["J_monotone_trace"] = trace.energy_monotone() and trace.constraint_defect() <= 1e-10

    moved = u0.roll(137)
    back, _ = recenter(moved, 5.0)
    a, b = norms(moved), norms(back)
    results["recenter_norms"] = (abs(a.l2_sq - b.l2_sq) <= 1e-12 * a.l2_sq
                                 and abs(a.seminorm_sq - b.seminorm_sq) <= 1e-10 * a.seminorm_sq)

    same_trace = [(r.J, r.phi, r.t0, r.residual, r.shift, r.norm) for r in first[2].rows] == \
                 [(r.J, r.phi, r.t0, r.residual, r.shift, r.norm) for r in second[2].rows]
    results["determinism"] = same_trace and first[0].values.tobytes() == second[0].values.tobytes()

    record(10, f"invariant suite ({boundary}, {nl.describe()})", all(results.values()),
           ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in results.items()))


if __name__ == "__main__":
    import subprocess
    import sys

    sys.exit(subprocess.call([sys.executable, "-m", "pytest", __file__, "-q"]))
