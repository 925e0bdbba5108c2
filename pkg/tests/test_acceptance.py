"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math

import numpy as np
import pytest

from closeeval.geometry import DOMAINS, SPHERE, parameterize
from closeeval.harness import SweepConfig, fit_slope, run_epsilon_sweep, run_grid_sweep
from closeeval.potentials import dlp_kernel, evaluate, gauss_law_check, make_target, slp_kernel
from closeeval.quadrature import gauss_legendre, integrate_rotated, product_rule
from closeeval.reference import constant_densities, densities_from_exact, exact_solution, sphere_kernel_oracles
from closeeval.rotation import rotated_angles, rotation_matrix, unit_vector

from conftest import ACCEPTANCE_LINES

EPS_SWEEP = tuple(np.logspace(-1, -5, 21))  # contains 1e-2 and 1e-5 exactly on the grid


def report(key, name, passed, detail):
    ACCEPTANCE_LINES[key] = f"[{'PASS' if passed else 'FAIL'}] {key} {name}: {detail}"
    assert passed, detail


def sweep(domain, approx):
    cfg = SweepConfig(domain, approx, (128,), EPS_SWEEP, ("A",))
    recs = run_epsilon_sweep(cfg)
    return np.array([r.eps for r in recs]), np.array([r.abs_error for r in recs])


def slope_or_nan(eps, err):
    try:
        return fit_slope(eps, err, floor=1e-13)
    except ValueError:
        return math.nan


@pytest.mark.parametrize("domain", ["peanut", "mushroom"])
def test_c01_convergence_orders(domain):
    s2 = slope_or_nan(*sweep(domain, 2))
    s3 = slope_or_nan(*sweep(domain, 3))
    ok2 = 0.8 <= s2 <= 1.2
    ok3 = 1.7 <= s3 <= 2.3
    report(f"C01-{domain}", "convergence orders", ok2 and ok3,
           f"approx2 slope {s2:.3f} (want [0.8, 1.2]), approx3 slope {s3:.3f} (want [1.7, 2.3])")


@pytest.mark.parametrize("domain", ["peanut", "mushroom"])
def test_c02_approx1_does_not_decay(domain):
    eps, err = sweep(domain, 1)
    e2 = err[np.argmin(np.abs(eps - 1e-2))]
    e5 = err[np.argmin(np.abs(eps - 1e-5))]
    passed = e5 >= 0.5 * e2 and e2 > 1e-4 and e5 > 1e-4
    report(f"C02-{domain}", "approx1 O(1) error", passed,
           f"error {e2:.3e} at eps=1e-2, {e5:.3e} at eps=1e-5 (want no decay, both > 1e-4)")


def test_c03_machine_precision_floor():
    eps = (1e-6,)
    rec = run_epsilon_sweep(SweepConfig("peanut", 3, (128,), eps, ("A",)))[0]
    report("C03", "approx3 floor", rec.abs_error < 1e-12, f"error {rec.abs_error:.3e} at eps=1e-6 (want < 1e-12)")


def test_c04_gauss_law():
    centre = gauss_law_check(SPHERE, [0.0, 0.0, 0.0], product_rule(16))
    parts = [f"centre {centre:.16f}"]
    passed = abs(centre + 1) < 1e-10
    near = {"sphere": (1.0, 0.5), "peanut": (math.pi / 2, math.atan2(0.2020, -0.0894)),
            "mushroom": (math.pi / 2, math.atan2(2.4816 / 2, -1.5559))}
    for name, angles in near.items():
        domain = DOMAINS[name]
        target = make_target(domain, *angles, 1e-3)
        err = abs(gauss_law_check(domain, target.x, product_rule(128), angles) + 1)
        passed &= err < 1e-4
        parts.append(f"{name} eps=1e-3 err {err:.2e}")
    for domain in DOMAINS.values():
        diameter = 2 * np.max(np.linalg.norm(parameterize(domain, np.linspace(0, math.pi, 181)[:, None],
                                                          np.linspace(-math.pi, math.pi, 361)[None, :]), axis=-1))
        x = 5 * diameter * np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
        value = gauss_law_check(domain, x, product_rule(64))
        passed &= abs(value) < 1e-8
        parts.append(f"{domain.name} far {abs(value):.1e}")
    report("C04", "Gauss law", passed, "; ".join(parts) + " (want 1e-10, 1e-4, 1e-8)")


def test_c05_constant_density_exact():
    c = 2.75
    dens = constant_densities(c, 0.0)
    worst = 0.0
    for domain in DOMAINS.values():
        for n in (8, 32, 128):
            rule = product_rule(n)
            for k in range(1, 9):
                target = make_target(domain, 1.3, -0.4, 10.0**-k)
                worst = max(worst, abs(evaluate(2, domain, dens, target, rule) - c))
    tol = 5 * np.finfo(float).eps * c
    report("C05", "constant density", worst <= tol, f"max deviation {worst:.1e} (want <= {tol:.1e})")


def test_c06_kernel_oracles():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for s, eps in zip(rng.uniform(1e-3, math.pi - 1e-3, 100), rng.uniform(1e-6, 0.5, 100)):
        x = np.array([0.0, 0.0, 1.0 - eps])
        y = unit_vector(s, rng.uniform(-math.pi, math.pi))
        jac = 1.0  # unit sphere, n = y
        k_sin, g_sin = sphere_kernel_oracles(s, eps)
        k_assembled = -(2 * dlp_kernel(y, y, x) + slp_kernel(y, x)) * jac * math.sin(s)
        g_assembled = slp_kernel(y, x) * jac * math.sin(s)
        worst = max(worst, abs(k_assembled - k_sin) / max(1.0, abs(k_sin)),
                    abs(g_assembled - g_sin) / max(1.0, abs(g_sin)))
    spot = sphere_kernel_oracles(math.pi / 2, 0.1)[0]
    passed = worst < 1e-13 and abs(spot - 0.078025) <= 1e-6
    report("C06", "kernel oracles", passed, f"max deviation {worst:.1e} (want < 1e-13), K_sin(pi/2, 0.1) = {spot:.7f}")


def test_c07_rotation_suite():
    rng = np.random.default_rng(7)
    orth = det = centre = 0.0
    for theta, phi in zip(rng.uniform(0, math.pi, 1000), rng.uniform(-math.pi, math.pi, 1000)):
        m = rotation_matrix(theta, phi).matrix
        orth = max(orth, np.max(np.abs(m.T @ m - np.eye(3))))
        det = max(det, abs(np.linalg.det(m) - 1))
        t0, p0 = rotated_angles(0.0, rng.uniform(-math.pi, math.pi), theta, phi)
        centre = max(centre, abs(t0 - theta), abs(math.remainder(p0 - phi, 2 * math.pi)))
    a = np.array([0.4, -0.3, 0.9])
    f = lambda t, p: np.exp(unit_vector(t, p) @ a)
    base = integrate_rotated(product_rule(32), 0.0, 0.0, f)
    measure = max(abs(integrate_rotated(product_rule(32), t, p, f) - base)
                  for t, p in zip(rng.uniform(0, math.pi, 20), rng.uniform(-math.pi, math.pi, 20)))
    passed = orth < 1e-14 and det < 1e-14 and centre < 1e-13 and measure < 1e-10
    report("C07", "rotation suite", passed,
           f"orthogonality {orth:.1e}, det {det:.1e}, centre {centre:.1e}, measure {measure:.1e}")


def test_c08_quadrature_exactness():
    worst = wsum = 0.0
    for n in range(2, 65):
        z, w = gauss_legendre(n)
        wsum = max(wsum, abs(w.sum() - 2))
        for k in range(2 * n):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            worst = max(worst, abs(np.sum(w * z**k) - exact))
    one = integrate_rotated(product_rule(16), 0.8, -1.1, lambda t, p: 1.0)
    passed = worst < 1e-13 and wsum < 1e-13 and abs(one - 1) < 1e-12
    report("C08", "quadrature exactness", passed,
           f"monomial error {worst:.1e}, weight sum {wsum:.1e}, integral of 1 off by {abs(one - 1):.1e}")


def test_c09_far_field():
    dens = densities_from_exact(SPHERE)
    rule = product_rule(64)
    worst12 = worst3 = 0.0
    rng = np.random.default_rng(9)
    for theta, phi, eps in zip(rng.uniform(0.1, 3.0, 10), rng.uniform(-3.0, 3.0, 10), rng.uniform(0.3, 0.9, 10)):
        target = make_target(SPHERE, theta, phi, eps)
        u = float(exact_solution(target.x))
        worst12 = max(worst12, *(abs(evaluate(a, SPHERE, dens, target, rule) - u) for a in (1, 2)))
        worst3 = max(worst3, abs(evaluate(3, SPHERE, dens, target, rule) - u) / eps**2)
    passed = worst12 < 1e-10 and worst3 <= 1.0
    report("C09", "far-field consistency", passed,
           f"approx1/2 max error {worst12:.1e} (want < 1e-10), approx3 error / eps^2 at most {worst3:.2f}")


def test_c10_grid_plateau():
    cfg = SweepConfig("peanut", 2, (128, 192, 256), (1e-4,), ("A",))
    errs = [r.abs_error for r in run_grid_sweep(cfg)]
    spread = max(abs(a - b) / max(a, b) for i, a in enumerate(errs) for b in errs[i + 1:])
    report("C10", "grid plateau", spread < 0.2,
           "errors " + ", ".join(f"{e:.2e}" for e in errs) + f" at N=128/192/256, max relative gap {spread:.2f} (want < 0.20)")
