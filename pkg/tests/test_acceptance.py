"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that is printed in the terminal
summary. The slow criteria (5 to 8) take several minutes each on one core.
"""

import math
import os

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from wcdshock.analysis import (
    MhdSweepConfig, NoPlateauError, SweepConfig, extract_middle_state,
    kinetic_sweep, mhd_kinetic_sweep,
)
from wcdshock.models import RiemannData, cubic_model, hall_mhd_model, vdw_elasticity_model
from wcdshock.oracles import (
    TravelingWaveProblem, classical_riemann_cubic, lax_friedrichs_baseline,
    nonclassical_riemann_cubic, traveling_wave_kinetic,
)
from wcdshock.scheme import (
    GridSpec, RunConfig, SchemeVariant, run, spatial_residual_entropy_stable,
    spatial_residual_scalar, spatial_residual_system, ssp_rk3_step,
)
from wcdshock.stencil import build_stencil_set, exact_weights, solve_order_conditions, tail_sums
from wcdshock.wcd import InfeasibleToleranceError, WcdConfig, check_feasible

WORKERS = os.cpu_count() or 1


def report(number, checks, note=""):
    """Record one summary line and fail on the first unmet check."""
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}"
    if failed:
        line += f" (unmet: {', '.join(failed)})"
    if note:
        line += f" | {note}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# {{{ 1-3: stencils and feasibility


def test_criterion_1_order_conditions():
    worst_exact = 0.0
    worst_float = 0.0
    worst_mono = 0.0
    for p in (1, 2, 3, 4, 6):
        j = np.arange(-p, p + 1, dtype=float)
        for d in (1, 2, 3) if p >= 2 else (1, 2):
            exact = exact_weights(p, d)
            w = solve_order_conditions(p, d)
            for l in range(2 * p + 1):
                target = math.factorial(d) if l == d else 0
                got = sum(c * k**l for c, k in zip(exact, range(-p, p + 1)))
                worst_exact = max(worst_exact, float(abs(got - target)))
                # floating sums are judged relative to their own magnitude
                scale = float(np.sum(np.abs(w) * np.abs(j) ** l))
                err = abs(float(np.sum(w * j**l)) - target) / max(scale, 1.0)
                worst_float = max(worst_float, err)

            # derivative of x^m at x0 for every degree m <= 2p
            x0, h = 0.7, 0.05
            for m in range(2 * p + 1):
                approx = np.sum(w * (x0 + j * h) ** m) / h**d
                exact_d = (math.perm(m, d) * x0 ** (m - d)) if m >= d else 0.0
                err = abs(approx - exact_d) / max(abs(exact_d), 1.0)
                worst_mono = max(worst_mono, err)
    report(1, {"exact weights": worst_exact == 0.0,
               "float weights <= 1e-13": worst_float <= 1e-13,
               "monomials <= 1e-10": worst_mono <= 1e-10},
           f"float residual {worst_float:.2e}, monomial error {worst_mono:.2e}")


def test_criterion_2_tail_sums():
    b1 = tail_sums(build_stencil_set(1))
    sums = {p: tail_sums(build_stencil_set(p)) for p in (2, 3, 4, 6)}

    def decreasing(name):
        vals = [getattr(sums[p], name) for p in (2, 3, 4, 6)]
        return all(a > b for a, b in zip(vals, vals[1:]))

    report(2, {
        "S_f_1": abs(b1.s_f_hat - (math.sinh(1) - 1)) <= 1e-12,
        "S_D_1": abs(b1.s_d_hat - 2 * (math.cosh(1) - 1.5)) <= 1e-12,
        "S_f decreasing": decreasing("s_f_hat"),
        "S_D decreasing": decreasing("s_d_hat"),
        "S_C decreasing": decreasing("s_c_hat"),
    }, "S_C_p = " + ", ".join(f"{p}:{sums[p].s_c_hat:.4g}" for p in sums))


def _feasible(p, tau):
    try:
        check_feasible(tail_sums(build_stencil_set(p)), tau, 1.0)
        return True
    except InfeasibleToleranceError:
        return False


def test_criterion_3_feasibility():
    s2 = tail_sums(build_stencil_set(2)).s_c_hat
    s3 = tail_sums(build_stencil_set(3)).s_c_hat

    # the capillarity run itself must be refused before any time step
    grid = GridSpec(0, 1, 50)
    data = RiemannData((0.8, 0.35), (2.0, 1.0), 0.5)
    try:
        run(RunConfig(model=vdw_elasticity_model(), grid=grid, initial=data,
                      wcd=WcdConfig(tau=0.1, p=2), t_end=1e-3))
        rejected_p2 = False
    except InfeasibleToleranceError:
        rejected_p2 = True

    # rejection is monotone in tau: the threshold is tau* = S_C_p
    taus = np.geomspace(1e-4, 1.0, 200)
    monotone = True
    thresholds = {}
    for p in (2, 3, 4, 6):
        flags = [_feasible(p, t) for t in taus]
        monotone &= all(not a or b for a, b in zip(flags, flags[1:]))
        thresholds[p] = tail_sums(build_stencil_set(p)).s_c_hat

    report(3, {"S_C_2/0.1 >= 1": s2 / 0.1 >= 1, "S_C_3/0.1 < 1": s3 / 0.1 < 1,
               "p=2 run rejected": rejected_p2, "p=3 accepted": _feasible(3, 0.1),
               "monotone in tau": monotone},
           "tau* = " + ", ".join(f"p{p}:{t:.4g}" for p, t in thresholds.items()))


# }}}


# {{{ 4-6: cubic flux


def _l1(a, b, dx):
    return float(np.sum(np.abs(a - b)) * dx)


def test_criterion_4_lax_friedrichs():
    u_l, u_r, x0, t_end = 4.0, -2.0, 0.3, 0.02
    classical = classical_riemann_cubic(u_l, u_r)
    nonclassical = nonclassical_riemann_cubic(u_l, u_r)
    u_m = nonclassical.waves[0].right

    dists, rel, to_nc, plateaus = [], [], [], []
    for n in (1000, 2000, 4000):
        g = GridSpec(0, 1, n)
        res = lax_friedrichs_baseline(RunConfig(
            model=cubic_model(1.0), grid=g, initial=RiemannData(u_l, u_r, x0), t_end=t_end))
        u = res.final.values
        ref = classical.sample(g.x, t_end, x0)
        dists.append(_l1(u, ref, g.dx))
        rel.append(dists[-1] / _l1(ref, 0.0, g.dx))
        to_nc.append(_l1(u, nonclassical.sample(g.x, t_end, x0), g.dx))
        try:
            plateaus.append(extract_middle_state(res.final))
        except NoPlateauError:
            plateaus.append(None)

    # a plateau detector may lock on the flat sonic end of the fan; only a
    # plateau away from both end states would be a middle state
    span = u_l - u_r
    interior = [v for v in plateaus
                if v is not None and min(abs(v - u_l), abs(v - u_r)) > 0.01 * span]
    report(4, {"distance decreasing": dists[0] > dists[1] > dists[2],
               "final < 5e-2 of norm": rel[-1] < 5e-2,
               "no interior plateau": not interior,
               "closer to classical": all(a < b for a, b in zip(dists, to_nc))},
           f"relative L1 {', '.join(f'{r:.4f}' for r in rel)}; nonclassical u_M {u_m:.4f}")


CUBIC_T_END = {2.0: 0.04, 4.0: 0.02, 30.0: 5.5e-4}


def _cubic_middle_state(u_l, n, p, tau):
    cfg = RunConfig(model=cubic_model(1.0), grid=GridSpec(0, 1, n),
                    initial=RiemannData(u_l, -2.0, 0.2), wcd=WcdConfig(tau=tau, p=p),
                    t_end=CUBIC_T_END[u_l])
    return extract_middle_state(run(cfg).final)


def _criterion_5(p, tau, label):
    oracle = {u: traveling_wave_kinetic(TravelingWaveProblem(u, 1.0)).u_plus for u in CUBIC_T_END}
    checks, notes = {}, []
    for u_l in (2.0, 4.0):
        coarse = abs(_cubic_middle_state(u_l, 2000, p, tau) / oracle[u_l] - 1)
        fine = abs(_cubic_middle_state(u_l, 4000, p, tau) / oracle[u_l] - 1)
        checks[f"u_L={u_l:g} within 2%"] = fine <= 0.02
        # below the plateau's own resolution the error no longer tracks the mesh
        checks[f"u_L={u_l:g} improves"] = fine <= coarse or fine < 1e-3
        notes.append(f"u_L={u_l:g}: {coarse:.2e} -> {fine:.2e}")
    err = abs(_cubic_middle_state(30.0, 4000, p, tau) / oracle[30.0] - 1)
    checks["u_L=30 within 3%"] = err <= 0.03
    notes.append(f"u_L=30: {err:.2e}")
    report(label, checks, "; ".join(notes))


def test_criterion_5_nonclassical_capture():
    # eighth order (p = 4) at tau = 0.01, as stated
    try:
        _criterion_5(4, 0.01, 5)
    except InfeasibleToleranceError as exc:
        report(5, {"p=4, tau=0.01 admits a WCD coefficient": False}, str(exc))


def test_criterion_5_companion_p6():
    # same measurement with the lowest order that is feasible at tau = 0.01
    _criterion_5(6, 0.01, "5 (p=6 companion)")


def test_criterion_6_kinetic_sweep():
    u_ls = np.linspace(3.0, 10.0, 15)
    cfg = SweepConfig(n_cells=2000, wcd=WcdConfig(tau=0.1, p=4), workers=WORKERS)
    checks, notes = {}, []
    for delta in (0.3, 1.0, 5.0):
        recs = kinetic_sweep(u_ls, -2.0, delta, cfg)
        ok = all(r.ok for r in recs)
        checks[f"delta={delta:g} all extracted"] = ok
        if not ok:
            continue
        u_m = np.array([r.middle_state for r in recs])
        ref = np.array([traveling_wave_kinetic(TravelingWaveProblem(u, delta)).u_plus
                        for u in u_ls])
        err = np.abs(u_m / ref - 1)
        checks[f"delta={delta:g} monotone"] = bool(np.all(np.diff(u_m) < 0))
        checks[f"delta={delta:g} within 2%"] = bool(np.max(err) <= 0.02)
        notes.append(f"delta={delta:g} max {np.max(err):.2e}")

        odd = max(abs(traveling_wave_kinetic(TravelingWaveProblem(-u, delta)).u_plus + r)
                  for u, r in zip(u_ls, ref))
        checks[f"delta={delta:g} odd symmetry"] = odd <= 1e-12
    report(6, checks, "; ".join(notes))


# }}}


# {{{ 7-8: systems


def test_criterion_7_elasticity_convergence():
    data = RiemannData((0.8, 0.35), (2.0, 1.0), 0.5)
    fields = {}
    for n in (500, 1000, 2000, 4000):
        cfg = RunConfig(model=vdw_elasticity_model(), grid=GridSpec(0, 1, n),
                        initial=data, wcd=WcdConfig(tau=0.1, p=4), t_end=0.3)
        fields[n] = run(cfg).final.values

    # restrict the finer solution to the coarser grid by pairwise averaging
    dists = []
    for n in (500, 1000, 2000):
        fine = fields[2 * n]
        coarse_of_fine = 0.5 * (fine[:, 0::2] + fine[:, 1::2])
        dists.append(float(np.sum(np.abs(fields[n] - coarse_of_fine)) / n))
    pairwise = [math.log2(dists[i] / dists[i + 1]) for i in range(2)]
    fitted = -np.polyfit(np.log2([500, 1000, 2000]), np.log2(dists), 1)[0]
    report(7, {"monotone decrease": dists[0] > dists[1] > dists[2],
               "fitted rate >= 0.7": fitted >= 0.7},
           f"L1 {', '.join(f'{d:.4g}' for d in dists)}; rate {fitted:.3f} "
           f"(pairwise {pairwise[0]:.3f}, {pairwise[1]:.3f})")


def test_criterion_8_mhd_kinetic_relation():
    r_ls = (1.0, 10.0, 100.0, 500.0)
    cfg = MhdSweepConfig(workers=WORKERS)
    checks, notes = {}, []
    for alpha in (1.0, 2.0, 10.0):
        recs = mhd_kinetic_sweep(r_ls, alpha, cfg)
        ok = all(r.ok for r in recs)
        checks[f"alpha={alpha:g} measured"] = ok
        if not ok:
            continue
        ratio = np.array([r.phi / r.shock_speed**2 for r in recs])
        rsd = float(np.std(ratio) / abs(np.mean(ratio)))
        checks[f"alpha={alpha:g} RSD < 5%"] = rsd < 0.05
        notes.append(f"alpha={alpha:g} phi/s^2 {np.mean(ratio):.4f} RSD {rsd:.1e}")
    report(8, checks, "; ".join(notes))


# }}}


# {{{ 9-10: entropy and invariants


def test_criterion_9_entropy_conservative():
    model = cubic_model(1.0)
    st = build_stencil_set(3, need_dispersion=True)
    g = GridSpec(0, 2 * math.pi, 128, bc="periodic")
    u = np.sin(g.x) + 0.5 * np.cos(3 * g.x) + 0.2
    scale = float(np.max(np.abs(u)))

    # entropy U = u^2/2, entropy variable u
    def rate(c):
        return float(np.sum(u * spatial_residual_entropy_stable(u, st, c, model, g)) * g.dx)

    r0 = rate(0.0)
    rates = [rate(c) for c in (0.1, 1.0, 5.0)]

    cfg = RunConfig(model=model, grid=g, initial=u, wcd=WcdConfig(tau=0.1, p=3),
                    variant=SchemeVariant.ENTROPY_CONSERVATIVE_WCD, t_end=0.05)
    res = run(cfg)
    decay = float(np.sum(res.final.values**2) - np.sum(u**2))
    report(9, {"c=0 identity": abs(r0) <= 1e-10 * scale,
               "c>0 dissipative": all(r <= 0 for r in rates),
               "run does not create entropy": decay <= 1e-12 * np.sum(u**2)},
           f"c=0 rate {r0:.2e}")


def test_criterion_10_invariants():
    checks = {}

    # conservation under periodicity, per unit time
    g = GridSpec(0, 1, 128, bc="periodic")
    u0 = 1.0 + 0.5 * np.sin(2 * math.pi * g.x)
    t_end = 0.05
    res = run(RunConfig(model=cubic_model(1.0), grid=g, initial=u0,
                        wcd=WcdConfig(tau=0.1, p=4), t_end=t_end))
    drift = abs(np.sum(res.final.values) - np.sum(u0)) * g.dx / t_end
    checks["conservation"] = drift <= 1e-12

    # constant states are preserved exactly by a full run
    res = run(RunConfig(model=cubic_model(1.0), grid=GridSpec(0, 1, 64),
                        initial=RiemannData(1.5, 1.5, 0.5), wcd=WcdConfig(tau=0.1, p=4),
                        t_end=0.02))
    checks["constant state"] = bool(np.all(res.final.values == 1.5))

    # odd equivariance of the cubic scheme
    st = build_stencil_set(4, need_dispersion=True)
    g = GridSpec(0, 1, 200)
    u = np.where(g.x < 0.4, 3.0, -1.5) + 0.1 * np.sin(7 * g.x)
    a = spatial_residual_scalar(-u, st, 2.3, cubic_model(1.0), g)
    b = -spatial_residual_scalar(u, st, 2.3, cubic_model(1.0), g)
    checks["odd equivariance"] = np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(b))

    # rotational equivariance of the MHD residual
    st = build_stencil_set(2)
    m = hall_mhd_model(2.0)
    g = GridSpec(0, 1, 128, bc="periodic")
    U = np.stack([np.cos(2 * math.pi * g.x) + 0.3, 0.5 * np.sin(4 * math.pi * g.x)])
    worst = 0.0
    for theta in np.linspace(0, 2 * math.pi, 13):
        R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        ref = R @ spatial_residual_system(U, st, 0.8, m, g)
        got = spatial_residual_system(R @ U, st, 0.8, m, g)
        worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    checks["rotational equivariance"] = worst <= 1e-12

    # SSP-RK3 order on u' = -u
    errs = []
    for n in (20, 40, 80, 160):
        v = np.array([1.0])
        for _ in range(n):
            v = ssp_rk3_step(v, 1.0 / n, lambda w: -w)
        errs.append(abs(v[0] - math.exp(-1)))
    order = min(math.log2(errs[i] / errs[i + 1]) for i in range(3))
    checks["SSP-RK3 order >= 2.9"] = order >= 2.9

    report(10, checks, f"mass drift {drift:.1e}/unit time, rotation {worst:.1e}, "
                       f"RK order {order:.3f}")


# }}}
