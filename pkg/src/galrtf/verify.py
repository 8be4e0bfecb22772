"""The acceptance suite: twelve numbered checks, each with a time budget.

Every check returns a ``CriterionResult``; a check passes only if its
identities hold at the stated tolerance and it finishes within budget.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .arith import (QuadAlg, QuadElem, QuadraticCharacter, abs_p, factorize, is_padic_square, squarefree_part,
                    vp)
from .chambers import absorption_sides, contraction_sides, rational_grid, sl2_chambers
from .expansion import (Volumes, assemble_elliptic, assemble_rss, assemble_unipotent, cancellation_bracket,
                        eval_truncated_kernel, iota_fiber, rss_JT_direct, slope_crosscheck, unipotent_characters,
                        unipotent_JT_direct)
from .heights import AdelicPoint, psi_T_integral, psi_T_quadrature
from .integrals import (LineFn, cayley_composite, kappa_average, poisson_check, tate_zeta_global, tate_zeta_local)
from .orbital import global_orbital, orbital_local
from .symspace import (ELLIPTIC, Mat2, conj_traceless, SlicePoint, XPoint, a_matrix, adelic_abs, cayley, cayley_inv,
                       cayley_line_coordinate, cayley_line_scale, cayley_matrix, classify, elliptic_rep,
                       image_ball_measure, levi_retract, n_matrix, reflect, retraction_rebuild, scalar_cayley,
                       slice_discriminant)
from .testfns import REAL, ArchFn, BallFn, BasicFn, GlobalTestFn, conjugated_fn, gaussian_fn
from .tori import classification_sweep, poisson_sweep

DEFAULT_SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.title} ({self.seconds:.2f}s / {self.budget:.0f}s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "budget": self.budget, "details": self.details}


def _rand_frac(rng: random.Random, num: int = 9, den: int = 6, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-num, num), rng.randint(1, den))
        if q or not nonzero:
            return q


def _rand_sl2_q(rng: random.Random) -> Mat2:
    """n(u) a(t) n^T(w) with small rational parameters."""
    u, w = _rand_frac(rng), _rand_frac(rng)
    t = _rand_frac(rng, nonzero=True)
    low = Mat2(Fraction(1), Fraction(0), w, Fraction(1))
    return n_matrix(u) * a_matrix(t) * low


def _rand_sl2_z(rng: random.Random) -> Mat2:
    g = Mat2.identity()
    for _ in range(3):
        k = rng.randint(-3, 3)
        g = g * Mat2(Fraction(1), Fraction(k), Fraction(0), Fraction(1))
        k = rng.randint(-3, 3)
        g = g * Mat2(Fraction(1), Fraction(0), Fraction(k), Fraction(1))
    return g


def _rand_sl2_r(rng: random.Random, spread: float = 1.0) -> Mat2:
    u = rng.uniform(-spread, spread)
    t = math.exp(rng.uniform(-0.5 * spread, 0.5 * spread))
    th = rng.uniform(0, 2 * math.pi)
    k = Mat2(math.cos(th), -math.sin(th), math.sin(th), math.cos(th))
    return Mat2(1.0, u, 0.0, 1.0) * Mat2(t, 0.0, 0.0, 1 / t) * k


def _norm_one(tau: int, t: Fraction) -> QuadElem:
    """(1 + t sqrt(tau)) / (1 - t sqrt(tau)), a norm-one element."""
    E = QuadAlg(tau)
    return QuadElem(E, 1, t) * QuadElem(E, 1, -t).inverse()


TAUS = (-1, 2, 3, -2, 5, -3, 6, -5, 7)


# ---------------------------------------------------------------------------
# 1-2: chambers

def _pos(H) -> int:
    return int(H > 0)


def _zero(H) -> int:
    return int(H == 0)


# rank-one closed forms, keyed by (kind, P, Q); Gamma takes (H, X)
SL2_CLOSED_FORMS = {
    ("tau_hat", "G", "G"): lambda H: 1,
    ("tau_hat", "B", "B"): _zero,
    ("tau_hat", "B", "G"): _pos,
    ("sigma", "G", "G"): _zero,
    ("sigma", "B", "B"): lambda H: 0,
    ("sigma", "B", "G"): _pos,
    ("gamma", "B", "G"): lambda H, X: _pos(H) - _pos(H - X),
    ("gamma", "G", "G"): lambda H, X: _zero(H),
}


def check_closed_forms(rng: random.Random) -> dict:
    S = sl2_chambers()
    grid = rational_grid(-5, 5, 1000)
    xs = rational_grid(-3, 3, 10)
    mismatches = []
    for (kind, P, Q), form in SL2_CLOSED_FORMS.items():
        fn = getattr(S, kind)(P, Q)
        for i, H in enumerate(grid):
            if kind == "gamma":
                X = xs[i % len(xs)]
                if fn((H,), (X,)) != form(H, X):
                    mismatches.append((kind, P, Q, str(H), str(X)))
            elif fn((H,)) != form(H):
                mismatches.append((kind, P, Q, str(H)))
    signs = {("G", "G"): 1, ("B", "G"): -1, ("B", "B"): 1}
    sign_ok = all(S.epsilon(P, Q) == e for (P, Q), e in signs.items())
    return {"passed": not mismatches and sign_ok, "points": len(grid), "mismatches": mismatches[:5],
            "signs_ok": sign_ok}


def check_absorption_contraction(rng: random.Random) -> dict:
    S = sl2_chambers()
    Hs = rational_grid(-5, 5, 100)
    Xs = rational_grid(-4, 4, 10)
    bad = []
    count = 0
    for H in Hs:
        for X in Xs:
            count += 1
            lhs, rhs = absorption_sides(S, "B", (H,), (X,))
            if lhs != rhs:
                bad.append(("absorption", str(H), str(X)))
    for H in rational_grid(-5, 5, 1000):
        for P1, P in (("B", "B"), ("B", "G"), ("G", "G")):
            lhs, rhs = contraction_sides(S, P1, P, (H,))
            if lhs != rhs:
                bad.append(("contraction", P1, P, str(H)))
    return {"passed": not bad, "absorption_points": count, "contraction_points": 1000, "failures": bad[:5]}


# ---------------------------------------------------------------------------
# 3-4: Cayley transform and Levi retraction

def check_cayley(rng: random.Random, count: int = 100) -> dict:
    fails = {"inverse": 0, "equivariance": 0, "matrix": 0, "trace": 0, "measure": 0}
    done = 0
    while done < count:
        tau = rng.choice(TAUS)
        eps = rng.choice((1, -1))
        Y = SlicePoint.make(tau, _rand_frac(rng), _rand_frac(rng), _rand_frac(rng))
        if Y.minus_det() == 1:
            continue
        g = _rand_sl2_q(rng)
        Yg = Y.adjoint(g)
        if Yg.minus_det() == 1:
            continue
        x = cayley(eps, Y)
        try:
            back = cayley_inv(eps, x)
        except Exception:
            fails["inverse"] += 1
            back = None
        if back is not None and (back.a, back.b, back.c) != (Y.a, Y.b, Y.c):
            fails["inverse"] += 1
        if x.conjugate(g.inverse()) != cayley(eps, Yg):
            fails["equivariance"] += 1
        if cayley_matrix(eps, Y) != x:
            fails["matrix"] += 1
        if x.chi() != scalar_cayley(eps, Y.minus_det()):
            fails["trace"] += 1
        # affine scale of the unipotent line through a diagonal point
        t = _rand_frac(rng, nonzero=True)
        z = _norm_one(tau, t)
        if z.y == 0 or (QuadElem(z.alg, eps) - z).norm() == 0:
            fails["measure"] += 0
        else:
            scale = cayley_line_scale(eps, z)
            ok = adelic_abs(scale) == 1
            a0 = _rand_frac(rng)
            ok = ok and cayley_line_coordinate(eps, z, a0) == scale * a0
            primes = {2, 3} | {p for p, _ in factorize(abs(scale.numerator) * scale.denominator)}
            for p in sorted(primes):
                r = rng.randint(-1, 2)
                ok = ok and image_ball_measure(eps, z, p, a0, r) == abs_p(scale, p) * Fraction(p) ** (-r)
            if not ok:
                fails["measure"] += 1
        done += 1
    return {"passed": not any(fails.values()), "instances": count, "failures": fails}


def check_retraction(rng: random.Random, count: int = 100) -> dict:
    bad = 0
    for _ in range(count):
        tau = rng.choice(TAUS)
        z = _norm_one(tau, _rand_frac(rng))
        eta = XPoint.make(tau, z.x, z.y, _rand_frac(rng, nonzero=True), 0)
        r = levi_retract(eta)
        ok = retraction_rebuild(r) == eta and r.eta_M.b == 0 and r.eta_M.c == 0 and r.eta_M.u == eta.u
        bad += not ok
    return {"passed": bad == 0, "instances": count, "failures": bad}


# ---------------------------------------------------------------------------
# 5-7: heights, Poisson, zeta

def check_psi_T(rng: random.Random, count: int = 50, Ts=(3.0, 4.0, 5.0, 6.5, 8.0)) -> dict:
    worst = 0.0
    for _ in range(count):
        entries = {REAL: _rand_sl2_r(rng)}
        if rng.random() < 0.5:
            p = rng.choice((2, 3, 5))
            u = Fraction(rng.randint(-20, 20), p ** rng.randint(0, 2))
            entries[p] = a_matrix(Fraction(p) ** rng.randint(-1, 1)) * n_matrix(u)
        x = AdelicPoint(entries)
        for T in Ts:
            worst = max(worst, abs(psi_T_quadrature(x, T) - psi_T_integral(x, T)))
    return {"passed": worst < 1e-6, "points": count, "T": list(Ts), "max_error": worst}


def check_poisson(rng: random.Random, count: int = 10) -> dict:
    gauss = LineFn(REAL, evaluator=lambda b: np.exp(-math.pi * np.asarray(b, dtype=float) ** 2), radius=8.0)
    lhs, rhs = poisson_check(gauss)
    rows = [{"g": "gaussian", "lhs": lhs.real, "rhs": rhs.real, "diff": abs(lhs - rhs)}]
    while len(rows) < count + 1:
        tau = rng.choice((2, 3, 5, -1, -2))
        a = rng.uniform(-0.6, 0.6)
        q = tau * a * a
        if abs(1 - q) < 0.2:
            continue
        u = -(1 + q) / (1 - q)
        x = _rand_sl2_r(rng, 0.6)
        base = conj_traceless(x, (-2 * a / (1 - q), 0.0, 0.0))
        center = (u,) + tuple(float(e) + rng.uniform(-0.5, 0.5) for e in base)
        scales = tuple(rng.uniform(0.7, 1.5) for _ in range(4))
        g = cayley_composite(ArchFn(center, scales), x, a, tau)
        lhs, rhs = poisson_check(g)
        rows.append({"g": f"composite tau={tau} a={a:.3f}", "lhs": lhs.real, "rhs": rhs.real,
                     "diff": abs(lhs - rhs)})
    worst = max(r["diff"] for r in rows)
    nontrivial = sum(abs(r["lhs"]) > 1e-6 for r in rows)
    return {"passed": worst < 1e-8 and nontrivial == len(rows), "rows": rows, "max_diff": worst}


def check_zeta(rng: random.Random) -> dict:
    primes = (2, 3, 5, 7, 11)
    chars = (QuadraticCharacter(1), QuadraticCharacter(-4), QuadraticCharacter(5))
    bad = []
    for p in primes:
        one = LineFn.tabulate(p, 0, 0, lambda b: 1)
        for kap in chars:
            for s in (1, 2):
                got = tate_zeta_local(one, kap, s).value
                if kap.is_ramified(p):
                    want = Fraction(0)
                else:
                    want = 1 / (1 - kap.local(p, p) * Fraction(p) ** (-s))
                if got != want:
                    bad.append((p, kap.D, s, str(got), str(want)))
    gauss = LineFn(REAL, evaluator=lambda b: np.exp(-math.pi * np.asarray(b, dtype=float) ** 2), radius=8.0)
    triv = QuadraticCharacter(1)
    arch = tate_zeta_local(gauss, triv, 1).value
    vol = Volumes().gm1
    residue = tate_zeta_global({REAL: gauss}, triv, 1, vol).residue
    pole = []
    for k in range(2, 6):
        h = 10.0 ** (-k)
        pole.append(h * tate_zeta_global({REAL: gauss}, triv, 1 + h, vol).value)
    devs = [abs(v - residue) for v in pole]
    shrinking = all(b < a for a, b in zip(devs, devs[1:]))
    ok = not bad and abs(arch - 1) < 1e-6 and devs[-1] < 1e-4 and shrinking
    return {"passed": ok, "finite_mismatches": bad, "arch_gaussian_s1": arch, "residue": residue,
            "pole_values": pole, "pole_deviation": devs}


# ---------------------------------------------------------------------------
# 8: orbital stabilization

def elliptic_basic_data(count: int = 10, nonunit: int = 7) -> list[tuple]:
    """(t0, tau, p): elliptic data whose slice discriminant is not a square at p.

    ``nonunit`` of them have p dividing the discriminant, where the tree sum has
    more than one vertex; the rest have unit discriminant.
    """
    deep, unit = [], []
    for t0 in range(2, 80):
        for tau in (-1, 2, 3, -2, 5):
            if classify(t0, QuadAlg(tau)).cls != ELLIPTIC:
                continue
            delta = slice_discriminant(t0, tau)
            for p in (3, 5, 7):
                if is_padic_square(delta, p):
                    continue
                v = vp(delta, p)
                if 2 <= v <= 4 and len(deep) < nonunit:
                    deep.append((Fraction(t0), tau, p))
                    break
                if v == 0 and len(unit) < count - nonunit:
                    unit.append((Fraction(t0), tau, p))
                    break
            if len(deep) + len(unit) == count:
                return deep + unit
    return deep + unit


def check_orbital(rng: random.Random) -> dict:
    rows = []
    ok = True
    for t0, tau, p in elliptic_basic_data(10):
        eta = elliptic_rep(t0, tau, 1)
        v4 = orbital_local(BasicFn(p), eta, depth=4).value
        v6 = orbital_local(BasicFn(p), eta, depth=6).value
        rows.append({"t0": str(t0), "tau": tau, "p": p, "depth4": str(v4), "depth6": str(v6)})
        ok = ok and v4 == v6
    conj = []
    for _ in range(3):
        p = 3
        t0, tau = rng.choice([(Fraction(3), -1), (Fraction(8), -1), (Fraction(5), 2)])
        eta = elliptic_rep(t0, tau, 1)
        ball = BallFn(p, 1, [((t0, 0, 1, slice_discriminant(t0, tau)), 1),
                             ((t0, 1, 1, 1), Fraction(1, 2))])
        g = _rand_sl2_z(rng)
        lhs = orbital_local(ball, eta.conjugate(g.inverse()), depth=4).value
        rhs = orbital_local(conjugated_fn(ball, g), eta, depth=4).value
        conj.append({"lhs": str(lhs), "rhs": str(rhs)})
        ok = ok and lhs == rhs
    return {"passed": ok and len(rows) == 10, "data": rows, "conjugation": conj}


# ---------------------------------------------------------------------------
# 9-11: fine expansion

def rss_test_functions() -> tuple[int, Fraction, list[GlobalTestFn]]:
    """tau = 2, t0 = 3: the diagonal point (3, 2, 0, 0)."""
    tau = 2
    fns = [
        gaussian_fn(tau, center=(3, 2, 0.3, 0), scales=(1, 1, 1.5, 1)),
        gaussian_fn(tau, center=(3.2, 1.5, -0.4, 0.2), scales=(1.2, 0.8, 1.0, 1.3)),
        gaussian_fn(tau, center=(2.9, 2.2, 0.0, 0.5), scales=(0.9, 1.1, 0.7, 0.9)),
        gaussian_fn(tau, center=(3, -2, 0.2, 0.2), scales=(1, 1, 1, 1)),
        gaussian_fn(tau, center=(3, 2, 0, 0), scales=(1, 1, 1, 1),
                    finite={5: BallFn(5, 1, [((3, 2, 0, 0), 1), ((3, 2, 5, 0), 2), ((3, 7, 0, 0), -1)])}),
    ]
    return tau, Fraction(3), fns


def unipotent_test_functions() -> tuple[int, list[GlobalTestFn]]:
    tau = 3
    fns = [
        gaussian_fn(tau, center=(1, 0.2, 0.3, -0.1), scales=(1, 1, 1.5, 1)),
        gaussian_fn(tau, center=(1.1, 0.0, 0.5, 0.2), scales=(0.8, 1.2, 1.0, 0.9)),
        gaussian_fn(tau, center=(0.9, -0.3, 0.0, 0.4), scales=(1.3, 1.0, 0.8, 1.1)),
        gaussian_fn(tau, center=(1, 0.2, 0.3, -0.1), scales=(1, 1, 1.5, 1),
                    finite={3: BallFn(3, 1, [((1, 0, 0, 0), 1), ((1, Fraction(1, 3), Fraction(2, 3), 0), 2),
                                             ((1, 1, 1, -1), -1)])}),
        gaussian_fn(tau, center=(1, 0, 0, 0), scales=(1, 1, 1, 1),
                    finite={5: BallFn(5, 1, [((1, 0, 0, 0), 1), ((1, 0, 1, 0), 3)])}),
    ]
    return tau, fns


def elliptic_test_functions() -> tuple[int, Fraction, list[GlobalTestFn]]:
    tau = -1
    fns = [
        gaussian_fn(tau, center=(3, 0, 2, -4)),
        gaussian_fn(tau, center=(3, 1, 2, -3), scales=(1, 1.2, 0.8, 1)),
        gaussian_fn(tau, center=(3, 0, -2, 4), scales=(1, 1, 1, 1.5),
                    finite={3: BallFn(3, 1, [((3, 0, 1, 1), 1), ((3, 0, 2, 2), 1)])}),
    ]
    return tau, Fraction(3), fns


def _affine_fit(Ts, Js) -> tuple[float, float]:
    """(second-difference residual, fitted slope) for three equally spaced T."""
    resid = abs(Js[0] - 2 * Js[1] + Js[2])
    slope = (Js[2] - Js[0]) / (Ts[2] - Ts[0])
    return resid, slope


def check_linearity(rng: random.Random) -> dict:
    rows = []
    Ts = (2.0, 3.0, 4.0)
    tau, t0, fns = elliptic_test_functions()
    d = classify(t0, QuadAlg(tau))
    for i, f in enumerate(fns):
        rep = assemble_elliptic(d, f)
        # elliptic orbits never meet the truncation, so J^T is the same orbital sum at every T
        Js = [sum(global_orbital(f, elliptic_rep(t0, tau, Fraction(c["xi"]))).value
                  for c in rep.diagnostics["classes"]) for _ in Ts]
        resid, slope = _affine_fit(Ts, Js)
        rows.append({"class": "elliptic", "f": i, "J": Js, "residual": resid, "slope": slope,
                     "analytic_slope": rep.record.slope})
    tau, t0, fns = rss_test_functions()
    d = classify(t0, QuadAlg(tau))
    for i, f in enumerate(fns[:3]):
        rep = assemble_rss(d, f)
        eta = iota_fiber(d, QuadAlg(tau))[0]
        Js = [rss_JT_direct(f, eta, T) for T in Ts]
        resid, slope = _affine_fit(Ts, Js)
        rows.append({"class": "rss", "f": i, "J": Js, "residual": resid, "slope": slope,
                     "analytic_slope": rep.record.slope, "analytic_J": [rep.record(T) for T in Ts]})
    tau, fns = unipotent_test_functions()
    for i, f in enumerate(fns[:3]):
        rep = assemble_unipotent(False, f)
        Js = [unipotent_JT_direct(False, f, T)[0] for T in Ts]
        resid, slope = _affine_fit(Ts, Js)
        rows.append({"class": "unipotent-plus", "f": i, "J": Js, "residual": resid, "slope": slope,
                     "analytic_slope": rep.record.slope, "analytic_J": [rep.record(T) for T in Ts]})
    ok = all(r["residual"] < 1e-6 and abs(r["slope"] - r["analytic_slope"]) < 1e-6 for r in rows)
    return {"passed": ok, "T": list(Ts), "rows": rows}


def check_slopes(rng: random.Random) -> dict:
    out = {}
    ok = True
    tau, t0, fns = rss_test_functions()
    d = classify(t0, QuadAlg(tau))
    ratios = [slope_crosscheck(d, f).ratio for f in fns]
    out["rss"] = ratios
    tau, fns = unipotent_test_functions()
    d1 = classify(1, QuadAlg(tau))
    ratios1 = [slope_crosscheck(d1, f).ratio for f in fns]
    out["unipotent-plus"] = ratios1
    tau_e, t0_e, fe = elliptic_test_functions()
    ell = slope_crosscheck(classify(t0_e, QuadAlg(tau_e)), fe[0])
    out["elliptic"] = {"slope": ell.slope, "descent": ell.descent}
    constants = {}
    for key in ("rss", "unipotent-plus"):
        rs = out[key]
        if any(r is None for r in rs):
            ok = False
            continue
        mean = sum(rs) / len(rs)
        spread = max(rs) - min(rs)
        constants[key] = mean
        ok = ok and len(rs) >= 5 and spread <= 1e-4 * abs(mean)
    ok = ok and ell.slope == 0 and ell.descent == 0
    out["constants"] = constants
    return {"passed": ok, **out}


def check_unipotent_identity(rng: random.Random) -> dict:
    tau, fns = unipotent_test_functions()
    f = fns[3]
    d = classify(1, QuadAlg(tau))
    diffs, truncs = [], []
    for i in range(10):
        x = _rand_sl2_r(rng, 0.8)
        T = rng.uniform(-1.0, 0.5)
        k = eval_truncated_kernel(f, d, x.map(float), T)
        diffs.append(k.difference)
        truncs.append(k.truncation)
    # characters ramified where f is basic contribute zero
    kappas = unipotent_characters(f, extra=(5, 7))
    vanish = []
    for kap in kappas:
        basic_ramified = [q for q in kap.ramified_primes() if q not in f.S]
        if basic_ramified:
            z = tate_zeta_global(kappa_average(f, kap), kap, 1).value
            vanish.append({"D": kap.D, "value": float(np.real(z))})
    vanish_ok = all(v["value"] == 0 for v in vanish)
    br = cancellation_bracket(f, 1.0)
    steps = [abs(b - a) for a, b in zip(br, br[1:])]
    converges = steps[-1] < 1e-4 and steps[-1] < steps[0]
    ok = max(diffs) < 1e-6 and vanish_ok and converges and len(vanish) > 0
    return {"passed": ok, "max_kernel_diff": max(diffs), "truncation_terms": truncs, "ramified_basic": vanish,
            "bracket": br, "bracket_steps": steps}


# ---------------------------------------------------------------------------
# 12: tori

def check_tori(rng: random.Random) -> dict:
    sweep = poisson_sweep(20, seed=rng.randint(0, 10 ** 6), N_values=[12, 5, 7, 8, 9, 10, 15, 16, 6, 11])
    cls = classification_sweep(100, seed=rng.randint(0, 10 ** 6))
    involution = True
    cores = [c for c in {squarefree_part(n) for n in range(-40, 41) if n}]
    for _ in range(100):
        E = QuadAlg(rng.choice([c for c in cores if c != 1]))
        L = QuadAlg(rng.choice(cores))
        involution = involution and reflect(reflect(L, E), E) == L
    return {"passed": sweep["passed"] and cls["passed"] and involution,
            "models": sweep["models"], "classification": cls, "involution": involution}


CRITERIA: list[tuple[int, str, float, Callable]] = [
    (1, "closed forms of tau_hat, sigma, Gamma on a 10^3 grid", 1.0, check_closed_forms),
    (2, "chamber indicator identities: absorption and contraction", 1.0, check_absorption_contraction),
    (3, "Cayley transform suite and measure scale", 5.0, check_cayley),
    (4, "Levi retraction reconstruction", 1.0, check_retraction),
    (5, "psi^T quadrature against closed form", 30.0, check_psi_T),
    (6, "Poisson summation for Gaussian and Cayley composites", 30.0, check_poisson),
    (7, "Tate zeta values and pole", 30.0, check_zeta),
    (8, "orbital stabilization and conjugation invariance", 60.0, check_orbital),
    (9, "linearity in T", 120.0, check_linearity),
    (10, "slope cross-check against parabolic descent", 120.0, check_slopes),
    (11, "unipotent kernel rewriting, ramified characters, cancellation", 120.0, check_unipotent_identity),
    (12, "tori: finite Poisson and classification", 5.0, check_tori),
]


def run_criterion(number: int, seed: int = DEFAULT_SEED) -> CriterionResult:
    for num, title, budget, fn in CRITERIA:
        if num == number:
            rng = random.Random(seed * 100 + num)
            start = time.perf_counter()
            try:
                details = fn(rng)
                passed = bool(details.pop("passed"))
            except Exception as exc:  # a crash is a failure, reported with its message
                details, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
            elapsed = time.perf_counter() - start
            details["within_budget"] = elapsed < budget
            return CriterionResult(num, title, passed and elapsed < budget, elapsed, budget, details)
    raise KeyError(f"no criterion {number}")


def _run_one(args):
    number, seed = args
    return run_criterion(number, seed)


def run_all(seed: int = DEFAULT_SEED, only=None, jobs: int = 1) -> list[CriterionResult]:
    numbers = [n for n, *_ in CRITERIA if only is None or n in only]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, [(n, seed) for n in numbers]))
    else:
        results = [run_criterion(n, seed) for n in numbers]
    return sorted(results, key=lambda r: r.number)
