"""Residual model in P^3, the net of quartics, and the cubic of K3 surfaces.

The residual map sends a curve point to (Q1 : Q2 : Q3 : Q4); its image is a
degree-10 space curve lying on a 3-dimensional net of quartics.  Each
syzygy-scheme K3 surface determines one quartic of the net (the unique
quartic relation among x1..x4 modulo the surface ideal), the parameter
sweep traces out a plane cubic in the net, and the quartic at the cubic's
unique singular point is certified smooth by a Macaulay resultant of its
partial derivatives.

All elimination here is exact: resultants of univariate specialisations are
Sylvester determinants over F_p, binary forms are recovered by Vandermonde
interpolation, and root finding is a full scan over F_p.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ffield import Echelon, det_mod, kernel_mod, rank_mod, solve_mod
from .k3_syzygy import K3Surface
from .plane_curve import monomials as plane_monomials
from .plane_curve import _power_table, as_plane_model, evaluate_form
from .scroll import GENERIC_E, cox_slice


class NetError(RuntimeError):
    pass


class GammaError(RuntimeError):
    pass


class ResultantDegenerateError(RuntimeError):
    pass


# --- small polynomial helpers ------------------------------------------------


@lru_cache(maxsize=None)
def nvar_monomials(nvars: int, d: int) -> tuple:
    """Exponent tuples of degree d in nvars variables, lexicographically
    descending in the earlier variables."""
    if nvars == 1:
        return ((d,),)
    out = []
    for e in range(d, -1, -1):
        for rest in nvar_monomials(nvars - 1, d - e):
            out.append((e,) + rest)
    return tuple(out)


def eval_nvar(coeffs, nvars: int, d: int, points: np.ndarray, p: int) -> np.ndarray:
    """Evaluate a degree-d form in nvars variables; points is (nvars, n)."""
    n = points.shape[1]
    tables = [_power_table(points[i] % p, d, p) for i in range(nvars)]
    vals = np.zeros(n, dtype=np.int64)
    for c, expo in zip(coeffs, nvar_monomials(nvars, d)):
        c = int(c) % p
        if not c:
            continue
        term = np.full(n, c, dtype=np.int64)
        for var, e in enumerate(expo):
            if e:
                term = term * tables[var][e] % p
        vals = (vals + term) % p
    return vals


def partial_derivative(coeffs, nvars: int, d: int, var: int, p: int) -> np.ndarray:
    src = nvar_monomials(nvars, d)
    dst = {m: i for i, m in enumerate(nvar_monomials(nvars, d - 1))}
    out = np.zeros(len(dst), dtype=np.int64)
    for c, expo in zip(coeffs, src):
        c = int(c) % p
        if not c or expo[var] == 0:
            continue
        lowered = tuple(e - 1 if i == var else e for i, e in enumerate(expo))
        out[dst[lowered]] = (out[dst[lowered]] + c * expo[var]) % p
    return out


def substitute_linear(coeffs, nvars: int, d: int, t_mat, p: int) -> np.ndarray:
    """Coefficients of F(T x) for a degree-d form F in nvars variables."""
    t_mat = [[int(v) % p for v in row] for row in t_mat]
    index = {m: i for i, m in enumerate(nvar_monomials(nvars, d))}
    out = np.zeros(len(index), dtype=np.int64)

    def mul(a: dict, b: dict) -> dict:
        res: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                key = tuple(u + v for u, v in zip(ea, eb))
                res[key] = (res.get(key, 0) + ca * cb) % p
        return res

    lin = [
        {tuple(1 if v == j else 0 for v in range(nvars)): t_mat[i][j]
         for j in range(nvars) if t_mat[i][j]}
        for i in range(nvars)
    ]
    for c, expo in zip(coeffs, nvar_monomials(nvars, d)):
        c = int(c) % p
        if not c:
            continue
        term = {tuple(0 for _ in range(nvars)): c}
        for var, e in enumerate(expo):
            for _ in range(e):
                term = mul(term, lin[var])
        for key, cv in term.items():
            out[index[key]] = (out[index[key]] + cv) % p
    return out


def random_gl(n: int, rng: random.Random, p: int):
    while True:
        t = [[rng.randrange(p) for _ in range(n)] for _ in range(n)]
        if det_mod(np.array(t), p):
            return t


def sylvester_resultant(f, g, p: int) -> int:
    """Resultant of univariate f, g (coefficient lists, highest degree first)."""
    f = [int(c) % p for c in f]
    g = [int(c) % p for c in g]
    m, n = len(f) - 1, len(g) - 1
    if m < 0 or n < 0:
        return 0
    size = m + n
    if size == 0:
        return 1
    mat = np.zeros((size, size), dtype=np.int64)
    for i in range(n):
        mat[i, i: i + m + 1] = f
    for i in range(m):
        mat[n + i, i: i + n + 1] = g
    return det_mod(mat, p)


def interpolate_poly(xs, ys, degree: int, p: int) -> np.ndarray:
    """Coefficients (highest first) of the unique poly of degree <= degree
    through the points."""
    v = np.zeros((len(xs), degree + 1), dtype=np.int64)
    for r, x in enumerate(xs):
        acc = 1
        for c in range(degree, -1, -1):
            v[r, c] = acc
            acc = acc * x % p
    sol = solve_mod(v, np.array(ys, dtype=np.int64) % p, p)
    if sol is None:
        raise NetError("interpolation failed")
    return sol


def binary_form_divide_linear(coeffs, root, p: int):
    """Divide a binary form (coefficient list, highest s-power first, indexed
    by t-degree) by (b*s - a*t) for the projective root (a : b).

    Returns the quotient coefficients; raises if the division has remainder.
    """
    a, b = int(root[0]) % p, int(root[1]) % p
    d = len(coeffs) - 1
    coeffs = [int(c) % p for c in coeffs]
    if b == 0:
        # dividing by t up to scalar: the s^d coefficient must vanish
        if coeffs[0] != 0:
            raise NetError("binary form not divisible: (1:0) is not a root")
        inv = pow((-a) % p, -1, p)
        return [c * inv % p for c in coeffs[1:]]
    # synthetic division viewing the form as a polynomial in s over t
    binv = pow(b, -1, p)
    quot = [0] * d
    rem = 0
    carry = 0
    # f = sum coeffs[k] s^(d-k) t^k; process k = 0..d
    for k in range(d):
        cur = (coeffs[k] + carry) % p
        quot[k] = cur * binv % p
        carry = quot[k] * a % p
    rem = (coeffs[d] + carry) % p
    if rem != 0:
        raise NetError("binary form not divisible: remainder nonzero")
    return quot


def binary_form_roots(coeffs, p: int) -> list:
    """All projective F_p-roots (a : b) of a binary form, without multiplicity."""
    d = len(coeffs) - 1
    roots = []
    if coeffs[0] % p == 0:
        roots.append((1, 0))
    u = np.arange(p, dtype=np.int64)
    vals = np.zeros(p, dtype=np.int64)
    for c in coeffs:
        vals = (vals * u + int(c) % p) % p
    for a in np.nonzero(vals == 0)[0]:
        roots.append((int(a), 1))
    return roots


# --- residual model and the net ----------------------------------------------


@dataclass(frozen=True)
class QuarticNet:
    """3-dimensional space of quartics through the residual curve model.

    The P^3 coordinate frame identifies y_i with the quartic adjoint Q_i."""

    prime: int
    basis: np.ndarray  # 3 x 35 over nvar_monomials(4, 4)

    @property
    def coordinate_frame(self):
        return ("Q1", "Q2", "Q3", "Q4")


def residual_image(model, coords, points) -> np.ndarray:
    """(4, n) array of images under (Q1 : Q2 : Q3 : Q4)."""
    pm = as_plane_model(model)
    pts = np.asarray(points, dtype=np.int64)
    rows = np.stack(
        [evaluate_form(q, coords.q_degree, pts, pm.prime) for q in coords.quartics]
    )
    if np.any(~np.any(rows, axis=0)):
        raise NetError("basepoint hit: a sample maps to (0:0:0:0)")
    return rows


def quartic_net(image_points: np.ndarray, p: int) -> QuarticNet:
    """Kernel of the 35-monomial evaluation matrix; must be 3-dimensional."""
    n = image_points.shape[1]
    if n < 45:
        raise NetError("need at least 45 image points")
    tables = [_power_table(image_points[i] % p, 4, p) for i in range(4)]
    monos = nvar_monomials(4, 4)
    mat = np.empty((len(monos), n), dtype=np.int64)
    for r, expo in enumerate(monos):
        acc = np.ones(n, dtype=np.int64)
        for var, e in enumerate(expo):
            if e:
                acc = acc * tables[var][e] % p
        mat[r] = acc
    basis = kernel_mod(mat.T, p)
    if len(basis) != 3:
        raise NetError(f"unexpected net dimension {len(basis)}")
    # maximal-rank check one degree down: no cubics through the image
    cmonos = nvar_monomials(4, 3)
    cmat = np.empty((len(cmonos), n), dtype=np.int64)
    for r, expo in enumerate(cmonos):
        acc = np.ones(n, dtype=np.int64)
        for var, e in enumerate(expo):
            if e:
                acc = acc * tables[var][e] % p
        cmat[r] = acc
    if len(kernel_mod(cmat.T, p)) != 0:
        raise NetError("cubics through the residual model: not maximal rank")
    return QuarticNet(p, np.stack(list(basis)))


def verify_net_on_points(net: QuarticNet, image_points: np.ndarray) -> bool:
    p = net.prime
    vals = np.stack(
        [eval_nvar(vec, 4, 4, image_points, p) for vec in net.basis]
    )
    return not np.any(vals)


def residual_degree(model, coords, seed: int = 0, tries: int = 8) -> int:
    """Degree of the residual model, by slicing with a random plane.

    Res_z of the plane curve and a pulled-back net member is a binary form
    of degree d*(d-4); every node lying on the member divides it twice, the
    pencil point q divides it q_mult times when the member passes through q,
    and the leftover degree is the plane-section degree of the image."""
    pm = as_plane_model(model)
    p, d = pm.prime, pm.degree
    rng = random.Random(pm.seed * 65537 + seed + 13)
    q_degree = coords.q_degree
    for _ in range(tries):
        a = [rng.randrange(p) for _ in range(4)]
        combo = np.zeros_like(coords.quartics[0])
        for ai, q in zip(a, coords.quartics):
            combo = (combo + ai * q) % p
        t3 = random_gl(3, rng, p)
        fcur = substitute_linear(pm.coeffs, 3, d, t3, p)
        fqua = substitute_linear(combo, 3, q_degree, t3, p)
        if eval_nvar(fcur, 3, d, np.array([[0], [0], [1]]), p)[0] == 0:
            continue
        if eval_nvar(fqua, 3, q_degree, np.array([[0], [0], [1]]), p)[0] == 0:
            continue
        tinv = np.array(
            [solve_mod(np.array(t3), e, p) for e in np.eye(3, dtype=np.int64)]
        ).T
        divisions = [(n, 2) for n in pm.nodes]
        if pm.q_mult > 2:
            # the adjoint system vanishes at q, so the slice picks up q with
            # intersection multiplicity q_mult
            divisions.append((pm.q, pm.q_mult))
        moved = [
            (tuple(int(v) for v in (tinv @ np.array(pt)) % p), mult)
            for pt, mult in divisions
        ]
        projections = [((x, y), mult) for ((x, y, _z), mult) in moved]
        keys = set()
        ok = True
        for ((x, y), _mult) in projections:
            key = (x * pow(y, -1, p) % p, 1) if y else (1, 0)
            if key in keys:
                ok = False
            keys.add(key)
        if not ok:
            continue
        try:
            return _sliced_degree(fcur, d, fqua, q_degree, projections, p)
        except NetError:
            continue
    raise NetError("residual degree check failed on every slicing attempt")


def _sliced_degree(fcur, d: int, fqua, dq: int, projections, p: int) -> int:
    monos_d = plane_monomials(d)
    monos_q = plane_monomials(dq)
    total = d * dq

    def z_poly(coeffs, monos, x0, y0):
        by_z: dict = {}
        xs = {e: pow(x0, e, p) for e in range(d + 1)}
        ys = {e: pow(y0, e, p) for e in range(d + 1)}
        for c, (i, j, k) in zip(coeffs, monos):
            c = int(c) % p
            if c:
                by_z[k] = (by_z.get(k, 0) + c * xs[i] % p * ys[j]) % p
        deg = max(by_z) if by_z else 0
        return [by_z.get(k, 0) for k in range(deg, -1, -1)]

    xs, vals = [], []
    u = 0
    while len(xs) < total + 1 and u < p:
        fz = z_poly(fcur, monos_d, u, 1)
        gz = z_poly(fqua, monos_q, u, 1)
        if len(fz) == d + 1 and len(gz) == dq + 1:
            xs.append(u)
            vals.append(sylvester_resultant(fz, gz, p))
        u += 1
    if len(xs) < total + 1:
        raise NetError("not enough clean specialisations for the resultant")
    # coefficient k multiplies x^(total-k) y^k (from evaluation at y = 1)
    form = list(interpolate_poly(xs, vals, total, p))
    # exact divisibility by every singular projection is asserted
    for ((x0, y0), mult) in projections:
        root = (x0 * pow(y0, -1, p) % p, 1) if y0 else (1, 0)
        for _ in range(mult):
            form = binary_form_divide_linear(form, (root[0], root[1]), p)
    if not any(c % p for c in form):
        raise NetError("sliced resultant vanished identically")
    return len(form) - 1


# --- the quartic attached to one K3 surface ----------------------------------


def image_quartic(surface: K3Surface, net: QuarticNet) -> tuple:
    """The unique quartic F(y1..y4) with F(x1..x4) in the surface ideal.

    Computed in the saturated slice of bidegree (4, -4): membership is
    decided after pushing with all degree-2 monomials in t into the
    (4, -2) slice, where the generated ideal is certified saturated.
    Returns (coefficients over nvar_monomials(4,4), coordinates in the net).
    """
    p = surface.prime
    surface.verify_slice_saturated(4, -2)
    span = surface.slice_span(4, -2)
    monos42 = cox_slice(GENERIC_E, 4, -2)
    pos42 = {m: i for i, m in enumerate(monos42)}
    ech = Echelon(len(monos42), p)
    for row in span:
        ech.add(row)
    monos44 = cox_slice(GENERIC_E, 4, -4)
    quartic_monos = nvar_monomials(4, 4)
    if len(monos44) != len(quartic_monos):
        raise NetError("slice (4,-4) is not the space of x-quartics")
    conditions = []
    for beta in ((2, 0), (1, 1), (0, 2)):
        block = np.zeros((len(monos44), len(monos42)), dtype=np.int64)
        for r, (alpha, b0) in enumerate(monos44):
            shifted = (alpha, (b0[0] + beta[0], b0[1] + beta[1]))
            vec = np.zeros(len(monos42), dtype=np.int64)
            vec[pos42[shifted]] = 1
            block[r] = ech._reduce(vec)
        conditions.append(block)
    stacked = np.concatenate(conditions, axis=1)
    kernel = kernel_mod(stacked.T, p)
    if len(kernel) != 1:
        raise NetError(f"relation space not 1-dimensional: {len(kernel)}")
    fvec = kernel[0] % p
    # translate cox monomials (pure x-part) to quartic monomials in y1..y4
    out = np.zeros(len(quartic_monos), dtype=np.int64)
    qpos = {m: i for i, m in enumerate(quartic_monos)}
    for c, (alpha, _beta) in zip(fvec, monos44):
        if int(c):
            out[qpos[alpha[:4]]] = int(c)
    coeffs_in_net = solve_mod(net.basis.T, out, p)
    if coeffs_in_net is None:
        raise NetError("surface quartic does not lie in the net")
    return out, coeffs_in_net % p


# --- the plane cubic of K3 surfaces ------------------------------------------


@dataclass(frozen=True)
class GammaCurve:
    """Cubic in the net plane traced by the pencil of syzygy-scheme surfaces."""

    prime: int
    cubic: np.ndarray      # 10 coefficients over nvar_monomials(3, 3)
    samples: tuple         # ((lam, mu), net coordinates) pairs


def fit_gamma(samples, p: int, holdout: int = 3) -> GammaCurve:
    """Unique cubic through the sampled net points; fails if a conic fits,
    if no cubic fits, or if a holdout sample misses the cubic."""
    if len(samples) < 12 + holdout:
        raise GammaError("need at least 15 samples (12 fit + 3 holdout)")
    fit, held = samples[:-holdout], samples[-holdout:]
    pts = np.stack([np.asarray(c) for (_par, c) in fit]).T
    cub_rows = np.stack(
        [eval_nvar(_unit(10, i), 3, 3, pts, p) for i in range(10)]
    )
    kernel = kernel_mod(cub_rows.T, p)
    if len(kernel) == 0:
        raise GammaError("no cubic through the sampled quartics")
    if len(kernel) > 1:
        raise GammaError("cubic through the samples is not unique")
    con_rows = np.stack(
        [eval_nvar(_unit(6, i), 3, 2, pts, p) for i in range(6)]
    )
    if len(kernel_mod(con_rows.T, p)) != 0:
        raise GammaError("degree too low: a conic fits the samples")
    cubic = kernel[0]
    held_pts = np.stack([np.asarray(c) for (_par, c) in held]).T
    if np.any(eval_nvar(cubic, 3, 3, held_pts, p)):
        raise GammaError("holdout sample violates the fitted cubic")
    gamma = GammaCurve(p, cubic, tuple((tuple(par), tuple(int(v) for v in c)) for par, c in samples))
    if _linear_factor_exists(gamma):
        raise GammaError("cubic has a rational linear factor: not irreducible")
    return gamma


def _unit(n, i):
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


def _linear_factor_exists(gamma: GammaCurve) -> bool:
    """Search for linear factors over F_p on three independent line pairs.

    If ell divides the cubic then the point of ell on any line m is among
    the cubic's points on m, so candidate factors are lines through pairs of
    such points; a line meeting the cubic in no rational point at all rules
    a rational factor out immediately.
    """
    p = gamma.prime
    rng = random.Random(4242)
    rounds = 0
    for _ in range(10):
        if rounds == 3:
            break
        pts1 = _cubic_points_on_line(gamma, rng, p)
        pts2 = _cubic_points_on_line(gamma, rng, p)
        if pts1 is None or pts2 is None:
            continue
        if not pts1 or not pts2:
            return False
        for a in pts1:
            for b in pts2:
                if a != b and _line_divides_cubic(gamma, a, b, p):
                    return True
        rounds += 1
    if rounds == 0:
        raise GammaError("linear factor search degenerate")
    return False


def _cubic_points_on_line(gamma: GammaCurve, rng: random.Random, p: int):
    a = np.array([rng.randrange(p) for _ in range(3)], dtype=np.int64)
    b = np.array([rng.randrange(p) for _ in range(3)], dtype=np.int64)
    if rank_mod(np.stack([a, b]), p) != 2:
        return None
    coeffs = _restrict_cubic(gamma.cubic, a, b, p)
    if not any(coeffs):
        return None
    pts = []
    for (s, t) in binary_form_roots(coeffs, p):
        pts.append(tuple(int(v) for v in (s * a + t * b) % p))
    return pts


def _restrict_cubic(cubic, a, b, p):
    """Binary cubic F(s*a + t*b), coefficients by t-degree."""
    out = [0, 0, 0, 0]
    for c, expo in zip(cubic, nvar_monomials(3, 3)):
        c = int(c) % p
        if not c:
            continue
        term = [c]
        for var, e in enumerate(expo):
            for _ in range(e):
                nxt = [0] * (len(term) + 1)
                for i, cv in enumerate(term):
                    nxt[i] = (nxt[i] + cv * int(a[var])) % p
                    nxt[i + 1] = (nxt[i + 1] + cv * int(b[var])) % p
                term = nxt
        for i, cv in enumerate(term):
            out[i] = (out[i] + cv) % p
    return out


def _line_divides_cubic(gamma: GammaCurve, a, b, p: int) -> bool:
    """Does the line through a and b lie on the cubic?  A cubic vanishing at
    4 distinct points of a line contains it."""
    a = np.array(a, dtype=np.int64)
    b = np.array(b, dtype=np.int64)
    count = 0
    for t in range(5):
        pt = (a + t * b) % p
        if not np.any(pt):
            continue
        if eval_nvar(gamma.cubic, 3, 3, pt.reshape(3, 1), p)[0] == 0:
            count += 1
        else:
            return False
    return count >= 4


def gamma_singular_point(gamma: GammaCurve, tries: int = 8) -> dict:
    """The unique singular point of the cubic, by resultant elimination.

    Raises GammaError when the rational singular count is not exactly one.
    """
    p = gamma.prime
    rng = random.Random(int(gamma.cubic.sum()) % 2**31 + 99)
    for _ in range(tries):
        t3 = random_gl(3, rng, p)
        moved = substitute_linear(gamma.cubic, 3, 3, t3, p)
        parts = [partial_derivative(moved, 3, 3, v, p) for v in range(3)]
        if any(not np.any(q) for q in parts):
            continue
        res = _resultant_w(parts[0], parts[1], p)
        if res is None or not any(res):
            continue
        candidates = set()
        for (u0, v0) in binary_form_roots(res, p):
            for w0 in _common_quadratic_roots(parts, u0, v0, p):
                pt = _normalize_point((u0, v0, w0), p)
                if pt is not None:
                    candidates.add(pt)
        singular = []
        for pt in sorted(candidates):
            arr = np.array(pt, dtype=np.int64).reshape(3, 1)
            if all(eval_nvar(q, 3, 2, arr, p)[0] == 0 for q in parts):
                if eval_nvar(moved, 3, 3, arr, p)[0] == 0:
                    singular.append(pt)
        if len(singular) != 1:
            raise GammaError(f"unexpected singular count: {len(singular)}")
        moved_pt = singular[0]
        tinv = np.array(
            [solve_mod(np.array(t3), e, p) for e in np.eye(3, dtype=np.int64)]
        ).T
        original = _normalize_point(tuple((np.array(t3) @ np.array(moved_pt)) % p), p)
        mult = _quadratic_part_rank(gamma.cubic, original, p)
        return {"point": original, "quadratic_rank": mult, "is_node": mult == 2}
    raise GammaError("singular point elimination degenerate after retries")


def _resultant_w(q1, q2, p: int):
    """Res_w of two ternary conics as a binary quartic in (u, v), by
    interpolation; None when the specialisations degenerate."""

    def w_poly(coeffs, u0, v0):
        by_w: dict = {}
        for c, (i, j, k) in zip(coeffs, nvar_monomials(3, 2)):
            c = int(c) % p
            if c:
                by_w[k] = (by_w.get(k, 0) + c * pow(u0, i, p) * pow(v0, j, p)) % p
        deg = max(by_w) if by_w else 0
        return [by_w.get(k, 0) for k in range(deg, -1, -1)]

    xs, vals = [], []
    u0 = 0
    while len(xs) < 5 and u0 < p:
        f = w_poly(q1, u0, 1)
        g = w_poly(q2, u0, 1)
        if len(f) == 3 and len(g) == 3:
            xs.append(u0)
            vals.append(sylvester_resultant(f, g, p))
        u0 += 1
    if len(xs) < 5:
        return None
    return list(interpolate_poly(xs, vals, 4, p))


def _common_quadratic_roots(parts, u0, v0, p: int) -> list:
    """w-values solving all three partials at (u0 : v0 : w)."""
    polys = []
    for q in parts:
        by_w = [0, 0, 0]
        for c, (i, j, k) in zip(q, nvar_monomials(3, 2)):
            c = int(c) % p
            if c:
                by_w[k] = (by_w[k] + c * pow(u0, i, p) * pow(v0, j, p)) % p
        polys.append(by_w)
    roots = None
    for by_w in polys:
        if not any(by_w):
            continue
        cur = set()
        c0, c1, c2 = by_w[0], by_w[1], by_w[2]  # c2 w^2 + c1 w + c0
        if c2 == 0 and c1 == 0:
            continue
        if c2 == 0:
            cur.add((-c0) * pow(c1, -1, p) % p)
        else:
            disc = (c1 * c1 - 4 * c2 * c0) % p
            r = _sqrt_mod(disc, p)
            if r is None:
                cur = set()
            else:
                inv = pow(2 * c2 % p, -1, p)
                cur.add((-c1 + r) * inv % p)
                cur.add((-c1 - r) * inv % p)
        roots = cur if roots is None else roots & cur
        if not roots:
            return []
    return sorted(roots) if roots else []


def _sqrt_mod(a: int, p: int):
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) == 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _normalize_point(pt, p: int):
    vec = [int(v) % p for v in pt]
    last = next((i for i in range(len(vec) - 1, -1, -1) if vec[i]), None)
    if last is None:
        return None
    inv = pow(vec[last], -1, p)
    return tuple(v * inv % p for v in vec)


def _quadratic_part_rank(cubic, point, p: int) -> int:
    """Rank of the quadratic part of the cubic at a singular point, computed
    in an affine chart around the point (2 = ordinary node)."""
    chart = next(i for i in range(2, -1, -1) if point[i])
    t3 = [[0] * 3 for _ in range(3)]
    others = [i for i in range(3) if i != chart]
    # affine chart: x_chart = 1, translated so the point is the origin
    for col, var in enumerate(others):
        t3[var][col] = 1
    for i in range(3):
        t3[i][2] = point[i]
    moved = substitute_linear(cubic, 3, 3, t3, p)
    # now the singular point is (0 : 0 : 1); read the coefficient of z * (quadratic in x, y)
    hess = np.zeros((2, 2), dtype=np.int64)
    index = {m: i for i, m in enumerate(nvar_monomials(3, 3))}
    hess[0, 0] = 2 * moved[index[(2, 0, 1)]] % p
    hess[1, 1] = 2 * moved[index[(0, 2, 1)]] % p
    hess[0, 1] = hess[1, 0] = moved[index[(1, 1, 1)]] % p
    return rank_mod(hess, p)


# --- gamma as a parametrised map and the singular fibers ----------------------


def fit_gamma_map(samples, p: int) -> np.ndarray:
    """Binary cubics (g1, g2, g3) with gamma(lam:mu) = (g1 : g2 : g3).

    Fitted from cross relations g_i y_j - g_j y_i = 0 at every sample; the
    solution space must be 1-dimensional.
    """
    rows = []
    for (lam, mu), y in samples:
        powers = [
            pow(lam, 3 - k, p) * pow(mu, k, p) % p for k in range(4)
        ]
        for i, j in itertools.combinations(range(3), 2):
            row = np.zeros(12, dtype=np.int64)
            row[4 * i: 4 * i + 4] = [int(y[j]) * w % p for w in powers]
            row[4 * j: 4 * j + 4] = [(-int(y[i])) % p * w % p for w in powers]
            rows.append(row)
    kernel = kernel_mod(np.stack(rows), p)
    if len(kernel) != 1:
        raise GammaError(f"gamma parametrisation not unique: {len(kernel)}")
    return kernel[0].reshape(3, 4) % p


def singular_fiber_parameters(gmap: np.ndarray, point, samples, p: int) -> list:
    """The parameters (lam : mu) mapping to the singular point.

    Candidates are roots of the cross forms g_i p_j - g_j p_i; each is
    verified against the parametrisation, and exactly two must survive.
    """
    point = [int(v) % p for v in point]
    cross = []
    for i, j in itertools.combinations(range(3), 2):
        form = [
            (int(gmap[i, k]) * point[j] - int(gmap[j, k]) * point[i]) % p
            for k in range(4)
        ]
        if any(form):
            cross.append(form)
    if not cross:
        raise GammaError("cross forms vanish identically")
    candidates = set(binary_form_roots(cross[0], p))
    for form in cross[1:]:
        candidates &= set(binary_form_roots(form, p))
    verified = []
    for (lam, mu) in sorted(candidates):
        img = [
            sum(int(gmap[i, k]) * pow(lam, 3 - k, p) * pow(mu, k, p) for k in range(4)) % p
            for i in range(3)
        ]
        if _normalize_point(img, p) == _normalize_point(point, p):
            verified.append((lam, mu))
    if len(verified) != 2:
        raise GammaError(f"preimage count != 2: found {len(verified)}")
    return verified


# --- Macaulay resultant smoothness certificate --------------------------------


def macaulay_resultant_smooth(quartic, p: int, seed: int = 0, tries: int = 6) -> bool:
    """True iff the Macaulay resultant of the four cubic partials is nonzero.

    A nonzero resultant certifies that the partials have no common zero over
    the algebraic closure, i.e. the quartic surface is smooth (p does not
    divide 4, so Euler's relation applies).  The resultant is det(M)/det(E)
    for the classical degree-9 Macaulay matrix M and its non-reduced
    submatrix E; when det(E) vanishes the quartic is moved by a random
    coordinate change, which rescales the resultant by a nonzero factor.
    """
    quartic = np.asarray(quartic, dtype=np.int64) % p
    if not np.any(quartic):
        raise ValueError("zero quartic")
    rng = random.Random(seed * 2654435761 % 2**31 + 17)
    for attempt in range(tries):
        moved = quartic if attempt == 0 else substitute_linear(
            quartic, 4, 4, random_gl(4, rng, p), p
        )
        parts = [partial_derivative(moved, 4, 4, v, p) for v in range(4)]
        if any(not np.any(q) for q in parts):
            return False  # a vanishing partial forces a common zero
        verdict = _macaulay_ratio(parts, p)
        if verdict is not None:
            return verdict
    raise ResultantDegenerateError(
        "resultant degenerate: denominator minor vanished for every change of coordinates"
    )


def _macaulay_ratio(cubics, p: int):
    monos9 = nvar_monomials(4, 9)
    monos3 = nvar_monomials(4, 3)
    idx9 = {m: i for i, m in enumerate(monos9)}
    size = len(monos9)
    mat = np.zeros((size, size), dtype=np.int64)
    non_reduced = []
    for r, m in enumerate(monos9):
        divisors = [i for i in range(4) if m[i] >= 3]
        i = divisors[0]
        if len(divisors) >= 2:
            non_reduced.append(r)
        quotient = tuple(e - 3 if v == i else e for v, e in enumerate(m))
        for c, cm in zip(cubics[i], monos3):
            c = int(c) % p
            if c:
                target = tuple(a + b for a, b in zip(quotient, cm))
                mat[r, idx9[target]] = c
    det_m = det_mod(mat, p)
    sub = mat[np.ix_(non_reduced, non_reduced)]
    det_e = det_mod(sub, p)
    if det_e == 0:
        return None
    return det_m != 0
