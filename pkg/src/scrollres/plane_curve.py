"""Plane models of genus-9 curves with a degree-6 pencil over F_p.

Two interpolation constructions are provided.

* Octic with 12 ordinary nodes: the pencil is cut by lines through a
  distinguished node q (residual degree 8 - 2 = 6).  12 random points impose
  36 independent conditions on the 45-dimensional octic space, leaving the
  expected 9-dimensional system.

* Nonic with one ordinary triple point and 16 ordinary nodes: the pencil is
  cut by lines through the triple point (residual degree 9 - 3 = 6).  The 54
  conditions leave a unique curve.

Both realise a genus-9 curve with a g^1_6; the nonic family is the larger
one (it dominates the moduli of pairs), and the pipeline uses it as the
primary model.  Every structural claim (condition ranks, ordinariness of
each singular point, adjoint dimensions) is asserted, never assumed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ffield import check_prime, kernel_mod, rank_mod

GENUS = 9
PENCIL_DEGREE = 6


class DegenerateConfigurationError(RuntimeError):
    """Singularity configuration failed a rank or ordinariness check."""


class InsufficientRationalPointsError(RuntimeError):
    """Point sampling exhausted its retry budget (prime too small)."""


@lru_cache(maxsize=None)
def monomials(d: int) -> tuple:
    """Exponent triples (i, j, k) with i+j+k = d, in a fixed order."""
    out = []
    for i in range(d, -1, -1):
        for j in range(d - i, -1, -1):
            out.append((i, j, d - i - j))
    return tuple(out)


def monomial_count(d: int) -> int:
    return (d + 1) * (d + 2) // 2


def _power_table(values: np.ndarray, max_exp: int, p: int) -> np.ndarray:
    """table[e] = values**e mod p for 0 <= e <= max_exp."""
    n = values.shape[0]
    table = np.empty((max_exp + 1, n), dtype=np.int64)
    table[0] = 1
    for e in range(1, max_exp + 1):
        table[e] = table[e - 1] * values % p
    return table


def evaluate_form(coeffs, d: int, points, p: int) -> np.ndarray:
    """Evaluate a degree-d form at each point; points is an (n, 3) array."""
    pts = np.asarray(points, dtype=np.int64) % p
    if pts.ndim == 1:
        pts = pts.reshape(1, 3)
    monos = monomials(d)
    px = _power_table(pts[:, 0], d, p)
    py = _power_table(pts[:, 1], d, p)
    pz = _power_table(pts[:, 2], d, p)
    vals = np.zeros(pts.shape[0], dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.int64) % p
    for c, (i, j, k) in zip(coeffs, monos):
        if c:
            vals = (vals + c * (px[i] * py[j] % p) % p * pz[k]) % p
    return vals


def _falling(n: int, k: int, p: int) -> int:
    out = 1
    for t in range(k):
        out = out * (n - t) % p
    return out


def derivative_row(d: int, order, point, p: int) -> np.ndarray:
    """Row of the linear functional F -> (partial^order F)(point).

    order is a multi-index (a, b, c); the row is indexed by monomials(d).
    """
    a, b, c = order
    x, y, z = (int(v) % p for v in point)
    row = np.zeros(monomial_count(d), dtype=np.int64)
    for idx, (i, j, k) in enumerate(monomials(d)):
        if i < a or j < b or k < c:
            continue
        coef = _falling(i, a, p) * _falling(j, b, p) % p * _falling(k, c, p) % p
        val = pow(x, i - a, p) * pow(y, j - b, p) % p * pow(z, k - c, p) % p
        row[idx] = coef * val % p
    return row


def _multi_indices_below(order: int):
    out = []
    for total in range(order):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                out.append((a, b, total - a - b))
    return out


def _multi_indices_exact(order: int):
    out = []
    for a in range(order, -1, -1):
        for b in range(order - a, -1, -1):
            out.append((a, b, order - a - b))
    return out


def condition_matrix(d: int, conditions, p: int) -> np.ndarray:
    """Vanishing conditions: multiplicity m at a point imposes all partials
    of order < m.  Rows are stacked in condition order."""
    rows = []
    for point, mult in conditions:
        for order in _multi_indices_below(mult):
            rows.append(derivative_row(d, order, point, p))
    if not rows:
        return np.zeros((0, monomial_count(d)), dtype=np.int64)
    return np.stack(rows)


@dataclass(frozen=True)
class PlaneCurveModel:
    """Plane curve with one distinguished singular point q of multiplicity
    q_mult cutting the pencil, plus ordinary nodes elsewhere."""

    prime: int
    degree: int
    coeffs: np.ndarray
    q: tuple
    q_mult: int
    nodes: tuple   # the double points other than q
    seed: int

    @property
    def pencil_degree(self) -> int:
        return self.degree - self.q_mult

    def singular_points(self):
        return ((self.q, self.q_mult),) + tuple((n, 2) for n in self.nodes)

    def genus(self) -> int:
        d = self.degree
        delta = math.comb(self.q_mult, 2) + len(self.nodes)
        return (d - 1) * (d - 2) // 2 - delta

    def banned_points(self):
        return {self.q, *self.nodes}

    def to_json(self) -> str:
        return json.dumps(
            {
                "prime": self.prime,
                "degree": self.degree,
                "coeffs": [int(c) for c in self.coeffs],
                "q": [int(v) for v in self.q],
                "q_mult": self.q_mult,
                "nodes": [[int(v) for v in n] for n in self.nodes],
                "seed": self.seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PlaneCurveModel":
        data = json.loads(text)
        return cls(
            prime=data["prime"],
            degree=data["degree"],
            coeffs=np.array(data["coeffs"], dtype=np.int64),
            q=tuple(data["q"]),
            q_mult=data["q_mult"],
            nodes=tuple(tuple(v) for v in data["nodes"]),
            seed=data["seed"],
        )


@dataclass(frozen=True)
class NodalOcticModel:
    """Plane octic with 12 ordinary nodes; q_index marks the pencil node."""

    prime: int
    octic: np.ndarray  # 45 coefficients over monomials(8)
    nodes: tuple       # 12 points, each an (x, y, z) tuple
    q_index: int
    seed: int

    @property
    def q(self):
        return self.nodes[self.q_index]

    @property
    def other_nodes(self):
        return tuple(n for i, n in enumerate(self.nodes) if i != self.q_index)

    def genus(self) -> int:
        return 21 - len(self.nodes)

    def to_plane_model(self) -> PlaneCurveModel:
        return PlaneCurveModel(
            prime=self.prime,
            degree=8,
            coeffs=self.octic,
            q=self.q,
            q_mult=2,
            nodes=self.other_nodes,
            seed=self.seed,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "prime": self.prime,
                "octic": [int(c) for c in self.octic],
                "nodes": [[int(v) for v in n] for n in self.nodes],
                "q_index": self.q_index,
                "seed": self.seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NodalOcticModel":
        data = json.loads(text)
        return cls(
            prime=data["prime"],
            octic=np.array(data["octic"], dtype=np.int64),
            nodes=tuple(tuple(v) for v in data["nodes"]),
            q_index=data["q_index"],
            seed=data["seed"],
        )


def as_plane_model(model) -> PlaneCurveModel:
    if isinstance(model, PlaneCurveModel):
        return model
    return model.to_plane_model()


def _hessian_nondegenerate(coeffs, d: int, point, p: int) -> bool:
    """Ordinary double point: the 2x2 Hessian of the z = 1 dehomogenisation
    is nondegenerate (char p exceeds the degree, so this is the
    scheme-theoretic condition)."""
    fxx = int(derivative_row(d, (2, 0, 0), point, p) @ coeffs % p)
    fxy = int(derivative_row(d, (1, 1, 0), point, p) @ coeffs % p)
    fyy = int(derivative_row(d, (0, 2, 0), point, p) @ coeffs % p)
    return (fxx * fyy - fxy * fxy) % p != 0


def _triple_point_ordinary(coeffs, d: int, point, p: int) -> bool:
    """Ordinary triple point: the leading cubic of the local expansion has
    distinct roots, tested by its discriminant."""
    inv6 = pow(6, -1, p)
    inv2 = pow(2, -1, p)
    c30 = int(derivative_row(d, (3, 0, 0), point, p) @ coeffs % p)
    c21 = int(derivative_row(d, (2, 1, 0), point, p) @ coeffs % p)
    c12 = int(derivative_row(d, (1, 2, 0), point, p) @ coeffs % p)
    c03 = int(derivative_row(d, (0, 3, 0), point, p) @ coeffs % p)
    a, b = c30 * inv6 % p, c21 * inv2 % p
    c, e = c12 * inv2 % p, c03 * inv6 % p
    disc = (
        18 * a * b * c * e - 4 * b ** 3 * e + b * b * c * c
        - 4 * a * c ** 3 - 27 * a * a * e * e
    ) % p
    return disc != 0


def node_conditions_matrix(nodes, p: int, d: int = 8) -> np.ndarray:
    """Three first partials of a degree-d form at each node; vanishing of the
    form itself follows from the Euler relation."""
    rows = []
    for node in nodes:
        for order in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            rows.append(derivative_row(d, order, node, p))
    return np.stack(rows)


def construct_nodal_octic(prime: int, seed: int, max_attempts: int = 12) -> NodalOcticModel:
    """Random 12-nodal octic over F_prime with distinguished node q.

    Raises DegenerateConfigurationError when every attempt produced nodes
    imposing dependent conditions or a non-ordinary singular point.
    """
    check_prime(prime)
    rng = random.Random(seed * 1000003 + prime)
    last_error = "no attempt run"
    for _ in range(max_attempts):
        nodes = set()
        while len(nodes) < 12:
            nodes.add((rng.randrange(prime), rng.randrange(prime), 1))
        nodes = tuple(sorted(nodes))
        cond = node_conditions_matrix(nodes, prime)
        if rank_mod(cond, prime) != 36:
            last_error = "condition matrix rank below 36"
            continue
        basis = kernel_mod(cond, prime)
        if len(basis) != 45 - 36:
            last_error = "octic solution space has unexpected dimension"
            continue
        weights = np.array([rng.randrange(1, prime) for _ in basis], dtype=np.int64)
        octic = (weights @ basis) % prime
        model = NodalOcticModel(prime, octic, nodes, q_index=0, seed=seed)
        report = verify_node_report(model)
        if report["ok"]:
            return model
        last_error = "; ".join(report["failures"])
    raise DegenerateConfigurationError(f"degenerate configuration: {last_error}")


def construct_nodal_nonic(prime: int, seed: int, max_attempts: int = 12) -> PlaneCurveModel:
    """Plane nonic with one ordinary triple point and 16 ordinary nodes.

    The 6 + 48 conditions leave a unique curve; lines through the triple
    point cut the degree-6 pencil.  This is the pipeline's primary model:
    the family dominates the moduli of (curve, pencil) pairs.
    """
    check_prime(prime)
    rng = random.Random(seed * 1000003 + prime + 777)
    last_error = "no attempt run"
    for _ in range(max_attempts):
        points = set()
        while len(points) < 17:
            points.add((rng.randrange(prime), rng.randrange(prime), 1))
        points = sorted(points)
        tpt, nodes = points[0], tuple(points[1:])
        rows = [
            derivative_row(9, order, tpt, prime)
            for order in _multi_indices_exact(2)
        ]
        for n in nodes:
            for order in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                rows.append(derivative_row(9, order, n, prime))
        cond = np.stack(rows)
        if rank_mod(cond, prime) != 54:
            last_error = "nonic condition matrix rank below 54"
            continue
        basis = kernel_mod(cond, prime)
        if len(basis) != 1:
            last_error = "nonic solution space not 1-dimensional"
            continue
        model = PlaneCurveModel(prime, 9, basis[0] % prime, tpt, 3, nodes, seed)
        report = verify_model_report(model)
        if report["ok"]:
            return model
        last_error = "; ".join(report["failures"])
    raise DegenerateConfigurationError(f"degenerate configuration: {last_error}")


def verify_model_report(model) -> dict:
    """Re-check every model invariant; failures are listed, not raised."""
    pm = as_plane_model(model)
    p, d = pm.prime, pm.degree
    failures = []
    if np.all(pm.coeffs % p == 0):
        failures.append("curve is identically zero")
    sing = pm.singular_points()
    pts = [pt for pt, _m in sing]
    if len(set(pts)) != len(pts):
        failures.append("singular points are not distinct")
    for pt, mult in sing:
        for order in _multi_indices_below(mult):
            if int(derivative_row(d, order, pt, p) @ pm.coeffs % p):
                failures.append(f"partial {order} does not vanish at {pt}")
                break
    for pt, mult in sing:
        if mult == 2 and not _hessian_nondegenerate(pm.coeffs, d, pt, p):
            failures.append(f"node {pt} is not ordinary (degenerate Hessian)")
        if mult == 3 and not _triple_point_ordinary(pm.coeffs, d, pt, p):
            failures.append(f"triple point {pt} is not ordinary")
    genus = pm.genus()
    if genus != GENUS:
        failures.append(f"genus bookkeeping gives {genus}, expected {GENUS}")
    if pm.pencil_degree != PENCIL_DEGREE:
        failures.append(f"pencil degree {pm.pencil_degree} != {PENCIL_DEGREE}")
    return {
        "ok": not failures,
        "failures": failures,
        "genus": genus,
        "arithmetic_genus": (d - 1) * (d - 2) // 2,
        "degree": d,
        "node_count": len(pm.nodes),
        "q_multiplicity": pm.q_mult,
    }


def verify_node_report(model: NodalOcticModel) -> dict:
    """Octic-specific report: adds the 36-condition rank and the dimension of
    the octic system."""
    report = verify_model_report(model)
    cond_rank = rank_mod(node_conditions_matrix(model.nodes, model.prime), model.prime)
    report["condition_rank"] = cond_rank
    report["octic_space_dim"] = 45 - cond_rank
    if cond_rank != 36:
        report["ok"] = False
        report["failures"] = report["failures"] + ["node conditions dependent"]
    return report


def linear_system(model, d: int, conditions) -> list:
    """Basis of degree-d forms satisfying the (point, multiplicity) conditions.

    Multiplicity m means vanishing of all partials of order < m.  The basis
    vectors are the canonical kernel basis of the condition matrix, so the
    result is deterministic.
    """
    if d < 1:
        raise ValueError("degree must be positive")
    cond = condition_matrix(d, conditions, model.prime)
    if cond.shape[0] == 0:
        return list(np.eye(monomial_count(d), dtype=np.int64))
    return list(kernel_mod(cond, model.prime))


def sample_smooth_points(
    model,
    count: int,
    seed: int = 0,
    exclude=(),
    max_batches: int = 40,
) -> list:
    """Distinct F_p-points on the curve away from its singular points.

    Random affine lines y = m*x + c are intersected with the curve by a full
    scan over x in F_p (exact; roughly one rational point per random line).
    """
    if count == 0:
        return []
    if count < 0:
        raise ValueError("count must be nonnegative")
    pm = as_plane_model(model)
    p, d = pm.prime, pm.degree
    rng = random.Random(pm.seed * 7919 + seed * 104729 + p)
    banned = pm.banned_points() | set(exclude)
    found: list = []
    seen = set()
    u = np.arange(p, dtype=np.int64)
    xpow = _power_table(u, d, p)
    monos = monomials(d)
    coeffs = pm.coeffs % p
    lines_per_batch = max(8, count // 2)
    for _ in range(max_batches):
        for _ in range(lines_per_batch):
            m, c = rng.randrange(p), rng.randrange(p)
            y = (m * u + c) % p
            ypow = _power_table(y, d, p)
            vals = np.zeros(p, dtype=np.int64)
            for coef, (i, j, k) in zip(coeffs, monos):
                if coef:  # z = 1 on the affine chart
                    vals = (vals + coef * (xpow[i] * ypow[j] % p)) % p
            for x0 in np.nonzero(vals == 0)[0]:
                pt = (int(x0), int(y[x0]), 1)
                if pt in banned or pt in seen:
                    continue
                seen.add(pt)
                found.append(pt)
        if len(found) >= count:
            return found[:count]
    raise InsufficientRationalPointsError(
        f"insufficient rational points: found {len(found)} of {count} at p={p}"
    )
