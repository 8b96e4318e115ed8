"""Green and Martin kernels of substochastic matrices on tree domains,
and the quantitative audits of their tree-geometry estimates.

The Green kernel of a weight matrix W with spectral norm < 1 on the
qdim^2-weighted l2 space is computed as the resolvent (I - W)^-1, one dense
solve per domain; a truncated Neumann series is kept as an independent
cross-check with a rigorous tail bound from the norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .words import EMPTY, qdim, tree_distance

DENSE_LIMIT = 4200
SOLVER_TOL = 1e-10
NORM_GUARD = 1e-6


def weighted_operator_norm(matrix, weights: np.ndarray, iters: int = 600, tol: float = 1e-13) -> float:
    """Operator norm of the matrix on l2 with the given vertex weights,
    by power iteration on the symmetrized conjugate; deterministic start,
    converges to the norm from below."""
    w = np.sqrt(np.asarray(weights, dtype=float))
    if sp.issparse(matrix):
        a = sp.diags(w) @ matrix @ sp.diags(1.0 / w)
        at = a.T.tocsr()
        a = a.tocsr()
    else:
        a = w[:, None] * np.asarray(matrix) / w[None, :]
        at = a.T
    v = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    est = 0.0
    for _ in range(iters):
        u = at @ (a @ v)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        v = u / nrm
        new = math.sqrt(nrm)
        if abs(new - est) <= tol * max(new, 1.0):
            return new
        est = new
    return est


@dataclass
class KernelTable:
    """Green kernel over an ordered word domain, with the Martin kernel
    normalized at ``base``."""

    domain: list[str]
    base: str
    green: np.ndarray
    residual: float
    power_norm: float
    q: float
    lam: float | None = None
    neumann_gap: float | None = None
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.domain)}
        if self.base not in self.index:
            raise ValueError(f"base {self.base!r} not in domain")

    @property
    def size(self) -> int:
        return len(self.domain)

    def green_entry(self, s: str, t: str) -> float:
        return float(self.green[self.index[s], self.index[t]])

    def martin(self) -> np.ndarray:
        return self.green / self.green[self.index[self.base], :][None, :]

    def martin_entry(self, s: str, t: str) -> float:
        return self.green_entry(s, t) / self.green_entry(self.base, t)

    def diagonal_bound_gap(self) -> float:
        """max over v of G(v,v) - 1/(1 - lam); nonpositive when the diagonal
        bound from the norm estimate holds."""
        lam = self.lam if self.lam is not None else self.power_norm
        return float(self.green.diagonal().max() - 1.0 / (1.0 - lam))


def green_table(
    matrix,
    domain: list[str],
    q: float,
    base: str = EMPTY,
    lam: float | None = None,
    neumann_cols: int = 3,
    solver_tol: float = SOLVER_TOL,
) -> KernelTable:
    """Solve (I - W) G = I on the domain and package the result.

    Raises if the power-iteration norm on the weighted l2 space reaches
    1 - 1e-6 (invalid input) or if the solve residual exceeds the tolerance.
    """
    n = len(domain)
    if n > DENSE_LIMIT:
        raise ValueError(f"domain of size {n} exceeds the dense solver limit {DENSE_LIMIT}")
    w = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    if w.shape != (n, n):
        raise ValueError(f"matrix shape {w.shape} does not match domain size {n}")
    m = np.array([qdim(x, q) for x in domain]) ** 2
    power_norm = weighted_operator_norm(w, m)
    if power_norm >= 1.0 - NORM_GUARD:
        raise ValueError(f"operator norm {power_norm} too close to 1; Green kernel unreliable")
    a = np.eye(n) - w
    lu, piv = sla.lu_factor(a)
    green = sla.lu_solve((lu, piv), np.eye(n))
    residual = float(np.abs(a @ green - np.eye(n)).max())
    if residual > solver_tol:
        raise RuntimeError(f"Green solve residual {residual} above tolerance {solver_tol}")
    if green.diagonal().min() <= 0.0:
        raise RuntimeError("Green kernel diagonal not positive")
    # the tail estimate needs an upper bound on the norm: prefer the analytic
    # one when supplied (power iteration approaches the norm from below)
    tail_norm = lam if lam is not None and lam >= power_norm else min(1.0 - NORM_GUARD, power_norm * (1 + 1e-9) + 1e-12)
    gap = _neumann_gap(w, green, m, tail_norm, neumann_cols)
    return KernelTable(
        domain=list(domain),
        base=base,
        green=green,
        residual=residual,
        power_norm=power_norm,
        q=q,
        lam=lam,
        neumann_gap=gap,
    )


def _neumann_gap(w, green, m, power_norm, cols: int) -> float:
    """Compare sampled Green columns against the truncated Neumann series;
    returns the largest excess over the rigorous tail bound (<= 0 is a pass)."""
    n = w.shape[0]
    if cols <= 0 or power_norm == 0.0:
        return 0.0
    steps = min(600, max(40, int(math.ceil(math.log(1e-13) / math.log(power_norm)))))
    picks = sorted({(j * (n - 1)) // max(1, cols - 1) if cols > 1 else 0 for j in range(cols)})
    worst = -math.inf
    for j in picks:
        col = np.zeros(n)
        col[j] = 1.0
        acc = col.copy()
        vec = col
        for _ in range(steps):
            vec = w @ vec
            acc += vec
        tail = power_norm ** (steps + 1) / (1.0 - power_norm)
        bound = tail * np.sqrt(m[j] / m) + 1e-12
        worst = max(worst, float((np.abs(green[:, j] - acc) - bound).max()))
    return worst


def green_rows(
    matrix,
    domain: list[str],
    q: float,
    sources: list[str],
    base: str = EMPTY,
    lam: float | None = None,
) -> tuple[dict[str, np.ndarray], np.ndarray, float]:
    """Selected rows of the Green kernel on a large domain through a sparse
    factorization: one transposed solve per source plus one for the base.

    Returns (rows by source, base row, worst row residual).  Row s of
    (I - W)^-1 solves (I - W)^T x = e_s.
    """
    n = len(domain)
    index = {w: i for i, w in enumerate(domain)}
    w = sp.csc_matrix(matrix) if sp.issparse(matrix) else sp.csc_matrix(np.asarray(matrix))
    m = np.array([qdim(x, q) for x in domain]) ** 2
    power_norm = weighted_operator_norm(w.tocsr(), m)
    if power_norm >= 1.0 - NORM_GUARD:
        raise ValueError(f"operator norm {power_norm} too close to 1; Green kernel unreliable")
    a = (sp.identity(n, format="csc") - w).tocsc()
    lu = sp.linalg.splu(a)
    worst = 0.0
    out: dict[str, np.ndarray] = {}
    for s in dict.fromkeys(list(sources) + [base]):
        e = np.zeros(n)
        e[index[s]] = 1.0
        row = lu.solve(e, trans="T")
        worst = max(worst, float(np.abs(a.T @ row - e).max()))
        out[s] = row
    return {s: out[s] for s in sources}, out[base], worst


def truncation_error_bound(
    radius: int, s: str, t: str, lam: float, range_bound: int, q: float
) -> float:
    """Rigorous bound on the truncation error of G(s, t) computed on the ball
    of the given radius: any escaping path needs at least
    N = ceil(2 (radius - max|s|,|t|) / range) steps, and the tail of the series
    is controlled by the operator norm on the weighted space."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    depth = radius - max(len(s), len(t))
    if depth < 0:
        raise ValueError("s and t must lie inside the ball")
    n_steps = math.ceil(2 * depth / range_bound)
    ratio = qdim(t, q) / qdim(s, q)
    return ratio * lam ** n_steps / (1.0 - lam)


@dataclass
class HarnackReport:
    empirical_delta: float
    delta_bound: float
    passes: bool


def harnack_audit(table: KernelTable, delta0: float, k_steps: int, interior: list[str]) -> HarnackReport:
    """Exhaustive scan of the two Harnack inequalities over interior triples;
    the empirical delta is the largest constant that passes, compared against
    the chain bound delta0^K."""
    idx = [table.index[w] for w in interior]
    g = table.green[np.ix_(idx, idx)]
    logg = np.log(g)
    dist = _distance_matrix([table.domain[i] for i in idx])
    n = len(idx)
    worst = math.inf
    safe = np.where(dist > 0, dist, 1)
    for t in range(n):
        # G(s,t) <= delta^-d(s,v) G(v,t):  delta <= (G(v,t)/G(s,t))^(1/d(s,v))
        diff = (logg[None, :, t] - logg[:, None, t]) / safe
        np.fill_diagonal(diff, math.inf)
        worst = min(worst, float(np.exp(diff.min())))
        # G(s,t) <= delta^-d(t,v) G(s,v):  delta <= (G(s,v)/G(s,t))^(1/d(t,v))
        diff2 = (logg[:, :] - logg[:, t][:, None]) / safe[t, :][None, :]
        diff2[:, t] = math.inf
        worst = min(worst, float(np.exp(diff2.min())))
    bound = delta0 ** k_steps
    return HarnackReport(worst, bound, worst >= bound * (1.0 - 1e-12))


@dataclass
class MultiplicativityReport:
    c1_lower: float
    c1_upper: float
    lower_bound: float
    upper_bound: float

    def passes(self) -> bool:
        return self.c1_lower <= self.lower_bound * (1 + 1e-12) and self.c1_upper <= self.upper_bound * (1 + 1e-12)


def multiplicativity_audit(
    table: KernelTable, lam: float, delta: float, range_bound: int, interior: list[str]
) -> MultiplicativityReport:
    """Measure both geodesic multiplicativity constants over interior triples
    s, t with v on the geodesic: the largest G(s,v)G(v,t)/G(s,t) against
    1/(1-lam) and the largest G(s,t)/(G(s,v)G(v,t)) against 3(2/delta^2)^(S-1)."""
    idx = [table.index[w] for w in interior]
    g = table.green[np.ix_(idx, idx)]
    dist = _distance_matrix([table.domain[i] for i in idx])
    n = len(idx)
    c_lower = 0.0
    c_upper = 0.0
    for v in range(n):
        on_geo = dist[:, v][:, None] + dist[v, :][None, :] == dist
        prod = np.outer(g[:, v], g[v, :])
        ratio = np.where(on_geo, prod / g, 0.0)
        c_lower = max(c_lower, float(ratio.max()))
        inv = np.where(on_geo, g / prod, 0.0)
        c_upper = max(c_upper, float(inv.max()))
    return MultiplicativityReport(
        c1_lower=c_lower,
        c1_upper=c_upper,
        lower_bound=1.0 / (1.0 - lam),
        upper_bound=3.0 * (2.0 / delta ** 2) ** (range_bound - 1),
    )


def entry_set(branch_domain: list[str], x: str, range_bound: int) -> list[str]:
    """The cut through which every path must enter the branch of x: branch
    vertices within the open ball of the walk range around x."""
    return [u for u in branch_domain if tree_distance(u, x) < range_bound]


def last_entry_audit(
    x: str,
    s: str,
    t: str,
    full_table: KernelTable,
    branch_table: KernelTable,
    matrix,
    range_bound: int,
) -> float:
    """Relative residual of the last-entry decomposition
    G(s,t) = sum_u M(s,u) G_branch(u,t) over the entry cut of the branch of x,
    where M(s,u) sums paths whose final step enters the branch from outside.

    With the branch table truncated at the same radius as the full table the
    identity is exact up to solver error.
    """
    if s.endswith(x):
        raise ValueError("source must lie outside the branch")
    if not t.endswith(x):
        raise ValueError("target must lie inside the branch")
    p = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    outside = [i for i, w in enumerate(full_table.domain) if not w.endswith(x)]
    cut = entry_set(branch_table.domain, x, range_bound)
    si = full_table.index[s]
    lhs = full_table.green_entry(s, t)
    rhs = 0.0
    for u in cut:
        ui = full_table.index[u]
        m_su = float(full_table.green[si, outside] @ p[outside, ui])
        rhs += m_su * branch_table.green_entry(u, t)
    return abs(lhs - rhs) / lhs


def ray_words(preperiod: str, period: str, suffix: str, depth: int) -> list[str]:
    """Finite truncations of the eventually periodic left-infinite word
    ...period period preperiod suffix, deepest last."""
    if not period:
        raise ValueError("period must be nonempty")
    out = []
    w = preperiod + suffix
    while len(w) <= depth:
        if w:
            out.append(w)
        w = period + w
    if not out:
        raise ValueError("ray does not reach the domain")
    return out


@dataclass
class RayProfile:
    source: str
    points: list[str]
    values: list[float]

    @property
    def gaps(self) -> list[float]:
        return [abs(b - a) for a, b in zip(self.values, self.values[1:])]

    @property
    def stabilized_value(self) -> float:
        return self.values[-1]

    @property
    def cauchy_gap(self) -> float:
        return self.gaps[-1] if self.gaps else 0.0

    def tail_decreasing(self, floor: float = 1e-11) -> bool:
        """True if past the junction of the source with the ray the gaps
        strictly decrease until they reach the numerical floor."""
        dists = [tree_distance(self.source, t) for t in self.points]
        merge = dists.index(min(dists))
        tail = self.gaps[merge:]
        for a, b in zip(tail, tail[1:]):
            if b >= a and b > floor:
                return False
        return True


def boundary_profile(table: KernelTable, s: str, ray: list[str]) -> RayProfile:
    """Martin kernel values K(s, t_n) along a ray of prefix extensions."""
    missing = [t for t in ray if t not in table.index]
    if missing:
        raise ValueError(f"ray leaves the domain: {missing}")
    vals = [table.martin_entry(s, t) for t in ray]
    return RayProfile(source=s, points=list(ray), values=vals)


def _distance_matrix(domain: list[str]) -> np.ndarray:
    n = len(domain)
    dist = np.zeros((n, n), dtype=np.int32)
    for i in range(n):
        wi = domain[i]
        for j in range(i + 1, n):
            d = tree_distance(wi, domain[j])
            dist[i, j] = d
            dist[j, i] = d
    return dist
