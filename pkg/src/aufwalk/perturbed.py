"""Perturbed transition weights on a branch: the one-step coefficients of the
quantum walk on the spectral component attached to y = bar(z) z.

For a point mass at u the coefficient is the normalized trace

    qhat_u(s, t) = tr[(i_u (x) V(s, s(x)y)*) (V(t, u(x)s) (x) i_y)
                      V(t, t(x)y) V(t, u(x)s)*]

over the block H_u (x) H_s, which is real, dominated entrywise by the
classical weights, and exponentially close to them far from the root.
The matrix assembled from these coefficients feeds the same Green-kernel
solver as the classical walk.
"""

from __future__ import annotations

import json
import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fusion import Measure, fuse, multiplicity
from .intertwiners import Intertwiner, IntertwinerEngine, TensorCapError
from .kernels import KernelTable, RayProfile, green_table, weighted_operator_norm
from .words import branch, format_word, involution, parse_word, qdim

RESIDUAL_FLOOR = 1e-12
DOMINATION_TOL = 1e-12


class QhatStore:
    """Append-only line-delimited persistent cache of computed coefficients.

    Each record is one JSON object per line with keys
    ``config`` (model hash), ``z``, ``u``, ``s``, ``t`` (words, ``e`` = empty
    word) and ``value``.  Corrupt lines are skipped with a warning.
    """

    FIELDS = ("config", "z", "u", "s", "t")

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._data: dict[tuple[str, str, str, str, str], float] = {}
        self.hits = 0
        self.misses = 0
        self._load()

    def _load(self):
        try:
            lines = open(self.path, "r", encoding="utf-8").read().splitlines()
        except FileNotFoundError:
            return
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = tuple(parse_word(rec[f]) if f != "config" else rec[f] for f in self.FIELDS)
                self._data[key] = float(rec["value"])
            except (ValueError, KeyError, TypeError):
                warnings.warn(f"{self.path}:{lineno}: skipping corrupt cache line")

    def _key(self, config_hash, z, u, s, t):
        return (config_hash, z, u, s, t)

    def get(self, config_hash, z, u, s, t):
        with self._lock:
            got = self._data.get(self._key(config_hash, z, u, s, t))
            if got is not None:
                self.hits += 1
            else:
                self.misses += 1
            return got

    def put(self, config_hash, z, u, s, t, value):
        key = self._key(config_hash, z, u, s, t)
        rec = {
            "config": config_hash,
            "z": format_word(z),
            "u": format_word(u),
            "s": format_word(s),
            "t": format_word(t),
            "value": value,
        }
        with self._lock:
            if key in self._data:
                return
            self._data[key] = value
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class BranchContext:
    """Branch data for one z: the word y = bar(z) z, the truncated branch
    domain, and the coefficient cache."""

    def __init__(self, engine: IntertwinerEngine, z: str, radius: int, store: QhatStore | None = None):
        if not z:
            raise ValueError("branch word z must be nonempty")
        self.engine = engine
        self.z = z
        self.y = involution(z) + z
        self.radius = radius
        self.omega = branch(z, radius)
        if len(self.omega) < 2:
            raise ValueError(
                f"branch of {z!r} truncated at radius {radius} has {len(self.omega)} words; "
                f"increase the radius or the tensor cap"
            )
        self.index = {w: i for i, w in enumerate(self.omega)}
        self.store = store
        self._cache: dict[tuple[str, str, str], float] = {}
        self._lock = threading.Lock()

    @property
    def q(self) -> float:
        return self.engine.q

    def contains(self, w: str) -> bool:
        return w.endswith(self.z)

    def membership_agrees(self, words) -> bool:
        """Check that branch membership matches the fusion criterion
        w < w (x) y on the given words."""
        return all((multiplicity(w, w, self.y) == 1) == self.contains(w) for w in words)

    def qdims(self) -> np.ndarray:
        return np.array([qdim(w, self.q) for w in self.omega])


def qhat_entry(u: str, s: str, t: str, ctx: BranchContext) -> float:
    """Coefficient of the branch walk for the point mass at u, from s to t.

    Zero unless t is a component of u (x) s; the empty u gives the identity.
    Raises TensorCapError when the trace block would exceed the cap.
    """
    if not (ctx.contains(s) and ctx.contains(t)):
        raise ValueError(f"{s!r}, {t!r} must lie in the branch of {ctx.z!r}")
    if not u:
        return 1.0 if s == t else 0.0
    if t not in fuse(u, s):
        return 0.0
    key = (u, s, t)
    with ctx._lock:
        got = ctx._cache.get(key)
    if got is not None:
        return got
    eng = ctx.engine
    cfg_hash = eng.cfg.config_hash()
    if ctx.store is not None:
        stored = ctx.store.get(cfg_hash, ctx.z, u, s, t)
        if stored is not None:
            with ctx._lock:
                ctx._cache[key] = stored
            return stored
    if len(u) + len(s) + len(ctx.y) > eng.cfg.tensor_cap:
        raise TensorCapError([u + s + ctx.y], eng.cfg.tensor_cap)
    v_us = eng.normalized_V(t, u, s).array
    v_ty = eng.normalized_V(t, t, ctx.y).array
    v_sy = eng.normalized_V(s, s, ctx.y).array
    d_u, d_y = eng.irr_dim(u), eng.irr_dim(ctx.y)
    composite = np.kron(np.eye(d_u), v_sy.T) @ (np.kron(v_us, np.eye(d_y)) @ v_ty @ v_us.T)
    value = eng.weighted_trace(Intertwiner((u, s), (u, s), composite))
    dominator = qdim(t, ctx.q) / (qdim(u, ctx.q) * qdim(s, ctx.q))
    if abs(value) > dominator + DOMINATION_TOL:
        raise AssertionError(
            f"coefficient {value} exceeds the classical weight {dominator} at ({u!r},{s!r},{t!r})"
        )
    with ctx._lock:
        ctx._cache[key] = value
    if ctx.store is not None:
        ctx.store.put(cfg_hash, ctx.z, u, s, t, value)
    return value


def qhat_oracle(u: str, s: str, t: str, ctx: BranchContext) -> tuple[float, float]:
    """Independent evaluation: apply the partial trace over u to the evolved
    one-point section and project onto V(s, s(x)y).  Returns the coefficient
    and the residual of the projection."""
    if not u:
        return (1.0 if s == t else 0.0), 0.0
    if t not in fuse(u, s):
        return 0.0, 0.0
    eng = ctx.engine
    v_us = eng.normalized_V(t, u, s).array
    v_ty = eng.normalized_V(t, t, ctx.y).array
    v_sy = eng.normalized_V(s, s, ctx.y).array
    d_u, d_s, d_y = eng.irr_dim(u), eng.irr_dim(s), eng.irr_dim(ctx.y)
    evolved = np.kron(v_us, np.eye(d_y)) @ v_ty @ v_us.T
    weight = eng.rho_weight(u, inverse=True)
    partial = np.einsum(
        "ba,bYaS->YS", weight, evolved.reshape(d_u, d_s * d_y, d_u, d_s), optimize=True
    ) / eng.qdim(u)
    coeff = float(np.sum(partial * v_sy) / np.sum(v_sy * v_sy))
    residual = float(np.linalg.norm(partial - coeff * v_sy))
    return coeff, residual


def required_entries(mu: Measure, ctx: BranchContext) -> list[tuple[str, str, str]]:
    """All (u, s, t) coefficient triples needed to assemble the branch matrix
    of mu on the truncated domain."""
    mud = mu.dual()
    out = []
    for t in ctx.omega:
        for u in mud.support:
            for s in fuse(u, t):
                if s in ctx.index:
                    out.append((u, t, s))
    return out


def q_matrix(mu: Measure, ctx: BranchContext) -> np.ndarray:
    """Assemble the perturbed matrix on the truncated branch by linearity over
    the dual measure.  Fails loudly, listing the offending entries, when any
    required coefficient exceeds the tensor cap."""
    cap = ctx.engine.cfg.tensor_cap
    needed = required_entries(mu, ctx)
    blocked = [(u, s, t) for (u, s, t) in needed if u and len(u) + len(s) + len(ctx.y) > cap]
    if blocked:
        raise TensorCapError([u + s + ctx.y for (u, s, t) in blocked[:8]], cap)
    mud = mu.dual()
    dims = ctx.qdims()
    n = len(ctx.omega)
    out = np.zeros((n, n))
    for (u, t, s) in needed:
        ti, si = ctx.index[t], ctx.index[s]
        out[si, ti] += mud.weight(u) * (dims[ti] / dims[si]) ** 2 * qhat_entry(u, t, s, ctx)
    return out


@dataclass
class DecayReport:
    lengths: list[int]
    maxima: list[float]
    fitted_rate: float
    fitted_c: float
    target_rate: float
    n_pairs: int

    def envelope_gap(self) -> float:
        """Largest excess of a residual over fitted_c * q^len (<= 0 passes)."""
        return max(
            m - self.fitted_c * math.exp(self.target_rate * l) * (1 + 1e-6)
            for l, m in zip(self.lengths, self.maxima)
        )


def decay_audit(mu: Measure, ctx: BranchContext, p_branch: np.ndarray) -> DecayReport:
    """Fit the decay of |q - p| against the source length.

    Residuals below the floor are discarded; the envelope slope is fitted on
    the per-length maxima by least squares and compared with log q.
    """
    qmat = q_matrix(mu, ctx)
    resid = np.abs(qmat - p_branch)
    per_length: dict[int, float] = {}
    n_pairs = 0
    for i, s in enumerate(ctx.omega):
        for j in range(len(ctx.omega)):
            if p_branch[i, j] > 0 and resid[i, j] > RESIDUAL_FLOOR:
                per_length[len(s)] = max(per_length.get(len(s), 0.0), float(resid[i, j]))
                n_pairs += 1
    if len(per_length) < 4:
        raise ValueError(f"only {len(per_length)} lengths with usable residuals; need at least 4")
    lengths = sorted(per_length)
    maxima = [per_length[l] for l in lengths]
    slope, _ = np.polyfit(lengths, np.log(maxima), 1)
    q = ctx.q
    envelope_c = max(m / q ** l for l, m in zip(lengths, maxima))
    return DecayReport(
        lengths=lengths,
        maxima=maxima,
        fitted_rate=float(slope),
        fitted_c=float(envelope_c),
        target_rate=math.log(q),
        n_pairs=n_pairs,
    )


def green_Q(mu: Measure, ctx: BranchContext, lam: float | None = None) -> tuple[np.ndarray, KernelTable]:
    """Perturbed matrix and its Green kernel on the truncated branch, through
    the same solver as the classical tables."""
    qmat = q_matrix(mu, ctx)
    table = green_table(qmat, ctx.omega, ctx.q, base=ctx.z, lam=lam)
    return qmat, table


def martin_Q(q_table: KernelTable, full_table: KernelTable) -> np.ndarray:
    """K_Q(s, t) = G_Q(s, t) / G_P(e, t): rows over the branch domain, columns
    normalized by the full-tree Green kernel at the root."""
    base = full_table.index[full_table.base]
    cols = np.array([full_table.index[t] for t in q_table.domain])
    denom = full_table.green[base, cols]
    return q_table.green / denom[None, :]


def norm_domination_gap(qmat: np.ndarray, p_branch: np.ndarray, ctx: BranchContext) -> float:
    """Power-iteration norm of the perturbed matrix minus the classical one on
    the same weighted domain (<= ~0 expected)."""
    m = ctx.qdims() ** 2
    return weighted_operator_norm(qmat, m) - weighted_operator_norm(p_branch, m)


@dataclass
class GdifReport:
    x_list: list[str]
    max_rel: list[float]
    fitted_c2: float
    fitted_rate: float
    target_rate: float


def gdif_audit(
    mu: Measure, ctx: BranchContext, p_branch: np.ndarray, x_list: list[str], lam: float | None = None
) -> GdifReport:
    """Relative gap between the perturbed and classical Green kernels on the
    sub-branches of the given words, with the envelope constant against
    q^len(x) and the fitted decay rate."""
    qmat = q_matrix(mu, ctx)
    rels = []
    for x in x_list:
        if not x.endswith(ctx.z):
            raise ValueError(f"{x!r} does not lie in the branch of {ctx.z!r}")
        sub = [w for w in ctx.omega if w.endswith(x)]
        if len(sub) < 2:
            raise ValueError(f"sub-branch of {x!r} too small at radius {ctx.radius}")
        ii = np.array([ctx.index[w] for w in sub])
        g_q = green_table(qmat[np.ix_(ii, ii)], sub, ctx.q, base=x, lam=lam)
        g_p = green_table(p_branch[np.ix_(ii, ii)], sub, ctx.q, base=x, lam=lam)
        rels.append(float((np.abs(g_q.green - g_p.green) / g_p.green).max()))
    q = ctx.q
    lens = [len(x) for x in x_list]
    slope, _ = np.polyfit(lens, np.log(rels), 1)
    c2 = max(r / q ** l for r, l in zip(rels, lens))
    return GdifReport(
        x_list=list(x_list),
        max_rel=rels,
        fitted_c2=float(c2),
        fitted_rate=float(slope),
        target_rate=math.log(q),
    )


@dataclass
class BoundaryRow:
    source: str
    deepest: str
    k_q: float
    k_p: float
    ratio: float
    cauchy_gap_q: float
    cauchy_gap_p: float
    profile_q: RayProfile = field(repr=False)
    profile_p: RayProfile = field(repr=False)


def boundary_positivity_and_ratio(
    ctx: BranchContext,
    q_table: KernelTable,
    full_table: KernelTable,
    ray: list[str],
    s_list: list[str],
) -> list[BoundaryRow]:
    """Ray profiles of the perturbed and classical Martin kernels for each
    source; the boundary value is the deepest ray entry, reported with its
    last gap (no extrapolation)."""
    missing = [t for t in ray if t not in q_table.index]
    if missing:
        raise ValueError(f"ray leaves the branch domain: {missing}")
    base = full_table.index[full_table.base]
    rows = []
    for s in s_list:
        kq = [
            q_table.green_entry(s, t) / full_table.green[base, full_table.index[t]] for t in ray
        ]
        kp = [full_table.martin_entry(s, t) for t in ray]
        prof_q = RayProfile(source=s, points=list(ray), values=kq)
        prof_p = RayProfile(source=s, points=list(ray), values=kp)
        rows.append(
            BoundaryRow(
                source=s,
                deepest=ray[-1],
                k_q=prof_q.stabilized_value,
                k_p=prof_p.stabilized_value,
                ratio=prof_q.stabilized_value / prof_p.stabilized_value,
                cauchy_gap_q=prof_q.cauchy_gap,
                cauchy_gap_p=prof_p.cauchy_gap,
                profile_q=prof_q,
                profile_p=prof_p,
            )
        )
    return rows
