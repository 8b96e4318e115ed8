"""Concrete intertwiner model for the two-letter fusion ring.

Each irreducible word x is realized as the subspace H_x of the full tensor
product of letter spaces (one n-dimensional space per letter) cut out by the
duality maps: H_x is the orthogonal complement of all single insertions of
R or Rbar at positions where adjacent letters differ.

Morphisms are kept in block coordinates: an :class:`Intertwiner` maps a tensor
product of irreducible blocks to another one, with the matrix expressed in the
orthonormal bases chosen for the blocks.  Norms, traces and compositions in
block coordinates agree with the ambient ones because the bases are isometric.
"""

from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass

import numpy as np

from .words import involution, qbinom, qdim, validate_q

TENSOR_CAP_HARD_LIMIT = 14
RANK_TOL = 1e-9
SIGN_TOL = 1e-9


class TensorCapError(RuntimeError):
    """A requested basis or trace exceeds the configured tensor-length cap."""

    def __init__(self, words, cap):
        self.words = tuple(words)
        self.cap = cap
        listing = ", ".join(repr(w) for w in self.words)
        super().__init__(f"tensor words exceed cap {cap}: {listing}")


@dataclass(frozen=True)
class ModelConfig:
    """Deformation data: matrix size n, positive diagonal of F, tensor cap.

    The eigenvalues of the positive character are rho_i = f_i^2 and must
    satisfy sum rho_i = sum 1/rho_i, which pins q in (0, 1) through
    sum rho_i = q + 1/q.  q = 1 (unitary 2-by-2 F) is rejected.
    """

    n: int
    f_diag: tuple[float, ...]
    tensor_cap: int = 10

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if len(self.f_diag) != self.n or any(f <= 0 for f in self.f_diag):
            raise ValueError("f_diag must be n positive reals")
        if not 1 <= self.tensor_cap <= TENSOR_CAP_HARD_LIMIT:
            raise ValueError(f"tensor_cap must lie in [1, {TENSOR_CAP_HARD_LIMIT}]")
        trace = sum(self.rho)
        trace_inv = sum(1.0 / r for r in self.rho)
        if abs(trace - trace_inv) > 1e-12 * max(trace, trace_inv):
            raise ValueError(
                f"character not normalized: sum rho = {trace!r}, sum 1/rho = {trace_inv!r}"
            )
        if trace <= 2.0 + 1e-12:
            raise ValueError("F is a unitary 2-by-2 matrix (q = 1); need q < 1")

    @property
    def rho(self) -> tuple[float, ...]:
        return tuple(f * f for f in self.f_diag)

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(r ** -0.5 for r in self.rho)

    @property
    def q(self) -> float:
        t = sum(self.rho)
        return (t - math.sqrt(t * t - 4.0)) / 2.0

    @classmethod
    def from_q(cls, q: float, n: int = 2, tensor_cap: int = 10) -> "ModelConfig":
        validate_q(q)
        t = q + 1.0 / q - (n - 2)
        if t <= 2.0:
            raise ValueError(f"q = {q} is not reachable with n = {n} (needs q + 1/q > n)")
        r = (t - math.sqrt(t * t - 4.0)) / 2.0
        rho = (r, 1.0 / r) + (1.0,) * (n - 2)
        return cls(n=n, f_diag=tuple(x ** 0.5 for x in rho), tensor_cap=tensor_cap)

    def config_hash(self) -> str:
        payload = "|".join(
            [str(self.n), ",".join(f"{f:.17g}" for f in self.f_diag), str(self.tensor_cap)]
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Intertwiner:
    """A morphism between tensor products of irreducible blocks.

    ``target`` and ``source`` are tuples of irreducible words; ``array`` holds
    the matrix in the chosen orthonormal block bases, rows indexed by the
    target product, columns by the source product.  The empty tuple is the
    scalar line.
    """

    target: tuple[str, ...]
    source: tuple[str, ...]
    array: np.ndarray

    def compose(self, other: "Intertwiner") -> "Intertwiner":
        if other.target != self.source:
            raise ValueError(f"cannot compose: {self.source} != {other.target}")
        return Intertwiner(self.target, other.source, self.array @ other.array)

    def __matmul__(self, other: "Intertwiner") -> "Intertwiner":
        return self.compose(other)

    def tensor(self, other: "Intertwiner") -> "Intertwiner":
        return Intertwiner(
            self.target + other.target,
            self.source + other.source,
            np.kron(self.array, other.array),
        )

    @property
    def adjoint(self) -> "Intertwiner":
        return Intertwiner(self.source, self.target, self.array.T.copy())

    @property
    def norm(self) -> float:
        if min(self.array.shape) == 0:
            return 0.0
        return float(np.linalg.norm(self.array, 2))


class IntertwinerEngine:
    """Builds and memoizes block bases, inclusions, duality maps and traces
    for one model configuration.  All products are deterministic; the caches
    may be shared between threads."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.n = cfg.n
        self.q = cfg.q
        self._lock = threading.RLock()
        self._basis: dict[str, np.ndarray] = {}
        self._inclusion: dict[tuple[str, str], np.ndarray] = {}
        self._rbar: dict[str, np.ndarray] = {}
        self._winv: dict[tuple[str, bool], np.ndarray] = {}
        lam = np.array(cfg.lambdas)
        # Rbar_a = sum_i (1/lambda_i) e_i (x) f_i ;  R_a = sum_i lambda_i f_i (x) e_i
        self._rbar_letter = {
            "a": np.diag(1.0 / lam).reshape(-1),
            "b": np.diag(lam).reshape(-1),
        }
        # weight of the positive character: diag(rho) on letter a, diag(1/rho) on b
        rho = np.array(cfg.rho)
        self._rho_letter = {"a": rho, "b": 1.0 / rho}

    # -- bases ---------------------------------------------------------------

    def check_cap(self, *tensor_words: str) -> None:
        bad = [w for w in tensor_words if len(w) > self.cfg.tensor_cap]
        if bad:
            raise TensorCapError(bad, self.cfg.tensor_cap)

    def basis(self, w: str) -> np.ndarray:
        """Orthonormal basis of H_w inside the full letter tensor space,
        as an (n^len(w), dim) column matrix."""
        with self._lock:
            got = self._basis.get(w)
        if got is not None:
            return got
        self.check_cap(w)
        built = self._build_basis(w)
        with self._lock:
            return self._basis.setdefault(w, built)

    def _build_basis(self, w: str) -> np.ndarray:
        n = self.n
        if not w:
            return np.ones((1, 1))
        if len(w) == 1:
            return np.eye(n)
        prefix = self.basis(w[:-1])
        cand = np.kron(prefix, np.eye(n))
        if w[-2] == w[-1]:
            return cand
        # new constraint at the last gap: orthogonality to the inserted
        # duality vector between the differing letters
        rvec = self._rbar_letter["a" if w[-2] == "a" else "b"]
        rows = cand.shape[0] // (n * n)
        constr = np.einsum(
            "pic,i->pc", cand.reshape(rows, n * n, cand.shape[1]), rvec
        )
        _, sing, vh = np.linalg.svd(constr, full_matrices=True)
        rank = int(np.sum(sing > RANK_TOL * sing[0])) if sing.size else 0
        null = vh[rank:].T
        return _fix_signs(cand @ null)

    def irr_dim(self, w: str) -> int:
        return self.basis(w).shape[1]

    def block_dim(self, factors: tuple[str, ...]) -> int:
        out = 1
        for f in factors:
            out *= self.irr_dim(f)
        return out

    def word_projection(self, x: str) -> Intertwiner:
        """Projection of the full letter tensor space onto H_x (the block
        picture over single-letter factors coincides with the ambient one)."""
        b = self.basis(x)
        letters = tuple(x)
        return Intertwiner(letters, letters, b @ b.T)

    # -- inclusions and duality maps ------------------------------------------

    def inclusion_block(self, x: str, y: str) -> np.ndarray:
        """Matrix of the embedding H_xy -> H_x (x) H_y in the block bases,
        an isometry of shape (dim(x) dim(y), dim(xy))."""
        key = (x, y)
        with self._lock:
            got = self._inclusion.get(key)
        if got is not None:
            return got
        bx, by, bxy = self.basis(x), self.basis(y), self.basis(x + y)
        blocks = np.einsum(
            "ia,jb,ijc->abc",
            bx,
            by,
            bxy.reshape(bx.shape[0], by.shape[0], bxy.shape[1]),
            optimize=True,
        )
        out = blocks.reshape(bx.shape[1] * by.shape[1], bxy.shape[1])
        with self._lock:
            return self._inclusion.setdefault(key, out)

    def inclusion(self, x: str, y: str) -> Intertwiner:
        return Intertwiner((x, y), (x + y,), self.inclusion_block(x, y))

    def rbar_block(self, v: str) -> np.ndarray:
        """Standard solution Rbar_v : scalars -> H_v (x) H_vbar as a block
        vector, built by nesting the letter solutions through the inclusions."""
        with self._lock:
            got = self._rbar.get(v)
        if got is not None:
            return got
        out = self._build_rbar(v)
        with self._lock:
            return self._rbar.setdefault(v, out)

    def _build_rbar(self, v: str) -> np.ndarray:
        n = self.n
        if not v:
            return np.ones(1)
        if len(v) == 1:
            return self._rbar_letter[v].copy()
        head, rest = v[0], v[1:]
        rest_bar = involution(rest)
        x1 = self._rbar_letter[head].reshape(n, n)
        x2 = self.rbar_block(rest).reshape(self.irr_dim(rest), self.irr_dim(rest_bar))
        v1 = self.inclusion_block(head, rest).reshape(n, self.irr_dim(rest), -1)
        v2 = self.inclusion_block(rest_bar, involution(head)).reshape(
            self.irr_dim(rest_bar), n, -1
        )
        out = np.einsum("il,jk,ija,klb->ab", x1, x2, v1, v2, optimize=True)
        return out.reshape(-1)

    def r_block(self, v: str) -> np.ndarray:
        """R_v : scalars -> H_vbar (x) H_v; equals Rbar of the involuted word."""
        return self.rbar_block(involution(v))

    def duality_maps(self) -> tuple[Intertwiner, Intertwiner]:
        """(R, Rbar) for the first letter, as morphisms from the scalar line."""
        r = Intertwiner(("b", "a"), (), self.r_block("a").reshape(-1, 1))
        rbar = Intertwiner(("a", "b"), (), self.rbar_block("a").reshape(-1, 1))
        return r, rbar

    # -- traces ----------------------------------------------------------------

    def rho_weight(self, w: str, inverse: bool = True) -> np.ndarray:
        """Block matrix of the positive character (or its inverse) on H_w."""
        key = (w, inverse)
        with self._lock:
            got = self._winv.get(key)
        if got is not None:
            return got
        b = self.basis(w)
        diag = np.ones(1)
        for c in w:
            vec = self._rho_letter[c]
            diag = np.outer(diag, 1.0 / vec if inverse else vec).reshape(-1)
        out = b.T @ (diag[:, None] * b)
        with self._lock:
            return self._winv.setdefault(key, out)

    def qdim(self, w: str) -> float:
        return qdim(w, self.q)

    def nested_r_matrix(self, factors: tuple[str, ...]) -> np.ndarray:
        """Standard solution for the product of the factor blocks, reshaped as
        a (conjugate side, plain side) matrix; built by the nesting
        R_{U (x) V} = (iota (x) R_U (x) iota) R_V."""
        if not factors:
            return np.ones((1, 1))
        head, rest = factors[0], factors[1:]
        m_head = self.r_block(head).reshape(self.irr_dim(involution(head)), self.irr_dim(head))
        if not rest:
            return m_head
        m_rest = self.nested_r_matrix(rest)
        out = np.einsum("ab,cd->acdb", m_rest, m_head)
        return out.reshape(m_rest.shape[0] * m_head.shape[0], m_head.shape[1] * m_rest.shape[1])

    def categorical_trace(self, t: Intertwiner) -> float:
        """Normalized categorical trace of a block endomorphism, contracted
        through the nested standard solution."""
        if t.source != t.target:
            raise ValueError(f"not an endomorphism: {t.target} vs {t.source}")
        m = self.nested_r_matrix(t.source)
        gram = m.T @ m
        total = float(np.sum(gram * t.array))
        for f in t.source:
            total /= self.qdim(f)
        return total

    def weighted_trace(self, t: Intertwiner) -> float:
        """Same trace through the character weights (independent route)."""
        if t.source != t.target:
            raise ValueError(f"not an endomorphism: {t.target} vs {t.source}")
        weight = np.ones((1, 1))
        for f in t.source:
            weight = np.kron(weight, self.rho_weight(f, inverse=True))
        total = float(np.trace(t.array @ weight))
        for f in t.source:
            total /= self.qdim(f)
        return total

    # -- the almost-isometries V tilde ------------------------------------------

    def vtilde(self, s: str, v: str, t: str) -> tuple[Intertwiner, float]:
        """The morphism H_st -> H_sv (x) H_(vbar t) obtained by inserting the
        duality vector of v into the inclusion of H_st; returns it together
        with its operator norm."""
        vbar = involution(v)
        total = len(s) + 2 * len(v) + len(t)
        if total > self.cfg.tensor_cap:
            raise TensorCapError([s + v + vbar + t], self.cfg.tensor_cap)
        a = self.inclusion_block(s, t)
        d_s, d_t = self.irr_dim(s), self.irr_dim(t)
        d_v, d_vb = self.irr_dim(v), self.irr_dim(vbar)
        rb = self.rbar_block(v).reshape(d_v, d_vb)
        mid = np.einsum(
            "ijc,kl->ikljc", a.reshape(d_s, d_t, -1), rb, optimize=True
        )
        p1 = self.inclusion_block(s, v).reshape(d_s, d_v, -1)
        p2 = self.inclusion_block(vbar, t).reshape(d_vb, d_t, -1)
        arr = np.einsum("ika,ljb,ikljc->abc", p1, p2, mid, optimize=True)
        arr = arr.reshape(p1.shape[2] * p2.shape[2], a.shape[1])
        iv = Intertwiner((s + v, vbar + t), (s + t,), arr)
        return iv, iv.norm

    def normalized_V(self, z: str, x: str, y: str) -> Intertwiner:
        """The isometry V(z, x (x) y) for a component z of x (x) y."""
        s, v, t = split_component(z, x, y)
        iv, nrm = self.vtilde(s, v, t)
        if nrm <= 0.0:
            raise ArithmeticError(f"vanishing morphism for ({z!r}, {x!r}, {y!r})")
        return Intertwiner(iv.target, iv.source, iv.array / nrm)

    def isometry_defect(self, iv: Intertwiner) -> float:
        """Relative deviation of iv^T iv from a multiple of the identity."""
        gram = iv.array.T @ iv.array
        scale = float(np.trace(gram)) / gram.shape[0]
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(gram - scale * np.eye(gram.shape[0]), 2) / scale)

    # -- defect estimates --------------------------------------------------------

    def defect_audit(self, u: str, x: str, y: str, z: str) -> tuple[float, float]:
        """Measured commutation defect of V(z, x (x) y) against the projection
        onto H_uz resp. H_ux, and the predicted decay exponent
        (len(z) + len(x) - len(y)) / 2."""
        vb = self.normalized_V(z, x, y).array
        d_u, d_y = self.irr_dim(u), self.irr_dim(y)
        inc_uz = self.inclusion_block(u, z)
        inc_ux = self.inclusion_block(u, x)
        term1 = np.kron(np.eye(d_u), vb) @ (inc_uz @ inc_uz.T)
        term2 = np.kron(inc_ux @ inc_ux.T, np.eye(d_y)) @ np.kron(np.eye(d_u), vb)
        defect = float(np.linalg.norm(term1 - term2, 2))
        return defect, (len(z) + len(x) - len(y)) / 2.0

    def cor_defect(self, u: str, v: str, x: str, y: str) -> float:
        """Composite defect comparing the two orders of splitting ux against
        tensoring with y; decays like q^(len(x) - len(y)/2) for x in the
        branch of y."""
        v1 = self.normalized_V(u + x, u + v, involution(v) + x).array
        v2 = self.normalized_V(u + x, u + x, y).array
        v3 = self.normalized_V(involution(v) + x, involution(v) + x, y).array
        d_y = self.irr_dim(y)
        d_uv = self.irr_dim(u + v)
        lhs = np.kron(v1, np.eye(d_y)) @ v2
        rhs = np.kron(np.eye(d_uv), v3) @ v1
        return float(np.linalg.norm(lhs - rhs, 2))


def split_component(z: str, x: str, y: str) -> tuple[str, str, str]:
    """Decompose a fusion component z of x (x) y as z = st with x = sv and
    y = vbar t; raises if z is not a component."""
    total = len(x) + len(y) - len(z)
    if total < 0 or total % 2:
        raise ValueError(f"{z!r} is not a component of {x!r} (x) {y!r}")
    k = total // 2
    if k > len(x) or k > len(y):
        raise ValueError(f"{z!r} is not a component of {x!r} (x) {y!r}")
    s, v = x[: len(x) - k], x[len(x) - k:]
    t = y[k:]
    if involution(v) != y[:k] or z != s + t:
        raise ValueError(f"{z!r} is not a component of {x!r} (x) {y!r}")
    return s, v, t


def vtilde_norm_indecomposable(s: str, v: str, t: str, q: float) -> float:
    """Closed form of the norm of vtilde(s, v, t) when sv, v vbar and vbar t
    are all indecomposable: a ratio of Gaussian binomials in the lengths."""
    ns, nv, nt = len(s), len(v), len(t)
    return math.sqrt(
        qbinom(ns + nt + nv + 1, nv, q)
        / (qbinom(ns + nv, nv, q) * qbinom(nt + nv, nv, q))
    )


def build_duality_maps(cfg: ModelConfig) -> tuple[Intertwiner, Intertwiner]:
    return IntertwinerEngine(cfg).duality_maps()


def _fix_signs(b: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first coordinate of magnitude above the
    threshold is made positive, column by column."""
    out = b.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > SIGN_TOL)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out
