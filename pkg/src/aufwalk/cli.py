"""Command line driver: walk | audit | boundary | intertwiner.

One JSON config file, documented in the README, plus the overrides
--radius, --q and --out.  Exit codes: 0 pass, 1 audit failure, 2 config
error, 3 resource cap.  Reruns with the same config produce byte-identical
files: floats are emitted with 17 significant digits and JSON keys sorted.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fusion, kernels, perturbed, words
from .fusion import Measure
from .intertwiners import IntertwinerEngine, ModelConfig, TensorCapError, vtilde_norm_indecomposable
from .words import RadiusCapError, format_word, indecomposable_factors, involution, parse_word

OUTPUT_ENV = "AUFWALK_OUT"

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_CONFIG = 2
EXIT_CAP = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: ModelConfig
    measure: Measure
    ball_radius: int = 8
    branch_z: str = "a"
    q_radius: int | None = None
    rays: list[tuple[str, str]] = field(default_factory=lambda: [("", "a")])
    sources: list[str] = field(default_factory=lambda: [""])
    boundary_sources: list[str] | None = None
    solver_tol: float = 1e-10
    audit_tol: float = 1e-8
    output_dir: str = "out"
    seed: int = 0
    qhat_cache: str | None = None
    raw: dict = field(default_factory=dict)

    @property
    def q(self) -> float:
        return self.model.q

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def effective_q_radius(self) -> int:
        if self.q_radius is not None:
            return self.q_radius
        reach = max(len(r) for r in self.measure.support)
        return min(
            self.ball_radius,
            self.model.tensor_cap - 2 * len(self.branch_z) - reach,
        )


def load_config(path: str, radius=None, q=None, out=None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    model_raw = raw.get("model", {})
    n = int(model_raw.get("n", 2))
    cap = int(raw.get("tensorCap", 10))
    if q is not None:
        model = ModelConfig.from_q(float(q), n=n, tensor_cap=cap)
    elif "fDiag" in model_raw:
        model = ModelConfig(n=n, f_diag=tuple(float(x) for x in model_raw["fDiag"]), tensor_cap=cap)
    elif "q" in model_raw:
        model = ModelConfig.from_q(float(model_raw["q"]), n=n, tensor_cap=cap)
    else:
        raise ConfigError("model must provide q or fDiag")
    measure_raw = raw.get("measure")
    if not isinstance(measure_raw, dict) or not measure_raw:
        raise ConfigError("measure must be a nonempty object of word: weight pairs")
    measure = Measure({parse_word(k): float(v) for k, v in measure_raw.items()})
    rays = [(parse_word(p), parse_word(per)) for p, per in raw.get("rays", [["e", "a"]])]
    cfg = RunConfig(
        model=model,
        measure=measure,
        ball_radius=int(radius if radius is not None else raw.get("ballRadius", 8)),
        branch_z=parse_word(raw.get("branchZ", "a")),
        q_radius=int(raw["qRadius"]) if "qRadius" in raw else None,
        rays=rays,
        sources=[parse_word(w) for w in raw.get("sources", ["e"])],
        boundary_sources=[parse_word(w) for w in raw["boundarySources"]]
        if "boundarySources" in raw
        else None,
        solver_tol=float(raw.get("tolerances", {}).get("solver", 1e-10)),
        audit_tol=float(raw.get("tolerances", {}).get("audit", 1e-8)),
        output_dir=str(out if out is not None else raw.get("outputDir", "out")),
        seed=int(raw.get("seed", 0)),
        qhat_cache=str(raw["qhatCache"]) if "qhatCache" in raw else None,
        raw=raw,
    )
    if not cfg.branch_z:
        raise ConfigError("branchZ must be a nonempty word")
    if cfg.ball_radius < 0:
        raise ConfigError("ballRadius must be nonnegative")
    env_out = os.environ.get(OUTPUT_ENV)
    if env_out:
        cfg.output_dir = env_out
    return cfg


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def build_walk(cfg: RunConfig):
    domain = words.ball(cfg.ball_radius)
    tm = fusion.transition_matrix(cfg.measure, domain, cfg.q)
    lam = fusion.norm_upper_bound(cfg.measure, cfg.q)
    table = kernels.green_table(
        tm.matrix, domain, cfg.q, base="", lam=lam, solver_tol=cfg.solver_tol
    )
    return tm, lam, table


def cmd_walk(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    domain = words.ball(cfg.ball_radius)
    tm = fusion.transition_matrix(cfg.measure, domain, cfg.q)
    lam = fusion.norm_upper_bound(cfg.measure, cfg.q)
    for s in cfg.sources:
        if s not in tm.index:
            raise ConfigError(f"source {s!r} outside the ball")
    if tm.size <= kernels.DENSE_LIMIT:
        table = kernels.green_table(
            tm.matrix, domain, cfg.q, base="", lam=lam, solver_tol=cfg.solver_tol
        )
        green_rows = {s: table.green[table.index[s], :] for s in cfg.sources}
        base_row = table.green[table.index[""], :]
        residual = table.residual
        power_norm = table.power_norm
        neumann_gap = table.neumann_gap
    else:
        green_rows, base_row, residual = kernels.green_rows(
            tm.matrix, domain, cfg.q, cfg.sources, base="", lam=lam
        )
        power_norm = kernels.weighted_operator_norm(tm.matrix, tm.haar_weights())
        neumann_gap = None
    delta0, k_steps = _irreducibility(cfg, tm)
    rows = []
    for s in cfg.sources:
        grow = green_rows[s]
        for ti, t in enumerate(domain):
            bound = kernels.truncation_error_bound(
                cfg.ball_radius, s, t, lam, tm.range_bound, cfg.q
            )
            rows.append(
                [format_word(s), format_word(t), float(grow[ti]),
                 float(grow[ti] / base_row[ti]), float(bound)]
            )
    write_csv(out / "green_martin.csv", ["s", "t", "G", "K", "truncationBound"], rows)
    interior = tm.interior_words(cfg.ball_radius)
    row_gap = (
        float(np.abs(tm.row_sums()[[tm.index[w] for w in interior]] - 1.0).max())
        if interior
        else 0.0
    )
    manifest = {
        "configHash": cfg.config_hash(),
        "q": cfg.q,
        "n": cfg.model.n,
        "ballRadius": cfg.ball_radius,
        "domainSize": tm.size,
        "rangeBound": tm.range_bound,
        "normBound": lam,
        "powerIterationNorm": power_norm,
        "delta0": delta0,
        "kSteps": k_steps,
        "solverResidual": residual,
        "neumannGap": neumann_gap,
        "interiorRowSumGap": row_gap,
        "seed": cfg.seed,
    }
    write_json(out / "manifest.json", manifest)
    return EXIT_OK


def _irreducibility(cfg: RunConfig, tm) -> tuple[float, int]:
    # the witness scan needs a chain margin inside the ball; on large balls
    # it runs on a sub-ball (the constants are translation-stable)
    if cfg.ball_radius <= tm.range_bound * 2 + 1:
        return float(tm.matrix.data.min()) if tm.matrix.nnz else 0.0, 1
    radius = cfg.ball_radius
    scan = tm
    if tm.size > 1500:
        radius = min(cfg.ball_radius, 8)
        scan = tm.restrict(words.ball(radius))
    k_max = 8
    while k_max * scan.range_bound >= radius and k_max > 1:
        k_max -= 1
    delta0, k = fusion.uniform_irreducibility_constants(scan, k_max=k_max)
    data = tm.matrix.data
    return min(delta0, float(data[data > 0].min())), k


def _audit_entry(name: str, anchor: str, measured: float, bound: float, passed: bool) -> dict:
    return {
        "name": name,
        "anchor": anchor,
        "measured": measured,
        "bound": bound,
        "pass": bool(passed),
    }


def run_audits(cfg: RunConfig) -> list[dict]:
    entries: list[dict] = []

    def add(name, anchor, measured, bound, ok):
        entries.append(_audit_entry(name, anchor, float(measured), float(bound), ok))

    q = cfg.q
    if not fusion.is_generating(cfg.measure, max(cfg.measure.range_bound, 4), q):
        raise ConfigError("measure is not generating; audits need an irreducible walk")
    tm, lam, table = build_walk(cfg)
    interior = tm.interior_words(cfg.ball_radius)
    gap = float(np.abs(tm.row_sums()[[tm.index[w] for w in interior]] - 1.0).max())
    add("stochasticity", "interior row sums of the transition matrix", gap, 1e-12, gap < 1e-12)

    dual_gap = fusion.dual_audit(cfg.measure, min(cfg.ball_radius, 8), q)
    add("dual_measure", "dimension-normalized duality identity", dual_gap, 1e-12, dual_gap < 1e-12)

    add(
        "norm_bound",
        "weighted operator norm against the dimension-ratio bound",
        table.power_norm,
        lam + 1e-8,
        table.power_norm <= lam + 1e-8 and lam < 1.0,
    )
    add("green_residual", "resolvent identity of the Green solve", table.residual, cfg.solver_tol,
        table.residual <= cfg.solver_tol)
    diag_gap = table.diagonal_bound_gap()
    add("green_diagonal", "diagonal bounded by 1/(1-lambda)", diag_gap, 0.0, diag_gap <= 0.0)
    add("neumann_check", "sampled columns against the truncated series", table.neumann_gap, 0.0,
        table.neumann_gap <= 0.0)

    eng = IntertwinerEngine(cfg.model)
    conj = _conjugate_equation_residual(eng)
    add("conjugate_equations", "standard duality pair identities", conj, 1e-10, conj < 1e-10)
    rr = _duality_norm_gap(eng)
    add("duality_normalization", "pairing norm equals the quantum dimension of a letter", rr,
        1e-10, rr < 1e-10)

    mism = _rank_mismatches(eng, min(7, cfg.model.tensor_cap))
    add("fusion_dimensions", "projection ranks equal classical dimensions", mism, 0.0, mism == 0)

    worst_rel, min_ratio = _vtilde_norm_scan(eng)
    add("vtilde_norms", "Gaussian-binomial closed form of the almost-isometry norms", worst_rel,
        1e-8, worst_rel < 1e-8)
    add("vtilde_lower_ratio", "lower bound ratio of the almost-isometry norms", min_ratio, 0.0,
        min_ratio > 0.0)

    rate_gap = _defect_rate_gap(eng)
    add("defect_decay", "projection commutation defects decay with the length exponent",
        rate_gap, 0.2, rate_gap <= 0.2)

    ctx = _branch_context(cfg, eng, cfg.effective_q_radius())
    p_branch = tm.restrict(ctx.omega).matrix.toarray()
    oracle_gap, domination_gap = _qhat_checks(cfg, ctx)
    add("qhat_oracle", "trace formula against the partial-trace evaluation", oracle_gap, 1e-9,
        oracle_gap < 1e-9)
    add("qhat_domination", "perturbed weights dominated by classical ones", domination_gap,
        1e-12, domination_gap <= 1e-12)

    decay = perturbed.decay_audit(cfg.measure, ctx, p_branch)
    env_gap = decay.envelope_gap()
    add("perturbation_envelope", "single-constant envelope of the perturbation",
        env_gap, 0.0, env_gap <= 0.0)
    slope_gap = abs(decay.fitted_rate / decay.target_rate - 1.0)
    add("perturbation_rate", "fitted perturbation decay slope against log q", slope_gap, 0.15,
        slope_gap <= 0.15)

    delta0, k_steps = _irreducibility(cfg, tm)
    delta = delta0 ** k_steps
    har_int = [w for w in tm.domain if cfg.ball_radius - len(w) > tm.range_bound and len(w) <= 6]
    har = kernels.harnack_audit(table, delta0, k_steps, har_int)
    add("harnack", "uniform Harnack constant against the chain bound", har.empirical_delta,
        har.delta_bound, har.passes)
    mult = kernels.multiplicativity_audit(table, lam, delta, tm.range_bound, har_int)
    add("multiplicativity_lower", "geodesic product lower constant", mult.c1_lower,
        mult.lower_bound, mult.c1_lower <= mult.lower_bound * (1 + 1e-12))
    add("multiplicativity_upper", "geodesic product upper constant", mult.c1_upper,
        mult.upper_bound, mult.c1_upper <= mult.upper_bound * (1 + 1e-12))

    resid = _last_entry_worst(cfg, tm, table)
    add("last_entry", "decomposition of the Green kernel at the branch cut", resid, cfg.audit_tol,
        resid < cfg.audit_tol)

    gdif, ratio_rows = _branch_green_checks(cfg, tm, ctx, p_branch, lam)
    anchored = gdif.max_rel[0] / (q ** len(gdif.x_list[0]))
    gd_gap = max(
        rel / (anchored * q ** len(x)) for rel, x in zip(gdif.max_rel, gdif.x_list)
    )
    add("gdif_envelope", "branch Green kernels differ by an envelope in the branch depth",
        gd_gap, 1.0, gd_gap <= 1.0 + 1e-12)

    trend = [abs(r.ratio - 1.0) for r in ratio_rows]
    trend_ok = all(b <= a * (1 + 1e-9) for a, b in zip(trend, trend[1:])) and trend[-1] < trend[0]
    positive = all(r.k_q > 0 for r in ratio_rows)
    cauchy = all(r.profile_q.tail_decreasing() and r.profile_p.tail_decreasing() for r in ratio_rows)
    add("boundary_positivity", "perturbed Martin values positive at the deepest ray point",
        min(r.k_q for r in ratio_rows), 0.0, positive)
    add("boundary_ratio_trend", "perturbed-to-classical ratio moves toward 1 along the ray",
        trend[-1], trend[0], trend_ok and cauchy)
    _log_cache(ctx)
    return entries


def _branch_context(cfg: RunConfig, eng, radius: int):
    store = perturbed.QhatStore(cfg.qhat_cache) if cfg.qhat_cache else None
    ctx = perturbed.BranchContext(eng, cfg.branch_z, radius, store=store)
    return ctx


def _log_cache(ctx) -> None:
    if ctx.store is not None:
        print(
            f"qhat cache: {ctx.store.hits} hits, {ctx.store.misses} misses",
            file=sys.stderr,
        )


def _conjugate_equation_residual(eng) -> float:
    import numpy as _np
    from .intertwiners import Intertwiner as _Iv

    worst = 0.0
    r, rbar = eng.duality_maps()
    for letter, rfirst, rsecond in (("a", r, rbar), ("b", rbar, r)):
        ident = _Iv((letter,), (letter,), _np.eye(eng.n))
        lhs = rsecond.adjoint.tensor(ident) @ ident.tensor(rfirst)
        worst = max(worst, float(_np.abs(lhs.array - _np.eye(eng.n)).max()))
    return worst


def _duality_norm_gap(eng) -> float:
    r, rbar = eng.duality_maps()
    target = eng.q + 1.0 / eng.q
    return max(
        abs(float((r.adjoint @ r).array[0, 0]) - target),
        abs(float((rbar.adjoint @ rbar).array[0, 0]) - target),
        abs(r.norm - math.sqrt(target)),
    )


def _rank_mismatches(eng, max_len: int) -> int:
    mism = 0
    for length in range(max_len + 1):
        for letters in itertools.product("ab", repeat=length):
            w = "".join(letters)
            if eng.irr_dim(w) != words.classical_dim(w):
                mism += 1
    return mism


def _indecomposable_triples(limit: int, cap: int = 14):
    pool = [""] + ["".join(p) for L in range(1, limit) for p in itertools.product("ab", repeat=L)]
    for s, v, t in itertools.product(pool, repeat=3):
        if not v or len(s) + len(v) + len(t) > limit:
            continue
        if len(s) + 2 * len(v) + len(t) > cap:
            continue
        vb = involution(v)
        if (
            indecomposable_factors(s + v) == [s + v]
            and indecomposable_factors(v + vb) == [v + vb]
            and indecomposable_factors(vb + t) == [vb + t]
        ):
            yield s, v, t


def _vtilde_norm_scan(eng) -> tuple[float, float]:
    worst = 0.0
    min_ratio = math.inf
    for s, v, t in _indecomposable_triples(6, eng.cfg.tensor_cap):
        _, nrm = eng.vtilde(s, v, t)
        closed = vtilde_norm_indecomposable(s, v, t, eng.q)
        worst = max(worst, abs(nrm - closed) / closed)
        min_ratio = min(min_ratio, nrm / math.sqrt(words.qdim(v, eng.q)))
    return worst, min_ratio


def _defect_families():
    # the two point masses cover complementary parities of the exponent, so
    # the pooled fit sees every integer exponent in the range
    stems = ["b", "ab", "bab", "abab"]
    fam = [("a", s + "a", "ba", s + "a") for s in stems]
    fam += [("ab", s + "a", "ba", s + "a") for s in stems]
    return fam


def _defect_rate_gap(eng) -> float:
    pts = []
    for u, x, y, z in _defect_families():
        d, e = eng.defect_audit(u, x, y, z)
        if d > 1e-12:
            pts.append((e, math.log(d)))
    if len(pts) < 3:
        raise RuntimeError("not enough nonzero defects for the decay fit")
    xs, ys = zip(*pts)
    slope, _ = np.polyfit(xs, ys, 1)
    return abs(float(slope) / math.log(eng.q) - 1.0)


def _qhat_checks(cfg: RunConfig, ctx) -> tuple[float, float]:
    worst_or = 0.0
    worst_dom = -math.inf
    q = cfg.q
    for (u, s, t) in perturbed.required_entries(cfg.measure, ctx):
        val = perturbed.qhat_entry(u, s, t, ctx)
        oracle, resid = perturbed.qhat_oracle(u, s, t, ctx)
        worst_or = max(worst_or, abs(val - oracle), resid)
        p = fusion.multiplicity(t, u, s) * words.qdim(t, q) / (words.qdim(u, q) * words.qdim(s, q))
        worst_dom = max(worst_dom, abs(val) - p)
    return worst_or, worst_dom


def _last_entry_worst(cfg: RunConfig, tm, table) -> float:
    x = cfg.branch_z
    sub = [w for w in table.domain if w.endswith(x)]
    branch_tm = tm.restrict(sub)
    branch_table = kernels.green_table(
        branch_tm.matrix, sub, cfg.q, base=x, lam=table.lam, solver_tol=cfg.solver_tol
    )
    margin = cfg.ball_radius - tm.range_bound
    sources = [w for w in table.domain if not w.endswith(x) and 0 < len(w) <= 2]
    targets = [w for w in sub if len(w) <= min(4, margin)]
    worst = 0.0
    for s in sources[:4]:
        for t in targets[:6]:
            worst = max(
                worst,
                kernels.last_entry_audit(x, s, t, table, branch_table, tm.matrix, tm.range_bound),
            )
    return worst


def _alternating_branch_words(z: str, count: int) -> list[str]:
    out = []
    w = z
    other = {"a": "b", "b": "a"}
    for _ in range(count):
        out.append(w)
        w = other[w[0]] + w
    return out


def _branch_green_checks(cfg: RunConfig, tm, ctx, p_branch, lam):
    depth = ctx.radius - 1
    x_list = [x for x in _alternating_branch_words(cfg.branch_z, 4) if len(x) <= depth - 1]
    gdif = perturbed.gdif_audit(cfg.measure, ctx, p_branch, x_list, lam=lam)
    matched = words.ball(ctx.radius)
    tm_matched = tm.restrict(matched)
    full_matched = kernels.green_table(
        tm_matched.matrix, matched, cfg.q, base="", lam=lam, solver_tol=cfg.solver_tol
    )
    _, q_table = perturbed.green_Q(cfg.measure, ctx, lam=lam)
    pre, per = cfg.rays[0]
    ray = kernels.ray_words(pre, per, cfg.branch_z, depth)
    s_list = cfg.boundary_sources or [per * k + cfg.branch_z for k in range(0, min(5, depth - 1))]
    s_list = [s for s in s_list if s in ctx.index]
    rows = perturbed.boundary_positivity_and_ratio(ctx, q_table, full_matched, ray, s_list)
    return gdif, rows


def cmd_audit(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = run_audits(cfg)
    ok = all(e["pass"] for e in entries)
    report = {
        "configHash": cfg.config_hash(),
        "q": cfg.q,
        "overallPass": ok,
        "audits": entries,
    }
    write_json(out / "audit_report.json", report)
    for e in entries:
        print(f"[{'PASS' if e['pass'] else 'FAIL'}] {e['name']}: measured={e['measured']:.6g} bound={e['bound']:.6g}")
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_boundary(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    eng = IntertwinerEngine(cfg.model)
    radius = cfg.effective_q_radius()
    ctx = _branch_context(cfg, eng, radius)
    matched = words.ball(radius)
    tm = fusion.transition_matrix(cfg.measure, matched, cfg.q)
    lam = fusion.norm_upper_bound(cfg.measure, cfg.q)
    full = kernels.green_table(tm.matrix, matched, cfg.q, base="", lam=lam, solver_tol=cfg.solver_tol)
    _, q_table = perturbed.green_Q(cfg.measure, ctx, lam=lam)
    depth = radius - 1
    default_sources = [cfg.rays[0][1] * k + cfg.branch_z for k in range(0, min(5, depth - 1))]
    s_list = cfg.boundary_sources or default_sources
    for i, (pre, per) in enumerate(cfg.rays):
        ray = kernels.ray_words(pre, per, cfg.branch_z, depth)
        in_branch = [s for s in s_list if s in ctx.index]
        outside = [s for s in s_list if s not in ctx.index]
        rows_out = []
        rows = perturbed.boundary_positivity_and_ratio(ctx, q_table, full, ray, in_branch)
        for r in rows:
            gq = [math.inf] + r.profile_q.gaps
            gp = [math.inf] + r.profile_p.gaps
            for nidx, t in enumerate(ray):
                rows_out.append(
                    [format_word(r.source), nidx + 1, format_word(t),
                     r.profile_p.values[nidx], r.profile_q.values[nidx],
                     r.profile_q.values[nidx] / r.profile_p.values[nidx],
                     gp[nidx] if nidx else 0.0, gq[nidx] if nidx else 0.0]
                )
        # sources outside the branch carry only the classical profile
        for s in outside:
            prof = kernels.boundary_profile(full, s, ray)
            gp = [math.inf] + prof.gaps
            for nidx, t in enumerate(ray):
                rows_out.append(
                    [format_word(s), nidx + 1, format_word(t), prof.values[nidx],
                     math.nan, math.nan, gp[nidx] if nidx else 0.0, math.nan]
                )
        write_csv(
            out / f"boundary_ray{i}.csv",
            ["s", "n", "t", "K_P", "K_Q", "ratio", "cauchyGapP", "cauchyGapQ"],
            rows_out,
        )
    _log_cache(ctx)
    return EXIT_OK


def cmd_intertwiner(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    eng = IntertwinerEngine(cfg.model)
    rows = []
    for length in range(min(7, cfg.model.tensor_cap) + 1):
        for letters in itertools.product("ab", repeat=length):
            w = "".join(letters)
            rows.append([format_word(w), eng.irr_dim(w), words.classical_dim(w)])
    write_csv(out / "projection_ranks.csv", ["x", "rank", "classicalDim"], rows)
    vrows = []
    for s, v, t in _indecomposable_triples(6, cfg.model.tensor_cap):
        _, nrm = eng.vtilde(s, v, t)
        closed = vtilde_norm_indecomposable(s, v, t, cfg.q)
        vrows.append(
            [format_word(s), format_word(v), format_word(t), nrm, closed,
             abs(nrm - closed) / closed]
        )
    write_csv(
        out / "vtilde_norms.csv",
        ["s", "v", "t", "norm", "closedForm", "relErr"],
        vrows,
    )
    return EXIT_OK


COMMANDS = {
    "walk": cmd_walk,
    "audit": cmd_audit,
    "boundary": cmd_boundary,
    "intertwiner": cmd_intertwiner,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aufwalk",
        description="Random walks on the two-letter representation tree: kernels and audits.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="path to the JSON run configuration")
    parser.add_argument("--radius", type=int, default=None, help="override ballRadius")
    parser.add_argument("--q", type=float, default=None, help="override the deformation parameter")
    parser.add_argument("--out", default=None, help="override outputDir")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, radius=args.radius, q=args.q, out=args.out)
        return COMMANDS[args.command](cfg)
    except (TensorCapError, RadiusCapError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
