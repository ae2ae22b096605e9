"""Config-driven experiment runner.

``cayperc <command> --config exp.toml [--seed N] [--out DIR] [--workers N]
[--set section.key=value ...] [--plan]``. Every command writes a JSON report
and CSV data to the output directory and prints one line per assertion.
Exit status: 0 all assertions pass, 2 configuration error, 3 assertion
failure, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .cayley import (BallSizeError, CertificationError, RadiusFunctions, boundaries, build_ball, check_growth_lower)
from .export import write_csv, write_json
from .groups import GroupError, check_minimality, group_from_config, make_group
from .kernel import (ExactnessError, green_blocks, green_truncated, heat_kernel, return_prob_checks, scale_window,
                     verify_blocks)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3
EXIT_RESOURCE = 4

COMMANDS = ["ball", "growth", "kernel", "green", "verify-blocks", "profile", "isop-check", "pn-check", "gff-sample",
            "schedules", "russo", "percolate", "pc", "comparison", "quotient", "return-bounds"]


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


# --------------------------------------------------------------------------
# configuration


def _parse_override(text: str) -> tuple[list[str], Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key.strip().split("."), value


def load_config(path: str | None, overrides: list[str] | None = None) -> dict:
    cfg: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                cfg = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for text in overrides or []:
        keys, value = _parse_override(text)
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {text!r} descends into a non-table")
        node[keys[-1]] = value
    return cfg


@dataclass
class Context:
    command: str
    cfg: dict
    seed: int
    out: Path
    workers: int
    checks: list = field(default_factory=list)
    _group: tuple | None = None

    @property
    def section(self) -> dict:
        sec = self.cfg.get(self.command, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"[{self.command}] must be a table")
        return sec

    def get(self, key: str, default=None, kind: type | None = None, lo=None, hi=None, required=False):
        """Command table first, then ``[window]``, then the top level."""
        for table in (self.section, self.cfg.get("window", {}), self.cfg):
            if isinstance(table, dict) and key in table:
                val = table[key]
                break
        else:
            if required:
                raise ConfigError(f"missing required parameter {key!r} for {self.command}")
            return default
        if kind is not None:
            try:
                if kind is int and (isinstance(val, bool) or float(val) != int(val)):
                    raise ValueError
                val = kind(val)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key} must be {kind.__name__}, got {val!r}") from exc
        if lo is not None and val < lo or hi is not None and val > hi:
            raise ConfigError(f"{key} = {val} outside [{lo}, {hi}]")
        return val

    def get_list(self, key: str, default=None, kind=float, lo=None, hi=None):
        val = self.get(key, default)
        if val is None:
            raise ConfigError(f"missing required list {key!r} for {self.command}")
        if isinstance(val, dict) and {"start", "stop", "step"} <= set(val):
            val = np.arange(val["start"], val["stop"] + 0.5 * val["step"], val["step"]).round(12).tolist()
        if not isinstance(val, (list, tuple)):
            val = [val]
        out = []
        for v in val:
            try:
                x = kind(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key} entries must be {kind.__name__}") from exc
            if lo is not None and x < lo or hi is not None and x > hi:
                raise ConfigError(f"{key} entry {x} outside [{lo}, {hi}]")
            out.append(x)
        return out

    def group(self):
        if self._group is None:
            g = self.section.get("group", self.cfg.get("group"))
            if not isinstance(g, dict):
                raise ConfigError("config needs a [group] table")
            try:
                self._group = group_from_config(g)
            except (GroupError, TypeError) as exc:
                raise ConfigError(f"invalid group: {exc}") from exc
        return self._group

    def ball(self, radius: int | None = None):
        model, gens = self.group()
        R = self.get("radius", kind=int, lo=0, required=True) if radius is None else radius
        return build_ball(model, gens, R, max_vertices=self.get("max_vertices", 4_000_000, int, lo=1))

    def check(self, name: str, ok: bool | None, detail: str = ""):
        self.checks.append({"name": name, "ok": ok, "detail": detail})
        tag = "PASS" if ok else ("SKIP" if ok is None else "FAIL")
        print(f"{tag} {self.command}: {name}" + (f" ({detail})" if detail else ""))

    def csv(self, name: str, header, rows):
        return write_csv(self.out / f"{name}.csv", header, rows)

    def report(self, body: dict):
        meta = {"command": self.command, "seed": self.seed, "version": __version__, "config": self.cfg,
                "assertions": self.checks}
        meta.update(body)
        return write_json(self.out / f"{self.command}.json", meta)


# --------------------------------------------------------------------------
# commands


def cmd_ball(ctx: Context):
    ball = ctx.ball()
    codes = ball.codes()
    ctx.csv("ball_vertices", ["index", "code", "dist"], ((i, c, int(d)) for i, (c, d) in enumerate(zip(codes, ball.dist))))
    labels = [ball.model.format(g) for g in ball.gens.elements]
    ctx.csv("ball_edges", ["u", "v", "generator"],
            ((u, int(v), labels[j]) for u in range(ball.size) for j, v in enumerate(ball.neighbors[u]) if v >= 0))
    ctx.check("canonical codes injective", len(set(codes)) == ball.size, f"{ball.size} vertices")
    nb = ball.neighbors
    ok = nb >= 0
    gap = np.abs(ball.dist[:, None] - ball.dist[np.maximum(nb, 0)])[ok]
    ctx.check("distances 1-Lipschitz along edges", bool(np.all(gap <= 1)))
    ctx.report({"radius": ball.radius, "vertices": ball.size, "growth": ball.growth().tolist()})


def cmd_growth(ctx: Context):
    model, gens = ctx.group()
    n_max = ctx.get("n_max", 4, int, lo=0, hi=64)
    R = max(n_max, ctx.get("radius", n_max, int, lo=0))
    ball = ctx.ball(R)
    verdict = check_minimality(gens, ctx.get("certification_radius", 6, int, lo=1, hi=64))
    body = {"minimality": {"kind": verdict.kind.name, "radius": verdict.radius,
                           "witnesses": [[i, list(map(int, w))] for i, w in verdict.witnesses], "notes": verdict.notes}}
    if verdict.certified:
        rep = check_growth_lower(ball, n_max, verdict)
        ctx.csv("growth", ["n", "ball_size", "c_n", "c_n_D^n", "holds"],
                ((n, s, c, None if c is None else c * rep.degree**n, v) for n, s, c, v in rep.rows()))
        ctx.check("growth lower bound |B(o,n)| >= c_n D^n", rep.passed, f"n <= {n_max}")
        body["growth"] = {"sizes": rep.sizes, "c_n": [str(c) for c in rep.cn_values], "verdicts": rep.verdicts}
    else:
        ctx.check("growth lower bound |B(o,n)| >= c_n D^n", None, f"generating set {verdict.kind.name}")
    horizon = ctx.get("horizon", R, int, lo=1)
    rf = RadiusFunctions(gens, horizon)
    sizes = ball.growth().tolist()
    sub_ok = all(rf.script_B(n) <= sizes[n] for n in range(min(len(sizes), horizon + 1)))
    ctx.check("script_B(n) <= |B(o,n)|", sub_ok)
    m_max = ctx.get("m_max", 16, int, lo=1)
    rows = [(m, rf.R(m), rf.Rbar(m)) for m in range(1, m_max + 1)]
    ctx.csv("radius_functions", ["m", "R", "Rbar"], rows)
    body["radius_functions"] = [{"m": m, "R": _fin(r), "Rbar": _fin(rb)} for m, r, rb in rows]
    ctx.report(body)


def _fin(x):
    return None if isinstance(x, float) and math.isinf(x) else int(x)


def cmd_kernel(ctx: Context):
    n = ctx.get("steps", 4, int, lo=0, hi=200)
    ball = ctx.ball(ctx.get("radius", n, int, lo=n))
    row = heat_kernel(ball, ball.origin, n, exact=True)
    nz = np.flatnonzero(row.counts)
    ctx.csv("kernel", ["index", "code", "dist", "count", "denominator", "value"],
            ((int(i), ball.codes()[i], int(ball.dist[i]), int(row.counts[i]), row.denominator, float(row.values[i]))
             for i in nz))
    ctx.check("mass conservation (exact)", int(row.counts.sum()) == row.denominator)
    ctx.check("support inside B(o, n)", bool(np.all(ball.dist[nz] <= n)))
    ctx.report({"steps": n, "p_n_oo": str(row.fraction(ball.origin)), "max": str(row.max_fraction())})


def cmd_green(ctx: Context):
    N = ctx.get("N", 3, int, lo=1, hi=8)
    ball = ctx.ball()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tr = green_truncated(ball, N)
    ctx.csv("green_partial", ["index", "code", "dist", "partial"],
            ((i, c, int(d), float(v)) for i, (c, d, v) in enumerate(zip(ball.codes(), ball.dist, tr.partial))))
    ctx.check("partial sums nonnegative", bool(np.all(tr.partial >= 0)))
    ctx.check("partial sum maximal at the origin", bool(tr.partial.max() == tr.at_origin))
    ctx.report({"N": N, "at_origin": tr.at_origin, "increments": tr.increments, "ratio": tr.ratio,
                "decay_exponent": tr.decay_exponent, "tail_estimate": tr.tail_estimate,
                "recurrent_warning": tr.recurrent_warning, "warnings": [str(w.message) for w in caught]})


def cmd_verify_blocks(ctx: Context):
    ball = ctx.ball()
    scales = ctx.get_list("scales", [1, 2, 3], int, lo=1, hi=10)
    cap = ctx.get("max_kernel_radius", None)
    blocks = green_blocks(ball, scales, max_kernel_radius=cap)
    rep = verify_blocks(blocks)
    limit = ctx.get("export_limit", 1500, int, lo=0)
    for b in blocks:
        r = b.report
        ctx.check(f"g_{b.scale} verified", None if r.status == "skipped" else r.status == "pass",
                  r.reason or f"min eig {r.min_eig:.3e}, min entry {r.min_entry:.3e}, range violation {r.range_violation}")
        if not b.skipped and b.size <= limit:
            M = b.dense()
            ii, jj = np.nonzero(M)
            ctx.csv(f"block_g{b.scale}", ["row", "col", "value"], zip(ii.tolist(), jj.tolist(), M[ii, jj].tolist()))
    if 1 in scales:
        b1 = blocks[scales.index(1)]
        ctx.check("g_1(o,o) = 1", not b1.skipped and b1.diag == 1.0)
    ctx.report({"window": {"radius": ball.radius, "vertices": ball.size},
                "blocks": [dict(r.as_dict(), declared_range=2 ** (r.scale + 1) - 2) for r in rep.blocks],
                "passed": rep.passed})


def cmd_profile(ctx: Context):
    from .isoperimetry import expansion_profile

    s_max = ctx.get("s_max", 6, int, lo=1)
    ball = ctx.ball(ctx.get("radius", s_max, int, lo=s_max))
    tab = expansion_profile(ball, s_max, capped=bool(ctx.get("capped", False)), workers=ctx.workers)
    ctx.csv("profile", ["u", "phi", "witness_size", "edge_boundary", "witness_codes"], tab.rows(ball))
    ctx.check("Phi nonincreasing", all(a >= b for a, b in zip(tab.phi, tab.phi[1:])))
    ok = all(boundaries(ball, w)[1] == e for w, e in zip(tab.witnesses, tab.edge_boundaries))
    ctx.check("witnesses re-verify", ok)
    ctx.report({"s_max": s_max, "exhaustive": tab.exhaustive, "phi": [str(p) for p in tab.phi], "counts": tab.counts})


def cmd_isop_check(ctx: Context):
    from .isoperimetry import check_isop_inequalities

    s_max = ctx.get("s_max", 8, int, lo=1, hi=12)
    ball = ctx.ball(ctx.get("radius", s_max, int, lo=s_max))
    rep = check_isop_inequalities(ball, s_max, ctx.get("horizon", 64, int, lo=1), ctx.workers)
    ctx.csv("isop", ["size", "count", "R", "Rbar", "edge_min", "vertex_min", "edge_ok", "vertex_ok"],
            zip(rep.sizes, rep.counts, map(_fin, rep.R), map(_fin, rep.Rbar), rep.edge_min, rep.vertex_min,
                rep.edge_ok, rep.vertex_ok))
    ctx.check("edge isoperimetry 1/(16 Rbar(2|K|))", all(v is not False for v in rep.edge_ok),
              f"{rep.sets_checked} sets, worst slack {float(rep.worst_edge_slack or 0):.4g}")
    ctx.check("vertex isoperimetry 1/(2 R(2|K|))", all(v is not False for v in rep.vertex_ok),
              f"worst slack {float(rep.worst_vertex_slack or 0):.4g}")
    ctx.report(rep.as_dict())


def cmd_pn_check(ctx: Context):
    from .isoperimetry import check_theorem_pn

    ball = ctx.ball()
    eps = ctx.get_list("eps", [1.0, 0.5, 0.25], float, lo=1e-12)
    rep = check_theorem_pn(ball, eps, ctx.get("horizon", 64, int, lo=1))
    ctx.csv("pn", ["eps", "n_star", "integral", "status", "certificate", "step", "max_kernel", "margin"],
            ((r.eps, r.n_star, r.integral, r.status, r.certificate, r.step, r.max_kernel, r.margin)
             for r in rep.rows))
    for r in rep.rows:
        ctx.check(f"max_y p_n*(o,y) <= {r.eps}", None if r.status == "skipped" else r.status == "pass",
                  r.reason or f"n* = {r.n_star}, {r.certificate} at step {r.step}")
    ctx.report(rep.as_dict())


def cmd_gff_sample(ctx: Context):
    from . import gff
    from .rng import stream

    ball = ctx.ball()
    N = ctx.get("N", None)
    N = gff.default_truncation(ball) if N is None else int(N)
    samples = ctx.get("samples", 10, int, lo=1, hi=10**7)
    blocks = green_blocks(ball, range(1, N + 1))
    verify_blocks(blocks)
    fs = gff.sample_truncated_gff(ball, N, stream(ctx.seed, "gff-sample"), blocks, size=samples, seed=ctx.seed)
    ctx.out.mkdir(parents=True, exist_ok=True)
    arr = np.stack([fs.scales[n] for n in range(1, N + 1)]).astype("<f8")
    (ctx.out / "fields.bin").write_bytes(arr.tobytes())
    write_json(ctx.out / "fields.json", {"window": f"{ball.model.name} ball R={ball.radius}", "vertices": ball.size,
                                         "scales": list(range(1, N + 1)), "samples": samples, "seed": ctx.seed,
                                         "shape": list(arr.shape), "dtype": "float64 little-endian"},
               timestamp=False)
    dom = gff.check_union_domination([fs.scales[n] for n in range(1, N + 1)], N)
    ctx.check("pigeonhole domination", dom.passed, f"{dom.checked} vertex-samples")
    rows = []
    for b in blocks:
        x = fs.scales[b.scale][..., ball.origin]
        rows.append((b.scale, b.diag, float(np.var(x)) if samples > 1 else None))
    ctx.csv("gff_variance", ["n", "g_n_oo", "empirical_var"], rows)
    ctx.report({"N": N, "samples": samples, "domination": dom.as_dict()})


def cmd_schedules(ctx: Context):
    from . import gff

    model, gens = ctx.group()
    D = ctx.get("D", gens.degree, int, lo=1)
    N = ctx.get("N", 4, int, lo=1, hi=8)
    with warnings.catch_warnings():
        # only the diagonal increments are needed; recurrence is irrelevant here
        warnings.simplefilter("ignore", RuntimeWarning)
        diag = green_truncated(build_ball(model, gens, 1), N).increments
    C0 = ctx.get("C0", None)
    rows = list(gff.schedule_rows(D, diag, C0))
    ctx.csv("schedules", ["n", "lambda_n", "g_n_diag", "term", "partial_t", "log_term", "log_partial_t"], rows)
    ctx.check("lambda_1 = -1 - pi^2/6", abs(rows[0][1] - gff.LAMBDA_1) == 0.0, f"{rows[0][1]:.6f}")
    ctx.report({"D": D, "C0": gff.default_C0() if C0 is None else C0, "a": gff.normal_a(),
                "lambda_partial_sums": [gff.lambda_partial_sum(n) for n in (1, 2, 5, 10, 30)]})


def cmd_russo(ctx: Context):
    from .perco import russo_d1, russo_d2

    ball = ctx.ball(ctx.get("radius", 3, int, lo=1))
    samples = ctx.get("samples", 100_000, int, lo=10)
    delta = ctx.get("delta", 0.05, float, lo=1e-6)
    kinds = ctx.get_list("kinds", ["d1"], str)
    out = {}
    for kind in kinds:
        if kind == "d1":
            p = ctx.get("p", 0.6, float, lo=0.0, hi=1.0)
            t = -math.log1p(-p)
            rep = russo_d1(ball, [ball.origin], None, t, samples, ctx.seed, delta)
        elif kind == "d2":
            rep = russo_d2(ball, [ball.origin], None, ctx.get("t", math.log(2.0), float, lo=0.0),
                           ctx.get("n", 1, int, lo=1), ctx.get("lambda", 0.0, float), ctx.get("N", None),
                           samples, ctx.seed, delta)
        else:
            raise ConfigError(f"unknown Russo kind {kind!r}")
        for l in rep.lines:
            ctx.check(f"{kind} agreement at delta={l.delta}", l.agree if rep.asserted else None,
                      f"lhs {l.lhs:.5f}, rhs {l.rhs:.5f}, z {l.z:.2f}")
        ctx.csv(f"russo_{kind}", ["delta", "lhs", "lhs_se", "rhs", "rhs_se", "z"],
                ((l.delta, l.lhs, l.lhs_se, l.rhs, l.rhs_se, l.z) for l in rep.lines))
        out[kind] = rep.as_dict()
    ctx.report(out)


def cmd_percolate(ctx: Context):
    from .perco import Bernoulli, Excursion, connection_prob

    ball = ctx.ball()
    samples = ctx.get("samples", 1000, int, lo=1)
    model = ctx.get("model", "bernoulli", str)
    rows = []
    if model == "bernoulli":
        for p in ctx.get_list("p", [0.5], float, lo=0.0, hi=1.0):
            est = connection_prob(ball, Bernoulli(p), [ball.origin], None, samples, ctx.seed, key=f"percolate-{p!r}")
            rows.append((p, est.estimate, est.stderr))
    elif model == "excursion":
        N = ctx.get("N", 1, int, lo=1)
        blocks = green_blocks(ball, range(1, N + 1))
        verify_blocks(blocks)
        for h in ctx.get_list("h", [-1.0], float):
            est = connection_prob(ball, Excursion(h, N), [ball.origin], None, samples, ctx.seed, blocks,
                                  key=f"percolate-h-{h!r}")
            rows.append((h, est.estimate, est.stderr))
    else:
        raise ConfigError(f"unknown model {model!r}")
    ctx.csv("percolate", ["parameter", "estimate", "stderr"], rows)
    ctx.check("estimates in [0, 1]", all(0.0 <= r[1] <= 1.0 for r in rows))
    ctx.report({"model": model, "samples": samples, "curve": [list(r) for r in rows]})


def cmd_pc(ctx: Context):
    from .perco import pc_estimate

    model, gens = ctx.group()
    sizes = ctx.get_list("sizes", None, int, lo=1)
    grid = ctx.get_list("grid", None, float, lo=0.0, hi=1.0)
    est = pc_estimate(gens, sizes, grid, ctx.get("samples", 1000, int, lo=10), ctx.seed, ctx.workers)
    ctx.csv("pc_curves", ["window", "p", "crossing", "stderr"], (r for w in est.windows for r in w.rows()))
    ctx.check("coupled sweep nondecreasing in p", all(bool(np.all(np.diff(w.curve) >= 0)) for w in est.windows))
    expect = ctx.get("expect", None)
    if expect is not None:
        lo, hi = map(float, expect)
        ctx.check(f"crossing estimate in [{lo}, {hi}]", lo <= est.estimate <= hi, f"{est.estimate:.4f}")
    ctx.report(est.as_dict())


def cmd_comparison(ctx: Context):
    from .gff import default_truncation
    from .perco import comparison_experiment

    ball = ctx.ball(ctx.get("radius", 8, int, lo=2))
    N = ctx.get("N", None)
    N = default_truncation(ball) if N is None else int(N)
    eps = ctx.get_list("eps", [0.999, 0.9, 0.7, 0.5, 0.3, 0.1, 0.01], float, lo=0.0, hi=1.0)
    rep = comparison_experiment(ball, eps, N, ctx.get("samples", 2000, int, lo=10), ctx.seed)
    ctx.csv("comparison", ["eps", "p", "bernoulli", "bernoulli_se", "gff", "gff_se", "margin", "holds"],
            ((r["eps"], r["p"], r["bernoulli"], r["bernoulli_se"], r["gff"], r["gff_se"], r["margin"], r["holds"])
             for r in rep.rows))
    ctx.check("excursion nesting h=0 inside h=-1", rep.h_check["per_sample_violations"] == 0)
    ctx.report(rep.as_dict())


def cmd_quotient(ctx: Context):
    from .perco import quotient_experiment

    model, gens = ctx.group()
    sec = ctx.section
    tcfg = sec.get("target")
    if not isinstance(tcfg, dict):
        raise ConfigError("[quotient] needs a 'target' table")
    try:
        target = make_group(str(tcfg["family"]), **{k: v for k, v in tcfg.items() if k != "family"})
    except (GroupError, KeyError) as exc:
        raise ConfigError(f"invalid target group: {exc}") from exc
    images = sec.get("images")
    if images is None:
        raise ConfigError("[quotient] needs 'images'")
    try:
        rep = quotient_experiment(gens, target, [target.parse(v) for v in images],
                                  ctx.get_list("source_sizes", None, int, lo=1),
                                  ctx.get_list("target_sizes", None, int, lo=1),
                                  ctx.get_list("source_grid", None, float, lo=0, hi=1),
                                  ctx.get_list("target_grid", None, float, lo=0, hi=1),
                                  ctx.get("samples", 1000, int, lo=10), ctx.seed, ctx.workers)
    except GroupError as exc:
        raise ConfigError(str(exc)) from exc
    ctx.check("p_c(G1) <= p_c(G2) with 3-sigma margin", rep.passed,
              rep.note or f"margin {rep.margin_sigma:.1f} sigma")
    rows = []
    for side, est in (("source", rep.source_pc), ("target", rep.target_pc)):
        if est is not None:
            rows += [(side,) + r for w in est.windows for r in w.rows()]
    ctx.csv("quotient_curves", ["side", "window", "p", "crossing", "stderr"], rows)
    ctx.report(rep.as_dict())


def cmd_return_bounds(ctx: Context):
    model, gens = ctx.group()
    n_max = ctx.get("n_max", 10, int, lo=1, hi=40)
    ball = ctx.ball(max(n_max, ctx.get("radius", n_max, int, lo=0)))
    verdict = check_minimality(gens, ctx.get("certification_radius", 6, int, lo=1))
    rep = return_prob_checks(ball, n_max, verdict)
    ctx.csv("return_bounds", ["n", "max_p_n", "max_p_n_float", "le_1_over_D", "le_6_over_D2"],
            ((n, m, float(m), a, b) for n, m, a, b in rep.as_rows()))
    ctx.check("p_n(o,y) <= 1/D for 1 <= n <= n_max", all(rep.one_over_D))
    ctx.check("p_n(o,y) <= 6/D^2 for 4 <= n <= n_max",
              None if rep.six_skipped_reason else all(v for v in rep.six_over_D2 if v is not None),
              rep.six_skipped_reason or "")
    ctx.report({"degree": rep.degree, "n_max": n_max, "minimality": verdict.kind.name,
                "max_values": [str(m) for m in rep.max_values]})


HANDLERS: dict[str, Callable[[Context], None]] = {
    "ball": cmd_ball, "growth": cmd_growth, "kernel": cmd_kernel, "green": cmd_green,
    "verify-blocks": cmd_verify_blocks, "profile": cmd_profile, "isop-check": cmd_isop_check,
    "pn-check": cmd_pn_check, "gff-sample": cmd_gff_sample, "schedules": cmd_schedules, "russo": cmd_russo,
    "percolate": cmd_percolate, "pc": cmd_pc, "comparison": cmd_comparison, "quotient": cmd_quotient,
    "return-bounds": cmd_return_bounds,
}


# --------------------------------------------------------------------------
# plans


def _ball_size_estimate(model, gens, R: int) -> int:
    """Exact for small radii, extrapolated by the growth degree beyond."""
    r0 = min(R, 6)
    sizes = build_ball(model, gens, r0, max_vertices=10**6).growth()
    if R <= r0:
        return int(sizes[R])
    d = model.growth_dimension
    if not model.nilpotent or math.isinf(d):
        ratio = sizes[-1] / max(sizes[-2], 1)
        return int(sizes[-1] * ratio ** (R - r0))
    return int(sizes[-1] * (R / r0) ** d)


def plan(ctx: Context) -> dict:
    model, gens = ctx.group()
    out = {"command": ctx.command, "group": model.name, "degree": gens.degree, "seed": ctx.seed,
           "workers": ctx.workers}
    R = ctx.get("radius", None)
    if R is not None:
        out["window_vertices_estimate"] = _ball_size_estimate(model, gens, int(R))
    samples = ctx.get("samples", None)
    if samples is not None:
        out["samples"] = int(samples)
    if ctx.command in ("verify-blocks", "gff-sample", "comparison"):
        scales = ctx.get("scales", None) or list(range(1, int(ctx.get("N", 3) or 3) + 1))
        K = scale_window(max(scales))[1] + 2
        out["kernel_ball_vertices_estimate"] = _ball_size_estimate(model, gens, K)
        if "window_vertices_estimate" in out:
            out["dense_bytes_per_block"] = 8 * out["window_vertices_estimate"] ** 2
    if ctx.command == "pc":
        sizes = ctx.get_list("sizes", [16], int)
        out["box_vertices"] = [(2 * L + 1) ** getattr(model, "d", 1) for L in sizes]
    return out


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cayperc", description="Site percolation laboratory for Cayley graphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="PATH", help="TOML experiment config")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--workers", type=int, help="worker count (default: available CPUs)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. --set window.radius=8")
        p.add_argument("--plan", action="store_true", help="print the resource estimate and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "run":
        argv = argv[1:]
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigError("a seed is required (config 'seed' or --seed); there is no wall-clock default")
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        out = Path(args.out or cfg.get("out", "out")) / args.command
        workers = args.workers or cfg.get("workers") or os.cpu_count() or 1
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("workers must be a positive integer")
        ctx = Context(args.command, cfg, int(seed), out, workers)
        if args.plan:
            print(json.dumps(plan(ctx), indent=2))
            return EXIT_OK
        HANDLERS[args.command](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BallSizeError, MemoryError, ExactnessError, CertificationError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (GroupError, ValueError) as exc:
        # library argument validation: the config asked for something out of domain
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = [c for c in ctx.checks if c["ok"] is False]
    print(f"{args.command}: {len(ctx.checks) - len(failed)}/{len(ctx.checks)} assertions without failure; "
          f"outputs in {out}")
    return EXIT_ASSERT if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
