"""Command-line entry point: ``fvtree <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from ._jit import BACKEND
from .rng import MAX_SEED, replicate_rng

FORMATS = ("csv", "json")
SUBCOMMANDS = ("gen-table", "moments", "sim-coalescent", "sim-moran", "verify")
MORAN_FUNCTIONALS = ("mark_ratio", "psi12", "psihat12", "n_eps", "W", "B")
COALESCENT_FUNCTIONALS = ("slices", "z_profile", "level_times")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 1
    eps: Optional[float] = None
    lam: Optional[float] = None
    theta: float = 0.0
    alpha: float = 0.0
    N: int = 500
    n0: Optional[int] = None
    reps: int = 1
    t_grid: List[float] = field(default_factory=list)
    out: Optional[str] = None
    format: Optional[str] = None
    functional: List[str] = field(default_factory=list)
    formula: List[str] = field(default_factory=list)
    levels: List[int] = field(default_factory=list)
    suite: str = "all"

    def validate(self) -> "RunConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if self.eps is not None and not (self.eps > 0 and math.isfinite(self.eps)):
            raise ConfigError("--eps must be positive")
        if self.lam is not None and not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ConfigError("--lambda must be nonnegative")
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ConfigError("--theta must be nonnegative")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ConfigError("--alpha must be nonnegative")
        if not 2 <= self.N <= 5000:
            raise ConfigError("--N must lie in [2, 5000]")
        if self.n0 is not None and not 2 <= self.n0 <= 10**6:
            raise ConfigError("--n0 must lie in [2, 10^6]")
        if self.reps < 1:
            raise ConfigError("--reps must be at least 1")
        if any(not (t > 0 and math.isfinite(t)) for t in self.t_grid):
            raise ConfigError("--t-grid values must be positive")
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ConfigError("--t-grid must be strictly increasing")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {FORMATS}")
        if self.subcommand == "sim-moran":
            bad = [f for f in self.functional if f not in MORAN_FUNCTIONALS]
            if bad:
                raise ConfigError(f"unknown functional(s) {bad}; choose from {MORAN_FUNCTIONALS}")
            if "W" in self.functional and not self.lam:
                raise ConfigError("W needs --lambda > 0")
            if self.alpha > 0 and self.theta == 0:
                raise ConfigError("selection acts on types: set --theta > 0 together with --alpha")
        if self.subcommand == "sim-coalescent":
            bad = [f for f in self.functional if f not in COALESCENT_FUNCTIONALS]
            if bad or len(self.functional) > 1:
                raise ConfigError(f"choose one functional from {COALESCENT_FUNCTIONALS}")
            if self.functional and self.functional[0] == "z_profile" and not self.lam:
                raise ConfigError("z_profile needs --lambda > 0")
        if any(n < 1 for n in self.levels):
            raise ConfigError("--levels must be positive")
        return self


def parse_grid(text: str) -> List[float]:
    """``"0.1,0.5,1"`` or ``"start:stop:count"`` (inclusive linear grid)."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse time grid {text!r}") from None


def manifest(cfg: RunConfig) -> Dict:
    import mpmath

    versions = {"fvtree": __version__, "numpy": np.__version__, "mpmath": mpmath.__version__, "python": platform.python_version()}
    try:
        import numba

        versions["numba"] = numba.__version__
    except ImportError:
        pass
    return {"config": asdict(cfg), "seed": cfg.seed, "backend": BACKEND, "versions": versions}


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def emit(cfg: RunConfig, records: Iterable[Dict], columns: Sequence[str], stream=None) -> None:
    """Write records with a manifest to ``cfg.out`` (or stdout) as CSV or JSON."""
    fmt = cfg.format or "csv"
    man = manifest(cfg)
    records = [{k: _jsonable(r.get(k)) for k in columns} for r in records]
    buf = io.StringIO()
    if fmt == "json":
        json.dump({"manifest": man, "records": records}, buf, indent=2, ensure_ascii=False, default=str)
        buf.write("\n")
    else:
        buf.write("# manifest: " + json.dumps(man, ensure_ascii=False, default=str) + "\n")
        w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        w.writerows(records)
    text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


# ---------------------------------------------------------------------------
# gen-table


def _fmt_row(row, labels) -> str:
    if not row:
        return "(none)"
    return ", ".join(f"{m}x Ψ[{labels[j]}]" for m, j in row)


def table_records() -> List[Dict]:
    from .acceptance import derived_transitions
    from .reference_table import REFERENCE_TRANSITIONS

    labels = [lab for lab, _ in REFERENCE_TRANSITIONS]
    out = []
    for i, ((lab, ref), (_, der)) in enumerate(zip(REFERENCE_TRANSITIONS, derived_transitions())):
        ref = sorted(ref, key=lambda x: x[1])
        out.append({
            "item": i,
            "label": lab,
            "derived": _fmt_row(der, labels),
            "printed": _fmt_row(ref, labels),
            "match": der == ref,
        })
    return out


def matrix_block_records() -> List[Dict]:
    """Entries of the displayed 13x13 block of -A that differ from the derived matrix."""
    from .algebra import RationalFunction, rf_symbols
    from .basis import psi, to_matrix
    from .reference_table import REFERENCE_NEG_A_BLOCK, REFERENCE_TRANSITIONS

    (L,) = rf_symbols("λ")
    graphs = [psi(lab) for lab, _ in REFERENCE_TRANSITIONS[:13]]
    M = to_matrix(graphs)
    out = []
    for r, row in enumerate(REFERENCE_NEG_A_BLOCK):
        for c, shown in enumerate(row):
            derived = -M.entries.get((r, c), RationalFunction())
            if isinstance(shown, tuple):
                expected, shown_s = shown[0] * L + shown[1], f"{shown[0]}λ+{shown[1]}"
            else:
                expected, shown_s = RationalFunction(shown), str(shown)
            if derived != expected:
                out.append({"row": r, "col": c, "label": REFERENCE_TRANSITIONS[r][0], "derived": str(derived), "printed": shown_s})
    return out


def marked_records() -> List[Dict]:
    from .algebra import rf_symbols
    from .basis import apply_generator, psi
    from .reference_table import REFERENCE_MARKED_LABELS, REFERENCE_MARKED_ROWS

    L, T = rf_symbols("λ", "ϑ")
    printed = {lab: (d, row) for lab, d, row in REFERENCE_MARKED_ROWS}
    graphs = {lab: psi(lab.lstrip("^") or "∅", marked=True) for lab in REFERENCE_MARKED_LABELS}
    names = {g: lab for lab, g in graphs.items()}
    out = []
    for lab in REFERENCE_MARKED_LABELS:
        g = graphs[lab]
        gen = apply_generator(g)
        diag = gen[g] if g in gen else 0
        terms = sorted(((int(c.constant_value()), names.get(h, str(h))) for h, c in gen.items() if h != g), key=lambda x: x[1])
        rec = {
            "label": lab,
            "derived_diagonal": str(diag),
            "derived": ", ".join(f"{m}x Ψ̂[{n}]" for m, n in terms) or "(none)",
            "printed_diagonal": "",
            "printed": "",
            "match": "",
        }
        if lab in printed:
            (a, b, c), row = printed[lab]
            pdiag = -(a * L + b * T + c)
            prow = sorted(row, key=lambda x: x[1])
            rec["printed_diagonal"] = str(pdiag)
            rec["printed"] = ", ".join(f"{m}x Ψ̂[{n}]" for m, n in prow)
            rec["match"] = bool(pdiag == diag and prow == terms)
        out.append(rec)
    return out


def cmd_gen_table(cfg: RunConfig) -> int:
    rows = table_records()
    marked = marked_records()
    block = matrix_block_records()
    if cfg.format:
        recs = [dict(r, section="unmarked") for r in rows]
        recs += [dict(r, section="marked", item="", printed=r["printed"], derived=r["derived"]) for r in marked]
        recs += [dict(section="matrix_block", item=f"({r['row']},{r['col']})", label=r["label"], derived=r["derived"], printed=r["printed"], match=False) for r in block]
        emit(cfg, recs, ["section", "item", "label", "derived", "printed", "match"])
        return 0
    out = []
    out.append("Generator merge transitions (derived vs printed table)")
    for r in rows:
        flag = "ok " if r["match"] else "!! "
        out.append(f"{flag}{r['item']:>2} Ψ[{r['label']}]: {r['derived']}")
        if not r["match"]:
            out.append(f"      printed: {r['printed']}")
    n_bad = sum(not r["match"] for r in rows)
    out.append(f"{len(rows) - n_bad}/{len(rows)} items agree")
    out.append("")
    out.append("Displayed block of -A: entries differing from the derived matrix")
    for r in block or []:
        out.append(f"!! ({r['row']},{r['col']}) Ψ[{r['label']}]: derived {r['derived']}, printed {r['printed']}")
    if not block:
        out.append("(none)")
    out.append("")
    out.append("Marked block (diagonal entry; off-diagonal transitions)")
    for r in marked:
        out.append(f"   Ψ̂[{r['label']}]: {r['derived_diagonal']}; {r['derived']}")
        if r["printed"]:
            flag = "ok " if r["match"] else "!! "
            out.append(f"{flag}   closed form: {r['printed_diagonal']}; {r['printed']}")
    print("\n".join(out))
    return 0


# ---------------------------------------------------------------------------
# moments


def cmd_moments(cfg: RunConfig) -> int:
    from .algebra import SYMBOLS
    from .moments import NAMED_FORMULAS, increment_moment, named_formula, tavare_mean_N, tn_moment

    names = cfg.formula or sorted(NAMED_FORMULAS)
    extra = {"increment2", "increment4", "tavare", "tn"}
    unknown = [n for n in names if n not in NAMED_FORMULAS and n not in extra]
    if unknown:
        raise ConfigError(f"unknown formula(s) {unknown}; choose from {sorted(set(NAMED_FORMULAS) | extra)}")
    recs = []
    bind = {}
    if cfg.lam is not None:
        bind["λ"] = Fraction(cfg.lam).limit_denominator(10**9)
    bind["ϑ"] = Fraction(cfg.theta).limit_denominator(10**9)
    times = cfg.t_grid or [1.0]
    for name in names:
        if name in ("increment2", "increment4"):
            if cfg.lam is None:
                raise ConfigError(f"{name} needs --lambda")
            f = increment_moment(int(name[-1]), bind["λ"])
            for t in times:
                recs.append({"formula": name, "lambda": cfg.lam, "theta": None, "t": t, "value": float(f.value(Fraction(t).limit_denominator(10**9))), "expression": str(f)})
            continue
        if name == "tavare":
            if cfg.eps is None:
                raise ConfigError("tavare needs --eps")
            iv = tavare_mean_N(cfg.eps, n_lines=cfg.n0)
            recs.append({"formula": name, "eps": cfg.eps, "value": iv.mid, "lower": iv.lower, "upper": iv.upper, "expression": "Σ (2k-1) e^{-k(k-1)ε/2}"})
            continue
        if name == "tn":
            for n in cfg.levels or [5, 20]:
                var = tn_moment(n, "var")
                recs.append({"formula": f"T_{n} mean", "value": float(tn_moment(n)), "expression": str(tn_moment(n))})
                recs.append({"formula": f"T_{n} var", "value": var.mid, "lower": var.lower, "upper": var.upper})
            continue
        f = named_formula(name)
        rec = {"formula": name, "description": NAMED_FORMULAS[name][0], "expression": str(f)}
        free = {SYMBOLS[i] for i in f.variables()} & {"s", "t"}
        if cfg.lam is not None:
            if free:
                for t in times:
                    b = dict(bind, t=Fraction(t).limit_denominator(10**9), s=Fraction(1))
                    v = f.evaluate(b)
                    recs.append(dict(rec, **{"lambda": cfg.lam, "theta": cfg.theta, "t": t, "value": float(v), "exact": str(v)}))
                continue
            v = f.evaluate(bind)
            rec.update({"lambda": cfg.lam, "theta": cfg.theta, "value": float(v) if isinstance(v, Fraction) else str(v), "exact": str(v)})
        recs.append(rec)
    cols = ["formula", "description", "lambda", "theta", "eps", "t", "value", "exact", "lower", "upper", "expression"]
    if cfg.format is None:
        for r in recs:
            parts = [f"{r['formula']}"]
            for k in ("lambda", "theta", "eps", "t"):
                if r.get(k) is not None and k in r:
                    parts.append(f"{k}={r[k]:g}")
            if "value" in r:
                parts.append(f"value={r['value']}")
            if "lower" in r:
                parts.append(f"[{r['lower']!r}, {r['upper']!r}]")
            if "expression" in r and "value" not in r:
                parts.append(r["expression"])
            print("  ".join(parts))
        return 0
    emit(cfg, recs, cols)
    return 0


# ---------------------------------------------------------------------------
# simulators


def cmd_sim_coalescent(cfg: RunConfig) -> int:
    from . import coalescent as co

    what = cfg.functional[0] if cfg.functional else "slices"
    recs = []
    if what == "slices":
        eps = cfg.eps or 1e-2
        for r, s in co.run_slices(eps, cfg.reps, cfg.seed, n0=cfg.n0):
            st = co.slice_statistics(s)
            recs.append({"replicate": r, "time": eps, "functional": "eps_N", "value": st.eps_n})
            for k, v in sorted(st.kth_moment_sums.items()):
                recs.append({"replicate": r, "time": eps, "functional": f"sum_F{k}_over_eps{k - 1}", "value": v})
    elif what == "z_profile":
        grid = cfg.t_grid or [0.5, 1.0, 2.0]
        Z = co.run_z_profiles(cfg.lam, grid, cfg.reps, cfg.seed, n0=cfg.n0 or 2000)
        for r in range(cfg.reps):
            for t, z in zip(grid, Z[r]):
                recs.append({"replicate": r, "time": t, "functional": "Z", "value": float(z)})
    else:
        levels = cfg.levels or [5, 20]
        T = co.run_level_times(levels, cfg.reps, cfg.seed, n0=cfg.n0 or 1000)
        for r in range(cfg.reps):
            for n, t in zip(levels, T[r]):
                recs.append({"replicate": r, "time": float(t), "functional": f"T_{n}", "value": float(t)})
    emit(cfg, recs, ["replicate", "time", "functional", "value"])
    return 0


def cmd_sim_moran(cfg: RunConfig) -> int:
    from . import moran as mo

    funcs = cfg.functional or ["psi12"]
    grid = cfg.t_grid or [1.0]
    lam = cfg.lam if cfg.lam is not None else 0.0
    eps = cfg.eps or 0.02
    mcfg = mo.MoranConfig(theta=cfg.theta, alpha=cfg.alpha)
    centering = mo.tavare_mean_N_value(eps, n_lines=cfg.N) if "B" in funcs else None
    recs = []
    for r in range(cfg.reps):
        rng = replicate_rng(cfg.seed, r, 10)
        st = mo.init(cfg.N, "stationary", rng, mcfg)
        if cfg.alpha > 0:
            st.advance(mo.BURN_IN, rng)
        st.reset_integrals(lam=lam, eps=eps)
        t0 = st.clock
        for t in grid:
            st.advance(t0 + t - st.clock, rng)
            D = st.distance_matrix() if {"mark_ratio", "psihat12"} & set(funcs) else None
            for f in funcs:
                if f == "mark_ratio":
                    try:
                        v = st.laplace_mark_ratio(lam, D) if cfg.lam else st.mark_ratio(eps, D)
                    except mo.MarkRatioUndefined:
                        v = float("nan")
                elif f == "psi12":
                    v = st.psi12(lam)
                elif f == "psihat12":
                    v = st.psihat12(lam, dist=D)
                elif f == "n_eps":
                    v = st.n_eps(eps)
                elif f == "W":
                    v = lam * ((lam + 1) * st.pair_sum_integral() / (cfg.N * (cfg.N - 1)) - t)
                else:
                    v = math.sqrt(1.5) * (st.ball_count_integral() - centering * t)
                recs.append({"replicate": r, "time": t, "functional": f, "value": float(v)})
    emit(cfg, recs, ["replicate", "time", "functional", "value"])
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig) -> int:
    from .acceptance import run_suite

    results = run_suite(cfg.suite, cfg.seed, progress=lambda line: print(line, file=sys.stderr, flush=True))
    checks = []
    for k, res, secs in results:
        for r in res:
            d = r.to_dict()
            d["criterion"] = k
            d["seconds"] = round(secs, 3)
            checks.append(d)
    ok = all(c["passed"] for c in checks)
    report = {"manifest": manifest(cfg), "suite": cfg.suite, "passed": ok, "checks": checks}
    text = json.dumps(report, indent=2, ensure_ascii=False, default=_jsonable)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else 1


COMMANDS = {
    "gen-table": cmd_gen_table,
    "moments": cmd_moments,
    "sim-coalescent": cmd_sim_coalescent,
    "sim-moran": cmd_sim_moran,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--eps", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--theta", type=float, default=0.0)
    common.add_argument("--alpha", type=float, default=0.0)
    common.add_argument("--N", dest="N", type=int, default=500)
    common.add_argument("--n0", type=int)
    common.add_argument("--reps", type=int, default=1)
    common.add_argument("--t-grid", dest="t_grid", type=parse_grid, default=[], help="comma list or start:stop:count")
    common.add_argument("--out")
    common.add_argument("--format", choices=FORMATS)
    p = argparse.ArgumentParser(prog="fvtree", description="Exact moments and simulations of tree-valued resampling dynamics.")
    p.add_argument("--version", action="version", version=f"fvtree {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("gen-table", parents=[common], help="derived generator table next to the printed one")
    m = sub.add_parser("moments", parents=[common], help="exact equilibrium and increment moments")
    m.add_argument("--formula", action="append", default=[])
    m.add_argument("--levels", type=lambda s: [int(x) for x in s.split(",")], default=[])
    c = sub.add_parser("sim-coalescent", parents=[common], help="Kingman coalescent samples")
    c.add_argument("--functional", action="append", default=[], choices=COALESCENT_FUNCTIONALS)
    c.add_argument("--levels", type=lambda s: [int(x) for x in s.split(",")], default=[])
    s = sub.add_parser("sim-moran", parents=[common], help="Moran model paths and snapshots")
    s.add_argument("--functional", action="append", default=[], choices=MORAN_FUNCTIONALS)
    v = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    v.add_argument("suite", nargs="?", default="all", choices=("symbolic", "coalescent", "moran", "all"))
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = {f for f in RunConfig.__dataclass_fields__}
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in keys}).validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
