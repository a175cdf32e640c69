"""Command-line front end: ``nlbench <subcommand> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 domain error (degenerate lattice, point outside the upper half space, ...).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import acceptance, isogeny, lattice, siegel, star, theta
from .padic import local

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance_abs: float = siegel.ABS_TOL
    tolerance_rel: float = siegel.REL_TOL
    rng_seed: int = 0
    worker_count: int = 1
    output_format: str = "text"

    def __post_init__(self):
        if self.tolerance_abs <= 0 or self.tolerance_rel <= 0:
            raise UsageError("tolerances must be positive")
        if self.worker_count < 1:
            raise UsageError("--workers must be at least 1")
        if self.output_format not in ("json", "csv", "text"):
            raise UsageError(f"unknown format {self.output_format}")

    def header(self, command: str) -> Dict[str, Any]:
        return {"command": command, "seed": self.rng_seed, "workers": self.worker_count,
                "tol_abs": self.tolerance_abs, "tol_rel": self.tolerance_rel}


@dataclass
class Report:
    header: Dict[str, Any]
    fields: Dict[str, Any] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    lines: List[str] = field(default_factory=list)
    ok: bool = True

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"header": self.header, **self.fields, "ok": self.ok}
            if self.rows:
                doc["rows"] = self.rows
            return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            if self.rows:
                keys = list(self.rows[0])
                w.writerow(keys)
                for r in self.rows:
                    w.writerow([_scalar(r[k]) for k in keys])
            else:
                w.writerow(["key", "value"])
                for k, v in self.fields.items():
                    w.writerow([k, _scalar(v)])
            return buf.getvalue()
        head = " ".join(f"{k}={v}" for k, v in self.header.items())
        body = self.lines or [f"{k}: {_scalar(v)}" for k, v in self.fields.items()]
        return "\n".join([f"# {head}", *body]) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _scalar(x) -> str:
    if isinstance(x, (list, tuple, dict)):
        return json.dumps(_jsonable(x), sort_keys=True)
    return str(x)


# ----------------------------------------------------------------------
# input helpers


def _load_lattice_file(name: str) -> lattice.GramLattice:
    path = Path(name)
    if not path.exists():
        bundled = resources.files("nlbench") / "data" / name
        if not bundled.is_file():
            raise UsageError(f"no such lattice file: {name}")
        text = bundled.read_text()
    else:
        text = path.read_text()
    try:
        return lattice.GramLattice.from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {name}: {exc}") from exc
    except lattice.DegenerateLatticeError:
        raise
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed lattice document {name}: {exc}") from exc


def _parse_json_arg(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {what}: {exc}") from exc


def _lattice_from_args(args) -> lattice.GramLattice:
    chosen = [x is not None for x in (args.tensor_g, args.file, args.gram)]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --tensor-g, --file, --gram")
    if args.tensor_g is not None:
        lat = lattice.tensor_symplectic(args.tensor_g)
    elif args.file is not None:
        lat = _load_lattice_file(args.file)
    else:
        gram = _parse_json_arg(args.gram, "--gram")
        try:
            lat = lattice.GramLattice(gram)
        except lattice.DegenerateLatticeError:
            raise
        except (ValueError, TypeError) as exc:
            raise UsageError(f"malformed Gram matrix: {exc}") from exc
    if getattr(args, "rescale", None):
        lat = lattice.rescale(lat, args.rescale)
    return lat


def _coset_from_arg(text: Optional[str]):
    if text is None:
        return None
    raw = _parse_json_arg(text, "--coset")
    try:
        return [Fraction(str(x)) for x in raw]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed coset: {exc}") from exc


# ----------------------------------------------------------------------
# subcommands


def cmd_lattice(args, cfg: RunConfig) -> Report:
    lat = _lattice_from_args(args)
    rep = Report(cfg.header("lattice"))
    rep.fields["rank"] = lat.rank
    rep.fields["signature"] = list(lattice.signature(lat))
    rep.fields["level"] = lattice.lattice_level(lat)
    rep.fields["discriminant_group"] = str(lattice.discriminant_group(lat))
    if args.disc:
        rep.lines.append(rep.fields["discriminant_group"])
    else:
        rep.lines += [f"rank: {lat.rank}", f"signature: {tuple(rep.fields['signature'])}",
                      f"level: {rep.fields['level']}",
                      f"discriminant group: {rep.fields['discriminant_group']}"]
    if args.theta:
        series = theta.theta_coset(lat, None, args.prec)
        rep.fields["theta"] = series.to_dict()
        rep.rows = [{"exponent": str(e), "coefficient": c} for e, c in series.items()]
        rep.lines.append("theta: " + ",".join(str(c) for c in series.leading(args.prec)))
    return rep


def cmd_theta(args, cfg: RunConfig) -> Report:
    lat = _lattice_from_args(args)
    rep = Report(cfg.header("theta"))
    if args.dual:
        series = theta.theta_dual(lat, args.prec)
    else:
        series = theta.theta_coset(lat, _coset_from_arg(args.coset), args.prec)
    rep.fields["series"] = series.to_dict()
    rep.rows = [{"exponent": str(e), "coefficient": c} for e, c in series.items()]
    rep.lines = [f"q^{e}: {c}" for e, c in series.items()]
    if args.poisson:
        worst = max(theta.poisson_check(lat, t) for t in args.poisson)
        rep.fields["poisson_residual"] = worst
        rep.lines.append(f"Poisson residual: {worst:.3e}")
        rep.ok = worst < cfg.tolerance_abs
    return rep


def cmd_isogeny(args, cfg: RunConfig) -> Report:
    if args.action == "census":
        if args.d is None:
            raise UsageError("census needs --d")
        report = isogeny.orbit_census(args.g, args.d, args.N, args.height, args.depth)
        ok = report.verify_merges(isogeny.ActionGraph(args.g, args.N))
        rep = Report(cfg.header("isogeny census"), ok=ok)
        rep.fields.update(report.to_dict())
        rep.fields["members"] = len(report.members)
        rep.rows = [{"rep": c.rep.tolist(), "size": c.size,
                     "congruence_class": [list(r) for r in c.congruence_class.b]}
                    for c in report.classes]
        rep.lines = [f"g={args.g} d={args.d} N={args.N} height<={args.height} depth={args.depth}",
                     f"{len(report.members)} matrices in {len(report.classes)} classes"]
        rep.lines += [f"  size {c.size:>6}  rep {c.rep.tolist()}" for c in report.classes]
        rep.lines.append(f"merge words verified: {'yes' if ok else 'NO'}")
        return rep
    if args.matrix is None:
        raise UsageError("reduce needs --matrix")
    rows = _parse_json_arg(args.matrix, "--matrix")
    try:
        B = isogeny.IsogenyMatrix.from_rows(rows)
    except (ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"malformed matrix: {exc}") from exc
    red = isogeny.symplectic_reduce(B)
    word = isogeny.WordSearch(isogeny.ActionGraph(B.g, 1)).find(B, red.representative)
    rep = Report(cfg.header("isogeny reduce"), ok=word is not None)
    rep.fields.update({"d1": red.d1, "d2": red.d2, "representative": red.representative.tolist(),
                       "gamma": red.gamma, "delta": red.delta,
                       "word": [list(m) for m in word] if word is not None else None})
    rep.lines = [f"divisor pair: ({red.d1}, {red.d2})",
                 f"representative: {red.representative.tolist()}",
                 f"gamma: {red.gamma}", f"delta: {red.delta}",
                 f"word: {' '.join(s + ':' + n for s, n in word) if word is not None else 'not found'}"]
    return rep


def cmd_period(args, cfg: RunConfig) -> Report:
    rep = Report(cfg.header("period"))
    if args.identity_isogeny:
        if args.g != 1:
            raise UsageError("--identity-isogeny needs --g 1")
        tau = complex(0.3, 1.1)
        ident = isogeny.from_homology([[1, 0], [0, 1]])
        res = siegel.orthogonality_identities(ident, siegel.SiegelPair(tau, [[tau]]), cfg.tolerance_abs)
        resid = max(res.abs_residual, float(np.max(np.abs(res.beta))))
        rep.ok = resid < cfg.tolerance_abs and res.period_vanishes and res.orthogonal
        rep.fields.update({"residual": resid, "period_vanishes": res.period_vanishes,
                           "orthogonal": res.orthogonal})
        rep.lines = [f"identity isogeny residual: {resid:.3e}",
                     f"period vanishes: {res.period_vanishes}, orthogonal: {res.orthogonal}"]
        return rep
    rng = np.random.default_rng(cfg.rng_seed)
    mats = acceptance.random_isogeny_matrices(args.g, args.samples, rng, bound=10)
    worst = 0.0
    for i, B in enumerate(mats):
        pair = siegel.random_siegel_pair(args.g, rng)
        r = siegel.orthogonality_identities(B, pair, cfg.tolerance_abs)
        worst = max(worst, r.rel_residual)
        rep.rows.append({"sample": i, "degree": isogeny.degree(B), "rel_residual": r.rel_residual,
                         "consistent": r.consistent})
    rep.ok = worst < cfg.tolerance_rel and all(r["consistent"] for r in rep.rows)
    rep.fields.update({"g": args.g, "samples": args.samples, "worst_rel_residual": worst})
    rep.lines = [f"g={args.g} samples={args.samples}", f"worst relative residual: {worst:.3e}"]
    return rep


def cmd_padic(args, cfg: RunConfig) -> Report:
    p, N = args.prime, args.level
    if N % p:
        raise ValueError(f"{p} does not divide N = {N}")
    v = local.ord_p_int(N, p)
    sw = local.verify_sw_identity(p, N, seed=cfg.rng_seed, n_random=args.probe_depth)
    iv = local.intertwining_value(p, N)
    W = local.WhittakerNewform(p, 1)
    zeta = local.zeta_factor(W, W)
    support = local.support_of_weil_translate(p, N, seed=cfg.rng_seed, n_random=args.probe_depth)
    k1 = local.k1_index(p, v)
    k1_ok = k1 == local.k1_index_bruteforce(p, v) if N <= 50 else True
    rep = Report(cfg.header("padic-verify"))
    rep.ok = sw.passed and iv.agrees and k1_ok and support.verdict in ("K0", "K1")
    rep.fields.update({
        "prime": p, "level": N, "sw_identity": sw.passed, "sw_probes": len(sw.probes),
        "intertwining_value": iv.closed_form, "intertwining_shell_sum": iv.boundary + iv.shell_sum + iv.tail,
        "zeta_factor": str(zeta.expr), "zeta_verdict": zeta.verdict(),
        "k1_index": k1, "support_verdict": support.verdict,
    })
    rep.lines = [f"p={p} N={N}",
                 f"SW identity: {'pass' if sw.passed else 'FAIL'} ({len(sw.probes)} probes)",
                 *("  " + line for line in sw.lines()),
                 f"intertwining value: {iv.closed_form} (shell sum {iv.boundary + iv.shell_sum + iv.tail})",
                 f"zeta factor: {zeta.expr} [{zeta.verdict()}]",
                 f"K1 index: {k1}",
                 f"support of Weil translate: {support.verdict}"]
    return rep


def cmd_star(args, cfg: RunConfig) -> Report:
    if (args.n is None) == (args.range is None):
        raise UsageError("give exactly one of --n, --range")
    if args.n is not None:
        if args.n < 1:
            raise ValueError("N must be positive")
        v = star.satisfies_star(args.n)
        rep = Report(cfg.header("star-check"), ok=star.validate_witness(v) if v.satisfied else True)
        rep.fields.update({"N": v.N, "satisfied": v.satisfied, "witness": v.witness, "rule": v.rule})
        rep.rows = [dict(rep.fields)]
        rep.lines = [v.line()]
        return rep
    if args.range < 1:
        raise ValueError("range must be positive")
    failures = star.verify_theorem_range(args.range, workers=cfg.worker_count)
    rep = Report(cfg.header("star-check"), ok=not failures)
    rep.fields.update({"N_max": args.range, "failures": failures, "negative_set": star.negative_set()})
    rep.rows = [{"N": n} for n in failures]
    rep.lines = [f"{len(failures)} failures up to {args.range}"] + [f"failure N={n}" for n in failures]
    return rep


def cmd_selftest(args, cfg: RunConfig) -> Report:
    results = acceptance.run_all(seed=cfg.rng_seed, workers=cfg.worker_count)
    rep = Report(cfg.header("selftest"), ok=all(r.passed for r in results))
    rep.rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                for r in results]
    rep.fields["criteria"] = rep.rows
    rep.fields["passed"] = sum(r.passed for r in results)
    rep.lines = [r.line() if args.timings else r.line().rsplit(" [", 1)[0] for r in results]
    rep.lines.append(f"{rep.fields['passed']}/{len(results)} criteria passed")
    return rep


# ----------------------------------------------------------------------


def _add_lattice_source(p):
    p.add_argument("--tensor-g", type=int, help="symplectic tensor lattice of genus g")
    p.add_argument("--file", help="lattice JSON document (bundled files are found by name)")
    p.add_argument("--gram", help="Gram matrix as a JSON list of rows")
    p.add_argument("--rescale", type=int, help="multiply the Gram matrix by N")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--tol-abs", type=float, default=siegel.ABS_TOL)
    common.add_argument("--tol-rel", type=float, default=siegel.REL_TOL)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", help="write the report to FILE instead of stdout")

    parser = argparse.ArgumentParser(prog="nlbench",
                                     description="Lattice, isogeny, theta and p-adic verification tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", parents=[common], help="signature, level, discriminant group")
    _add_lattice_source(p)
    p.add_argument("--disc", action="store_true", help="print only the discriminant group")
    p.add_argument("--theta", action="store_true")
    p.add_argument("--prec", type=int, default=3)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("theta", parents=[common], help="theta series of a positive definite lattice")
    _add_lattice_source(p)
    p.add_argument("--coset", help="coset vector in the lattice basis, JSON list")
    p.add_argument("--dual", action="store_true", help="theta series of the dual lattice")
    p.add_argument("--prec", type=int, default=3)
    p.add_argument("--poisson", type=float, nargs="*", help="also check Poisson summation at these t")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("isogeny", parents=[common], help="orbit census or normal form reduction")
    p.add_argument("action", choices=("census", "reduce"))
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--height", type=int, default=3)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--matrix", help="2g x 2 matrix as a JSON list of rows")
    p.set_defaults(func=cmd_isogeny)

    p = sub.add_parser("period", parents=[common], help="period and orthogonality identities")
    p.add_argument("--g", type=int, default=1)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--identity-isogeny", action="store_true")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("padic-verify", parents=[common], help="local computations at p")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--probe-depth", type=int, default=20, help="random probes per check")
    p.set_defaults(func=cmd_padic)

    p = sub.add_parser("star-check", parents=[common], help="condition (*) for a level or a range")
    p.add_argument("--n", type=int)
    p.add_argument("--range", type=int)
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("selftest", parents=[common], help="run every acceptance check")
    p.add_argument("--timings", action="store_true", help="include wall-clock times")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.tol_abs, args.tol_rel, args.seed, args.workers, args.format)
        report = args.func(args, cfg)
    except UsageError as exc:
        print(f"nlbench: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"nlbench: domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = report.render(cfg.output_format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
