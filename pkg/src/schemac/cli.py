"""Command-line entry point.

Exit codes: 0 success, 1 verification found missing atoms, 2 input error
(schema, grammar, transcript, missing file), 3 bound check failed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from itertools import combinations
from pathlib import Path

from . import metrics
from .equivalence import verify_superset
from .errors import CompilerError, MetricsError
from .operators import SadBudget
from .pipeline import PROFILES, PipelineConfig, bound_config, check_bound, compile
from .schema import parse_catalog
from .tokenizer import resolve_tokenizer

EXIT_OK, EXIT_MISSING, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3
CONFIG_ENV = "SCHEMAC_CONFIG"

DEFAULTS = {
    "dialect": None,
    "profile": "balanced",
    "tokenizer": "gpt2",
    "model_family": None,
    "sad_budget": None,
    "ccp_k": 3,
    "alpha": 0.5,
    "constraint": None,
}


class InputError(Exception):
    pass


def load_config(path=None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path}: expected a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise InputError(f"config {path}: unknown keys {sorted(unknown)}")
    return data


def settings(args) -> dict:
    """flag > config file > default"""
    cfg = load_config(getattr(args, "config", None))
    out = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        out[key] = val if val is not None else cfg.get(key, default)
    return out


def sidecar_dialect(path: Path) -> str | None:
    side = path.with_suffix(".dialect")
    if side.is_file():
        return side.read_text(encoding="utf-8").strip()
    return None


def read_catalog(path: str, dialect: str | None):
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    dialect = dialect or sidecar_dialect(p) or "openai-fc"
    return parse_catalog(raw, dialect)


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def build_config(s: dict) -> PipelineConfig:
    kw = dict(profile=s["profile"], fragility_alpha=float(s["alpha"]), ccp_k=int(s["ccp_k"]),
              model_family=s["model_family"])
    if s["sad_budget"] is not None:
        kw["sad_budget"] = SadBudget(int(s["sad_budget"]))
    return PipelineConfig(**kw)


def cmd_compile(args) -> int:
    s = settings(args)
    cat = read_catalog(args.input, s["dialect"])
    cfg = build_config(s)
    tok = resolve_tokenizer(s["tokenizer"])
    text, report = compile(cat, cfg, tok, s["constraint"])
    if args.out:
        _write(args.out, text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if args.report:
        _write(args.report, report.to_json() + "\n")
    print(f"{args.input}: {report.tokens_before} -> {report.tokens_after} tokens "
          f"({report.savings:.1%} saved), ops {','.join(report.ops_applied) or '-'}", file=sys.stderr)
    if args.check_bound:
        _, breport = compile(cat, bound_config(cfg, len(cat.tools)), tok, s["constraint"])
        ok = check_bound(breport)
        print(f"bound: savings {breport.savings:.4f} vs rhs {breport.bound_rhs:.4f} -> "
              f"{'ok' if ok else 'FAILED'}", file=sys.stderr)
        if not ok:
            return EXIT_BOUND
    return EXIT_OK


def cmd_verify(args) -> int:
    s = settings(args)
    cat = read_catalog(args.input, s["dialect"])
    try:
        compiled = Path(args.compiled).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{args.compiled}: {exc.strerror or exc}") from exc
    verdict = verify_superset(cat, compiled)
    for a in verdict.missing:
        print("\t".join((a.kind, a.tool, a.param, a.value)).rstrip())
    if args.words:
        for a in verdict.missing_words:
            print(f"# word {a.tool} {a.value}", file=sys.stderr)
    return EXIT_OK if verdict.ok else EXIT_MISSING


def _canon(cond: str) -> str:
    return "".join(c for c in cond.lower() if c.isalnum())


def cmd_score(args) -> int:
    t = metrics.load_transcript(Path(args.input))
    if not t.records:
        raise metrics.EmptyTranscript(f"{args.input}: no records")
    conds = t.conditions()
    scores = {}
    print("condition\tn\tTSA\tPF1\toverall\tTSA 95% CI")
    for c in conds:
        recs = t.for_condition(c)
        tsa, pf1, ov = metrics.score_records(recs, macro=args.macro)
        lo, hi = metrics.bootstrap_ci([float(metrics.tool_correct(r)) for r in recs],
                                      resamples=args.resamples, seed=args.seed)
        scores[c] = ov
        print(f"{c}\t{len(recs)}\t{tsa * 100:.1f}\t{pf1 * 100:.1f}\t{ov * 100:.1f}\t[{lo * 100:.1f}, {hi * 100:.1f}]")

    pairs = list(combinations(conds, 2))
    if pairs:
        print("\nA\tB\tARR(A/B)\tpairs\tb\tc\tMcNemar p\tHolm p\tsignificant")
        rows = []
        for a, b in pairs:
            n, bb, cc = metrics.paired_outcomes(t, a, b)
            ratio = metrics.arr(scores[a], scores[b]) if scores[b] > 0 else float("nan")
            rows.append((a, b, ratio, n, bb, cc, metrics.mcnemar(bb, cc)))
        holm = metrics.holm_bonferroni([r[-1] for r in rows], alpha=args.alpha)
        for row, (adj, sig) in zip(rows, holm):
            a, b, ratio, n, bb, cc, p = row
            print(f"{a}\t{b}\t{ratio:.2f}\t{n}\t{bb}\t{cc}\t{p:.4f}\t{adj:.4f}\t{'yes' if sig else 'no'}")

    by = {_canon(c): c for c in conds}
    if {"naturalfc", "naturaltext"} <= set(by) and len(conds) == 3:
        comp = next(c for c in conds if _canon(c) not in ("naturalfc", "naturaltext"))
        fmt, cmp_ = metrics.decompose(round(scores[by["naturalfc"]] * 100, 1),
                                      round(scores[by["naturaltext"]] * 100, 1),
                                      round(scores[comp] * 100, 1))
        print(f"\nformat effect {fmt:+.1f} pp, compression effect ({comp}) {cmp_:+.1f} pp")
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.test == "mcnemar":
        print(f"{metrics.mcnemar(args.b, args.c):.6g}")
    elif args.test == "holm":
        for p, (adj, sig) in zip(args.p, metrics.holm_bonferroni(args.p, args.alpha)):
            print(f"{p:g}\t{adj:.6g}\t{'yes' if sig else 'no'}")
    elif args.test == "uplift":
        print(f"{metrics.sdm_attention_uplift(args.n, args.k):.6g}")
    elif args.test == "bootstrap":
        lo, hi = metrics.bootstrap_ci(args.samples, args.resamples, args.seed)
        print(f"{lo:.6g}\t{hi:.6g}")
    return EXIT_OK


def _add_catalog_flags(p, with_pipeline=True):
    p.add_argument("--in", dest="input", required=True, help="tool catalog JSON")
    p.add_argument("--dialect", choices=["openai-fc", "anthropic", "anthropic-tool-use", "mcp"],
                   help="input dialect (default: sidecar .dialect file, else openai-fc)")
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    if not with_pipeline:
        return
    p.add_argument("--profile", choices=PROFILES)
    p.add_argument("--tokenizer", help='"gpt2" (default), "heuristic", or a merges.txt path with vocab.json beside it')
    p.add_argument("--model-family", dest="model_family", help="target model family, e.g. claude, gpt")
    p.add_argument("--sad-budget", dest="sad_budget", type=int, help="anchor duplication budget in tokens")
    p.add_argument("--ccp-k", dest="ccp_k", type=int, help="entries in the closing recap")
    p.add_argument("--alpha", type=float, help="fragility weight in [0, 1]")
    p.add_argument("--constraint", help='output constraint, e.g. "json"')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schemac", description="Compile JSON tool catalogs to compact text.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a catalog")
    _add_catalog_flags(p)
    p.add_argument("--out", help="write compiled text here instead of stdout")
    p.add_argument("--report", help="write the compression report JSON here")
    p.add_argument("--check-bound", dest="check_bound", action="store_true",
                   help="also check the compression bound (exit 3 on failure)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check a compiled file preserves the catalog")
    _add_catalog_flags(p, with_pipeline=False)
    p.add_argument("--compiled", required=True, help="compiled text file")
    p.add_argument("--words", action="store_true", help="also list missing description words on stderr")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("score", help="score a JSONL transcript")
    p.add_argument("--in", dest="input", required=True, help="transcript (.jsonl)")
    p.add_argument("--macro", action="store_true", help="average per-record PF1 instead of pooling")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--alpha", type=float, default=0.05, help="family-wise error rate")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", help="standalone statistics helpers")
    tests = p.add_subparsers(dest="test", required=True)
    q = tests.add_parser("mcnemar")
    q.add_argument("b", type=int)
    q.add_argument("c", type=int)
    q = tests.add_parser("holm")
    q.add_argument("p", type=float, nargs="+")
    q.add_argument("--alpha", type=float, default=0.05)
    q = tests.add_parser("uplift")
    q.add_argument("n", type=int)
    q.add_argument("k", type=int)
    q = tests.add_parser("bootstrap")
    q.add_argument("samples", type=float, nargs="+")
    q.add_argument("--resamples", type=int, default=1000)
    q.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CompilerError, MetricsError, ValueError, OSError) as exc:
        where = getattr(args, "input", None)
        print(f"error: {where + ': ' if where and where not in str(exc) else ''}{exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
