"""Command-line interface: generate, scan, rich, decide, search, verify-paper."""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys

from . import __version__
from .eertree import is_rich, stream_richness
from .powers import (PowerKind, ScanReport, find_all_kpowers, is_kpower, relabel,
                     scan_fixed_point)
from .search import SearchSpec, longest_rich_power_free, verify_witness
from .templates import (DecisionConfig, PreconditionError, VERDICT_FREE,
                        VERDICT_POWER_FOUND, decide_additive_power_free)
from .words import (BETA, DELTA, GAMMA, Morphism, NotProlongableError, ParseError,
                    format_word, is_palindrome, matmul2, parse_word)

_KINDS = {k.value: k for k in PowerKind}


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _manifest(subcommand: str, params: dict, started, digests: dict) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": params,
        "started": started.isoformat(),
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "input_digests": digests,
    }


def _emit(report: dict, manifest: dict, args, text_lines):
    if getattr(args, "text", False):
        for line in text_lines:
            print(line)
    else:
        print(json.dumps({**report, "manifest": manifest}, indent=2))


def _parse_mapping(spec_text: str, alphabet):
    try:
        targets = [int(x) for x in spec_text.split(",")]
    except ValueError:
        raise ParseError(f"bad relabel specification {spec_text!r}")
    if len(targets) != len(alphabet):
        raise ParseError(
            f"relabel needs {len(alphabet)} values for alphabet {alphabet}, got {len(targets)}")
    return dict(zip(alphabet, targets))


def cmd_generate(args) -> int:
    f = Morphism.parse(args.morphism)
    word = f.fixed_point(args.seed).prefix(args.length)
    out = format_word(word)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_scan(args) -> int:
    started = datetime.datetime.now(datetime.timezone.utc)
    f = Morphism.parse(args.morphism)
    kind = _KINDS[args.kind]
    if args.relabel:
        mapping = _parse_mapping(args.relabel, f.codomain.letters)
        w = relabel(f.fixed_point(args.seed).prefix(args.length), mapping)
        cap = args.length // args.k if args.max_period is None else min(
            args.max_period, args.length // args.k)
        occurrences = find_all_kpowers(w, args.k, kind, cap)
        report = ScanReport(scanned_length=args.length, max_period=cap, kind=kind,
                            k=args.k, occurrences=occurrences,
                            exhaustive=(args.max_period is None
                                        or args.max_period >= args.length // args.k)
                            and len(occurrences) < 1000)
    else:
        report = scan_fixed_point(f, args.seed, args.k, kind, args.length,
                                  max_period=args.max_period)
    manifest = _manifest("scan", {
        "morphism": args.morphism, "seed": args.seed, "k": args.k,
        "kind": args.kind, "length": args.length, "max_period": args.max_period,
        "relabel": args.relabel,
    }, started, {"morphism": _digest(args.morphism)})
    verdict = "no occurrence" if report.clean else \
        f"{len(report.occurrences)} occurrence(s), first at start " \
        f"{report.occurrences[0].start} period {report.occurrences[0].period}"
    _emit(report.to_json(), manifest, args,
          [f"scanned {report.scanned_length} letters, periods up to {report.max_period}: {verdict}"])
    return 0 if report.clean else 1


def cmd_rich(args) -> int:
    started = datetime.datetime.now(datetime.timezone.utc)
    digests = {}
    if args.word is not None:
        w = parse_word(args.word)
        report = is_rich(w)
        digests["word"] = _digest(args.word)
        params = {"word": args.word}
    else:
        if args.morphism is None:
            raise ParseError("rich needs either a morphism or --word")
        f = Morphism.parse(args.morphism)
        report = stream_richness(f, args.seed, args.length)
        digests["morphism"] = _digest(args.morphism)
        params = {"morphism": args.morphism, "seed": args.seed, "length": args.length}
    manifest = _manifest("rich", params, started, digests)
    line = (f"length {report.length}: rich" if report.rich else
            f"length {report.length}: not rich, first failure at prefix length {report.first_failure}")
    _emit(report.to_json(), manifest, args, [line])
    return 0 if report.rich else 1


def cmd_decide(args) -> int:
    started = datetime.datetime.now(datetime.timezone.utc)
    f = Morphism.parse(args.morphism)
    config = None
    overrides = (args.initial_prefix_length, args.initial_max_period,
                 args.final_prefix_length, args.final_max_instance_length)
    if any(v is not None for v in overrides):
        if not all(v is not None for v in overrides):
            raise ParseError("either give all four bound overrides or none")
        config = DecisionConfig(*overrides, ancestor_cap=args.ancestor_cap)
    cert = decide_additive_power_free(f, args.seed, args.k, config)
    manifest = _manifest("decide", {
        "morphism": args.morphism, "seed": args.seed, "k": args.k,
    }, started, {"morphism": _digest(args.morphism)})
    _emit(cert.to_json(), manifest, args, [
        f"verdict {cert.verdict}: {cert.ancestor_count} ancestor templates, "
        f"bounds {cert.bounds['final_prefix_length']}/{cert.bounds['final_max_instance_length']}"])
    if cert.verdict == VERDICT_FREE:
        return 0
    if cert.verdict == VERDICT_POWER_FOUND:
        return 1
    return 2


def cmd_search(args) -> int:
    started = datetime.datetime.now(datetime.timezone.utc)
    alphabet = tuple(int(x) for x in args.alphabet.split(","))
    spec = SearchSpec(alphabet=alphabet, k=args.k, kind=_KINDS[args.kind],
                      require_rich=args.rich, symmetry_reduction=args.symmetry,
                      depth_cap=args.depth_cap)
    result = longest_rich_power_free(
        spec, node_budget=args.node_budget, checkpoint_path=args.checkpoint,
        checkpoint_interval=args.checkpoint_interval, resume_from=args.resume)
    manifest = _manifest("search", {
        "alphabet": args.alphabet, "k": args.k, "kind": args.kind,
        "rich": args.rich, "symmetry": args.symmetry, "depth_cap": args.depth_cap,
    }, started, {})
    _emit(result.to_json(), manifest, args, [
        f"max length {result.max_length} "
        f"({'exhausted' if result.exhausted else 'not exhausted'}), "
        f"{result.nodes_visited} nodes, witness {format_word(result.witness)}"])
    return 0 if result.exhausted else 1


def _paper_checks(quick: bool):
    """The paper-value reproductions, as (name, callable) pairs."""

    def check_searches_binary():
        spec = SearchSpec((0, 1), 4, PowerKind.ABELIAN)
        res = longest_rich_power_free(spec)
        return res.max_length == 2411 and res.exhausted and verify_witness(spec, res.witness), \
            f"max_length={res.max_length} exhausted={res.exhausted}"

    def check_searches_ternary():
        spec = SearchSpec((0, 1, 2), 3, PowerKind.ABELIAN)
        res = longest_rich_power_free(spec)
        return res.max_length == 180 and res.exhausted and verify_witness(spec, res.witness), \
            f"max_length={res.max_length} exhausted={res.exhausted}"

    def check_decide_beta():
        cert = decide_additive_power_free(BETA, 0, 5)
        return cert.verdict == VERDICT_FREE, f"verdict={cert.verdict} ancestors={cert.ancestor_count}"

    def check_decide_delta():
        cert = decide_additive_power_free(DELTA, 1, 4)
        return cert.verdict == VERDICT_FREE, f"verdict={cert.verdict} ancestors={cert.ancestor_count}"

    def check_scans():
        clean_b = scan_fixed_point(BETA, 0, 5, PowerKind.ADDITIVE, 100_000)
        clean_g = scan_fixed_point(DELTA, 1, 4, PowerKind.ADDITIVE, 100_000)
        dirty_b = scan_fixed_point(BETA, 0, 4, PowerKind.ADDITIVE, 10_000, max_occurrences=1)
        dirty_g = scan_fixed_point(DELTA, 1, 3, PowerKind.ADDITIVE, 10_000, max_occurrences=1)
        ok = (clean_b.clean and clean_b.exhaustive and clean_g.clean and clean_g.exhaustive
              and not dirty_b.clean and not dirty_g.clean)
        for word_src, rep in ((BETA, dirty_b), (DELTA, dirty_g)):
            occ = rep.occurrences[0]
            w = word_src.fixed_point(0 if word_src is BETA else 1).prefix(10_000)
            factor = w[occ.start:occ.start + occ.period * occ.exponent]
            ok = ok and is_kpower(factor, occ.exponent, occ.kind)
        return ok, "B 5-free / Gamma 4-free over 1e5; 4-power in B and cube in Gamma re-validated"

    def check_richness():
        rb = stream_richness(BETA, 0, 1_000_000)
        rg = stream_richness(GAMMA, 1, 1_000_000)
        return (rb.rich and rb.palindrome_count == 1_000_000
                and rg.rich and rg.palindrome_count == 1_000_000), \
            f"B rich={rb.rich}, Gamma rich={rg.rich} (length 1e6)"

    def check_matrices():
        mb = BETA.affine_profile().matrix
        mg = GAMMA.affine_profile().matrix
        md = DELTA.affine_profile().matrix
        inc = GAMMA.incidence_matrix()
        det_minus_i = (
            (inc[0][0] - 1) * ((inc[1][1] - 1) * (inc[2][2] - 1) - inc[1][2] * inc[2][1])
            - inc[0][1] * (inc[1][0] * (inc[2][2] - 1) - inc[1][2] * inc[2][0])
            + inc[0][2] * (inc[1][0] * inc[2][1] - (inc[1][1] - 1) * inc[2][0]))
        ok = (mb == ((5, 0), (1, 2)) and md == ((5, 2), (2, 4))
              and matmul2(mg, mg) == md and det_minus_i == 0)
        return ok, f"M profiles ok={ok}"

    def check_palindrome_preservation():
        import itertools, random
        rng = random.Random(402)
        for n in range(0, 9):
            for half in itertools.product((0, 1, 2), repeat=(n + 1) // 2):
                pal = half + tuple(reversed(half[:n // 2]))
                if not is_palindrome(GAMMA.apply(pal)):
                    return False, f"failed on {pal}"
        for _ in range(1000):
            n = rng.randrange(9, 60)
            half = tuple(rng.randrange(3) for _ in range((n + 1) // 2))
            pal = half + tuple(reversed(half[:n // 2]))
            if not is_palindrome(GAMMA.apply(pal)):
                return False, f"failed on {pal}"
        return True, "all palindromes map to palindromes under gamma"

    def check_gamma_factors():
        w = GAMMA.fixed_point(1).prefix(100_000)
        pairs = set(zip(w, w[1:]))
        ok = (0, 2) not in pairs and (2, 0) not in pairs
        for i in range(len(w) - 2):
            if w[i] == 0 and w[i + 1] == 1 and w[i + 2] not in (1, 2):
                ok = False
        for i in range(1, len(w) - 1):
            if w[i] == 1 and w[i + 1] == 1 and w[i - 1] != 0:
                ok = False
        ok = ok and is_rich(w[:14]).rich and set(w[:4]) == {0, 1, 2}
        return ok, "factor facts of Gamma hold over 1e5 prefix"

    checks = [
        ("extremal-binary-2411", check_searches_binary, quick),
        ("extremal-ternary-180", check_searches_ternary, False),
        ("decide-B-additive-5-free", check_decide_beta, False),
        ("decide-Gamma-additive-4-free", check_decide_delta, False),
        ("scan-consistency", check_scans, False),
        ("richness-streams-1e6", check_richness, False),
        ("algebraic-identities", check_matrices, False),
        ("palindrome-preservation", check_palindrome_preservation, False),
        ("Gamma-factor-facts", check_gamma_factors, False),
    ]
    return checks


def cmd_verify_paper(args) -> int:
    failures = []
    for name, check, skip in _paper_checks(args.quick):
        if skip:
            print(f"SKIP {name}")
            continue
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"error: {exc}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures.append(name)
    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
        return 1
    print("all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="richavoid",
        description="Verification toolkit for additive/abelian power avoidance and rich words")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--text", action="store_true", help="human-readable output instead of JSON")

    p = sub.add_parser("generate", help="emit a prefix of a morphic fixed point")
    p.add_argument("morphism", help="rules like '0->00001 1->01101'")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--output", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("scan", help="scan a fixed-point prefix for k-powers")
    add_common(p)
    p.add_argument("morphism")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=sorted(_KINDS), default="additive")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--max-period", type=int, default=None)
    p.add_argument("--relabel", help="comma-separated images of the alphabet letters, in order")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("rich", help="richness of a word or fixed-point prefix")
    add_common(p)
    p.add_argument("morphism", nargs="?")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--word", help="check a literal word instead of a fixed point")
    p.set_defaults(func=cmd_rich)

    p = sub.add_parser("decide", help="decide additive k-power-freeness of a fixed point")
    add_common(p)
    p.add_argument("morphism")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--initial-prefix-length", type=int)
    p.add_argument("--initial-max-period", type=int)
    p.add_argument("--final-prefix-length", type=int)
    p.add_argument("--final-max-instance-length", type=int)
    p.add_argument("--ancestor-cap", type=int, default=200_000)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("search", help="longest rich power-free word by backtracking")
    add_common(p)
    p.add_argument("--alphabet", required=True, help="comma-separated letters, e.g. 0,1")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=sorted(_KINDS), default="abelian")
    p.add_argument("--rich", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--symmetry", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--depth-cap", type=int)
    p.add_argument("--node-budget", type=int)
    p.add_argument("--checkpoint", help="checkpoint file to write")
    p.add_argument("--checkpoint-interval", type=float, help="seconds between checkpoints")
    p.add_argument("--resume", help="checkpoint file to resume from")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify-paper", help="one-shot reproduction of the reported results")
    p.add_argument("--quick", action="store_true", help="skip the long binary search")
    p.set_defaults(func=cmd_verify_paper)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, PreconditionError, NotProlongableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
