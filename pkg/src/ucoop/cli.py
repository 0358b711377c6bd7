"""Command line interface.

Reads a JSON game document (file argument or stdin), writes a JSON result to
stdout and a short summary to stderr. Exit codes: 0 success, 1 input error,
2 negative verdict, 3 unbalanced feasible family.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import core, essential, kohlberg, lexcenter
from .assignment import max_weight_matching, verify_essential_structure
from .documents import (DocumentError, dump, load_document, parse_utility, render_coalition,
                        render_coalitions, render_point, render_rows, render_value, render_weights)
from .game import as_payoff, coalition_key, incidence_rank, to_fraction
from .utility import UtilityError, identity

OK, INPUT_ERROR, NEGATIVE, UNBALANCED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _point(text: str, n: int):
    try:
        parts = [p.strip() for p in text.split(",")]
        return as_payoff([to_fraction(p) for p in parts], n)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad --point: {exc}") from None


def _utility(doc, args):
    if args.utility is not None:
        text = args.utility
        spec = json.loads(text) if text.lstrip().startswith("{") else text
        return parse_utility(spec, doc.game.names, doc.by_name, doc.game)
    return doc.utility if doc.utility is not None else identity()


def _tolerances(args) -> dict:
    if args.tolerance is None:
        return {}
    if not args.tolerance > 0:
        raise InputError("--tolerance must be positive")
    return {"tol_bis": args.tolerance, "tol_fix": 10 * args.tolerance}


def cmd_core(doc, fam, args):
    game = doc.game
    status = core.core_emptiness(game, fam)
    out = {"verdict": status.verdict.value, "nonempty": status.core_nonempty}
    if status.lp_optimum is not None:
        out["lp_optimum"] = render_value(status.lp_optimum)
    if status.witness is not None:
        out["witness"] = render_point(status.witness)
    if status.dual_weights is not None:
        out["dual_weights"] = render_weights(game, status.dual_weights)
    code = OK if status.core_nonempty else NEGATIVE
    summary = f"u-core {'nonempty' if status.core_nonempty else 'empty'}"
    if args.point is not None:
        x = _point(args.point, game.n)
        member = core.core_membership(game, fam, x)
        out["point"] = render_point(x)
        out["member"] = member
        code = OK if member else NEGATIVE
        summary += f"; point is {'in' if member else 'not in'} the u-core"
    return out, code, summary


def cmd_balanced(doc, fam, args):
    game = doc.game
    verdict = core.u_balanced(game, fam)
    out = {"balanced": verdict.balanced}
    if verdict.value is not None:
        out["weighted_value"] = render_value(verdict.value)
        out["grand_value"] = render_value(game.value(game.grand))
    if verdict.weights is not None:
        out["weights"] = render_weights(game, verdict.weights)
    return out, OK if verdict.balanced else NEGATIVE, f"u-balanced: {verdict.balanced}"


def _result_doc(game, result, with_trace):
    out = {
        "representative": render_point(result.representative),
        "singleton": result.is_singleton,
        "solution": render_rows(game, result.solution_description),
        "approximate": result.approximate,
        "levels": [render_value(t) for t in result.levels],
    }
    if with_trace:
        out["trace"] = lexcenter.serialize_trace(game, result)
    return out


def _kohlberg_doc(game, report):
    return {
        "verdict": report.verdict,
        "approximate": report.approximate,
        "levels": [{
            "alpha": render_value(lvl.alpha),
            "coalitions": render_coalitions(game, lvl.coalitions),
            "balanced": lvl.balanced,
            **({"weights": render_weights(game, lvl.certificate.weights)} if lvl.certificate else {}),
        } for lvl in report.levels],
        "first_failure": None if report.first_failure is None else render_value(report.first_failure.alpha),
    }


def _imbalance_doc(game, imbalance):
    if imbalance is None:
        return {}
    return {"uncovered": [game.names[i] for i in imbalance.uncovered],
            "direction": render_point(imbalance.direction)}


def cmd_prenucleolus(doc, fam, args):
    game = doc.game
    try:
        result = lexcenter.solve_prenucleolus(game, fam, **_tolerances(args))
    except lexcenter.NotBalanced as exc:
        return {"error": "not-balanced", "message": str(exc), **_imbalance_doc(game, exc.imbalance)}, \
            UNBALANCED, "feasible coalitions are not balanced"
    out = _result_doc(game, result, args.trace)
    code = OK
    summary = "u-prenucleolus representative (" + ", ".join(out["representative"]) + ")"
    if args.restrict_to_essential:
        if not fam.exact:
            raise InputError("--restrict-to-essential needs an affine utility")
        report = essential.u_essential(game, fam)
        try:
            restricted = essential.restrict_and_solve(game, fam, report.u_essential)
        except essential.NotUBalanced:
            out["restricted"] = {"error": "not-u-balanced"}
            code = NEGATIVE
        else:
            match = lexcenter.same_affine_set(result, restricted)
            out["restricted"] = {
                "coalitions": render_coalitions(game, report.u_essential),
                "count": len(report.u_essential),
                "match": match,
                **_result_doc(game, restricted, args.trace),
            }
            if not match:
                code = NEGATIVE
            summary += f"; restricted to {len(report.u_essential)} u-essential coalitions, match={match}"
    if args.verify_kohlberg:
        rep = kohlberg.kohlberg_check(game, fam, result.representative, exhaustive=True)
        out["kohlberg"] = _kohlberg_doc(game, rep)
        if not rep.verdict:
            code = NEGATIVE
    return out, code, summary


def cmd_essential(doc, fam, args):
    game = doc.game
    out = {}
    parts = []
    want_classical = args.classical or not args.u
    want_u = args.u or not args.classical
    if want_classical:
        if game.restricted and args.classical:
            raise InputError("classical essential coalitions need full cooperation")
        if not game.restricted:
            ess = essential.classical_essential(game)
            out["classical"] = {"coalitions": render_coalitions(game, ess), "count": len(ess)}
            parts.append(f"{len(ess)} essential")
    if want_u:
        if not fam.exact:
            raise InputError("u-essential coalitions need an affine utility")
        report = essential.u_essential(game, fam)
        evidence = []
        for s in sorted(report.evidence, key=coalition_key):
            ev = report.evidence[s]
            item = {"members": render_coalition(game, s), "essential": s in report.u_essential}
            if isinstance(ev, essential.NoPartition):
                item["reason"] = "no-feasible-partition"
            elif isinstance(ev, essential.Witness):
                item.update(reason="witness", point=render_point(ev.point), slack=render_value(ev.slack))
            elif isinstance(ev, essential.Dominated):
                item.update(reason="dominated", point=render_point(ev.point),
                            partition=render_coalitions(game, ev.partition), margin=render_value(ev.slack))
            else:
                item["reason"] = "empty-u-core"
            evidence.append(item)
        out["u"] = {"coalitions": render_coalitions(game, report.u_essential), "count": len(report.u_essential),
                    "core_empty": report.core_empty, "evidence": evidence}
        parts.append(f"{len(report.u_essential)} u-essential")
    return out, OK, ", ".join(parts) + " coalitions"


def cmd_kohlberg(doc, fam, args):
    game = doc.game
    if args.point is None:
        raise InputError("kohlberg needs --point")
    x = _point(args.point, game.n)
    if not game.is_preimputation(x):
        raise InputError("--point is not a preimputation")
    rep = kohlberg.kohlberg_check(game, fam, x, exhaustive=True)
    out = {"point": render_point(x), **_kohlberg_doc(game, rep)}
    return out, OK if rep.verdict else NEGATIVE, f"Kohlberg criterion {'holds' if rep.verdict else 'fails'}"


def cmd_assignment(doc, fam, args):
    spec = doc.assignment
    if spec is None:
        raise InputError("document has no 'assignment' section")
    game = doc.game
    matching, value = max_weight_matching(spec)
    out = {
        "buyers": spec.buyers,
        "sellers": spec.sellers,
        "grand_value": render_value(game.value(game.grand)),
        "matching": [[f"b{b + 1}", f"s{s + 1}"] for b, s in matching.pairs],
        "matching_value": render_value(value),
    }
    code = OK
    summary = f"v(N) = {render_value(value)}"
    if args.verify_structure:
        rep = verify_essential_structure(spec, game)
        out["structure"] = {
            "inclusion_holds": rep.inclusion_holds,
            "u_essential": render_coalitions(game, rep.essential),
            "count": rep.count,
            "bound": rep.bound,
            "essential_mixed_pairs": render_coalitions(game, rep.essential_mixed_pairs),
            "violations": render_coalitions(game, rep.violations),
        }
        if not rep.inclusion_holds:
            code = NEGATIVE
        summary += f"; structure inclusion {'holds' if rep.inclusion_holds else 'fails'}"
    return out, code, summary


def cmd_rank(doc, fam, args):
    game = doc.game
    r = incidence_rank(game.n, game.family)
    check = lexcenter.check_nonempty(game)
    out = {"rank": r, "players": game.n, "balanced_family": check.nonempty, "singleton": r == game.n}
    if check.certificate is not None:
        out["weights"] = render_weights(game, check.certificate.weights)
    out.update(_imbalance_doc(game, check.imbalance))
    return out, OK, f"rank {r} of {game.n}"


COMMANDS = {
    "core": cmd_core,
    "balanced": cmd_balanced,
    "prenucleolus": cmd_prenucleolus,
    "essential": cmd_essential,
    "kohlberg": cmd_kohlberg,
    "assignment": cmd_assignment,
    "rank": cmd_rank,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucoop", description="Exact u-core, u-prenucleolus and essential coalitions.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("document", nargs="?", help="game document (JSON); stdin when omitted or '-'")
    p.add_argument("--point", help="comma separated payoff, e.g. 3,3,3,3 or 13/3,5/3,3,3")
    p.add_argument("--trace", action="store_true", help="include the per-stage trace")
    p.add_argument("--restrict-to-essential", action="store_true",
                   help="also solve over the u-essential coalitions and compare")
    p.add_argument("--verify-kohlberg", action="store_true", help="check the result by the level-set criterion")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--classical", action="store_true", help="classical essential coalitions only")
    group.add_argument("--u", action="store_true", help="u-essential coalitions only")
    p.add_argument("--verify-structure", action="store_true",
                   help="check that only singletons and buyer-seller pairs are u-essential")
    p.add_argument("--utility", help="utility override: a kind name or a JSON object")
    p.add_argument("--tolerance", type=float, help="bisection tolerance for general utilities")
    return p


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        if args.document in (None, "-"):
            text = stdin.read()
        else:
            with open(args.document, encoding="utf-8") as fh:
                text = fh.read()
        doc = load_document(text)
        fam = _utility(doc, args)
        out, code, summary = COMMANDS[args.command](doc, fam, args)
    except (OSError, DocumentError, InputError, UtilityError, json.JSONDecodeError) as exc:
        stdout.write(dump({"command": args.command, "error": "input", "message": str(exc)}))
        print(f"error: {exc}", file=stderr)
        return INPUT_ERROR
    out = {"command": args.command, "utility": fam.describe(), **out}
    stdout.write(dump(out))
    print(summary, file=stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
