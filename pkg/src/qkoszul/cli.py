"""Command-line driver: ``qkoszul <command> <input> [options]``.

Inputs are JSON files, or the names of bundled data sets (``filiform5``,
``filiform5-twist``, ``scaled5``, ...).  Exit status: 0 success, 1 a check
reported false, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .series import SeriesMatrix, SeriesScalar, parse_rational

SCHEMA = 1


def data_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    bundled = resources.files("qkoszul") / "data" / f"{stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no such input: {name}")


def load_json(name: str):
    with open(data_path(name)) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_presentation_data(name: str) -> dict:
    """A presentation file, or any report that carries one under "presentation"."""
    data = load_json(name)
    if isinstance(data, dict) and "generators" not in data and isinstance(data.get("presentation"), dict):
        data = data["presentation"]
    return data


def _poly_table(brackets, names) -> dict:
    return {f"[{names[i]},{names[j]}]": g.format(names) for (i, j), g in sorted(brackets.items())}


# commands -----------------------------------------------------------------


def cmd_confluence(args):
    from .ncpoly import Presentation, confluence_check
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc)
    r = confluence_check(p, args.degree or 3)
    rep = {"command": "confluence", "presentation": p.name, "clean": r["clean"], "checked": r["checked"],
           "discrepancies": [str(d) for d in r["discrepancies"]]}
    return rep, r["clean"]


def cmd_koszul(args):
    from .koszul import complex_check, deform_koszul
    from .ncpoly import Presentation
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc)
    c = deform_koszul(p)
    chk = complex_check(c)
    rep = {"command": "koszul", "check": chk, "complex": c.to_json()}
    return rep, chk["clean"]


def cmd_theta(args):
    from .ext import theta_character
    from .ncpoly import Presentation
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc)
    th = theta_character(p, args.witness_degree)
    rep = {"command": "theta", "presentation": p.name, **th.to_json(p.names),
           "theta_display": {p.names[i]: str(s) for i, s in sorted(th.theta.items())},
           "is_character": th.is_character(p)}
    return rep, rep["is_character"]


def _fpres(args):
    from .hopf import FPresentation
    return FPresentation.from_json(load_presentation_data(args.input), trunc=args.trunc)


def cmd_vee(args):
    from .hopf import vee_presentation
    v = vee_presentation(_fpres(args))
    return {"command": "vee", "presentation": v.to_json()}, True


def cmd_link(args):
    from .ext import theta_link_check
    r = theta_link_check(_fpres(args), args.witness_degree)
    rep = {"command": "link", "ok": r["ok"], "alpha_in_I": r["alpha_in_I"], "rows": r["rows"]}
    return rep, r["ok"]


def cmd_twist_dual(args):
    from .hopf import (DualPairing, TwistData, dual_coproduct, twist_dual_presentation)
    from .ncpoly import Presentation
    data = load_json(args.input)
    D = args.degree or 6
    base_trunc = args.trunc if args.trunc is not None else int(data["base"].get("trunc_order", 6))
    # one extra order so that the vee presentation keeps the requested truncation
    t = TwistData.from_json(data, trunc=base_trunc + 1)
    pair = DualPairing(t, D + 2)
    f, v = twist_dual_presentation(t, D, pair)
    xi = [f"xi{i + 1}" for i in range(t.n)]
    rep = {"command": "twist-dual", "degree_cap": D,
           "dual_commutators": _poly_table(f.brackets, xi),
           "presentation": v.to_json()}
    ok = True
    if not args.no_coproducts:
        rep["dual_coproducts"] = {xi[i]: dual_coproduct(i, t, D, pairing=pair).format(xi) for i in range(t.n)}
    if args.compare:
        ref = Presentation.from_json(load_presentation_data(args.compare), trunc=v.trunc)
        same = ref.brackets == v.brackets
        rep["matches_reference"] = same
        ok = same
    return rep, ok


def cmd_hochschild(args):
    from .hochschild import (antisymmetrize, ce_differential, gauge_transform, mu_series, seed_cochain,
                             solve_coboundary)
    from .ncpoly import Presentation
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc)
    D = args.degree or 4
    mu1 = mu_series(p, 1, D)[0]
    names = p.names
    n = p.n
    unit = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    table = {f"mu1({names[i]},{names[j]})": mu1(unit[i], unit[j]).format(names)
             for i in range(n) for j in range(n) if not mu1(unit[i], unit[j]).is_zero()}
    psi = antisymmetrize(mu1)
    alpha = solve_coboundary(mu1, D)
    d_alpha = ce_differential(seed_cochain(mu1.alg, {i: g for i, g in enumerate(alpha.gen_values)}))
    g = gauge_transform(p, alpha)
    h1_clean = all(not x.h_part(1) for x in g.brackets.values())
    rep = {"command": "hochschild", "mu1": table, "psi_mu1": psi.format(),
           "alpha": {names[i]: v.format(names) for i, v in enumerate(alpha.gen_values)},
           "psi_equals_d_alpha": psi == d_alpha,
           "gauge_commutators": _poly_table(g.brackets, names),
           "gauge_h1_vanishes": h1_clean,
           "gauge_presentation": g.to_json()}
    return rep, rep["psi_equals_d_alpha"] and h1_clean


def cmd_center(args):
    from .hochschild import center_basis
    from .ncpoly import Presentation
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc, validate=False)
    D = args.degree or 2
    r = center_basis(p, D)
    rep = {"command": "center", "degree_cap": D, "leading": [x.format(p.names) for x in r["leading"]],
           "lifts": [x.format(p.names) for x in r["lifts"]]}
    return rep, True


def load_module(name: str, p):
    from .ext import ModulePresentation
    if name in (None, "trivial"):
        return ModulePresentation.trivial(p)
    if name == "zero":
        return ModulePresentation.zero(p)
    data = load_json(name)
    r = int(data["rank"])
    N = p.trunc
    acts = {i: SeriesMatrix.zeros(r, r, N) for i in range(p.n)}
    for a in data.get("actions", []):
        i = int(a["generator"]) - 1
        rows = [[SeriesScalar([parse_rational(c) for c in cell], N) for cell in row] for row in a["matrix"]]
        acts[i] = SeriesMatrix(rows, N, (r, r))
    return ModulePresentation(r, acts, N)


def cmd_poincare(args):
    from .ext import poincare_check
    from .ncpoly import Presentation
    p = Presentation.from_json(load_presentation_data(args.input), trunc=args.trunc)
    m = load_module(args.module, p)
    r = poincare_check(p, m)
    rep = {"command": "poincare", "ok": r["ok"], "rows": r["rows"], "free_exponent": p.trunc + 1}
    return rep, r["ok"]


COMMANDS = {
    "confluence": cmd_confluence, "koszul": cmd_koszul, "theta": cmd_theta, "vee": cmd_vee,
    "link": cmd_link, "twist-dual": cmd_twist_dual, "hochschild": cmd_hochschild,
    "center": cmd_center, "poincare": cmd_poincare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qkoszul", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trunc", type=int, default=None, help="truncation order N (default: from the file)")
    common.add_argument("--degree", type=int, default=None, help="degree cap D")
    common.add_argument("--witness-degree", type=int, default=8, help="witness degree cap for theta")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("input")
        if name == "poincare":
            sp.add_argument("module", nargs="?", default="trivial", help="module file, 'trivial' or 'zero'")
        if name == "twist-dual":
            sp.add_argument("--compare", default=None, help="presentation to compare the result against")
            sp.add_argument("--no-coproducts", action="store_true")
    return ap


def render_text(rep: dict) -> str:
    lines = []

    def walk(prefix, x):
        if isinstance(x, dict):
            for k in sorted(x):
                walk(f"{prefix}{k}.", x[k]) if isinstance(x[k], (dict, list)) else lines.append(f"{prefix}{k}: {x[k]}")
        elif isinstance(x, list):
            for i, v in enumerate(x):
                walk(f"{prefix}{i}.", v) if isinstance(v, (dict, list)) else lines.append(f"{prefix}{i}: {v}")
    walk("", rep)
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.trunc is not None and args.trunc < 0 or (args.degree is not None and args.degree < 1):
        print("error: caps must be positive", file=sys.stderr)
        return 2
    try:
        rep, ok = COMMANDS[args.command](args)
    except (FileNotFoundError, ValueError, KeyError, TypeError, ArithmeticError, RuntimeError,
            NotImplementedError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    rep = {"schema": SCHEMA, "ok": bool(ok), **{k: v for k, v in rep.items() if k != "ok"}}
    body = json.dumps(rep, indent=1, sort_keys=True) + "\n" if args.format == "json" else render_text(rep)
    if args.out:
        Path(args.out).write_text(body)
    else:
        sys.stdout.write(body)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
