"""Batch command line front end.

Every verb prints a deterministic report.  With ``--report machine`` each
record is one JSON object per line with sorted keys.  Exit status is 0 on
success, 1 when a check fails and 2 when an input cannot be parsed.

Enumeration caps come from the environment: POLYSPLAY_MAX_SEQUENCE bounds
chord sequence length and POLYSPLAY_DOMAIN_BOX the periodic coefficient box
of the domain search.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from . import ainfinity as ai
from . import chords as ch
from . import diagram as dg
from . import poly_assembly as pa
from . import splaying as sp
from . import torus_algebra as ta


class InputError(Exception):
    """Bad input: exit status 2."""


class CheckFailed(Exception):
    """A validation came out negative: exit status 1."""


class Report:
    def __init__(self, machine: bool, out=None):
        self.machine = machine
        self.out = out or sys.stdout

    def record(self, text: str, **fields) -> None:
        if self.machine:
            self.out.write(json.dumps(fields, sort_keys=True) + "\n")
        else:
            self.out.write(text + "\n")


# ----------------------------------------------------------------------
# loading


def _load_diagram(path: str) -> dg.Diagram:
    try:
        return dg.load_diagram(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except dg.DiagramError as exc:
        raise InputError(str(exc)) from None


def _bordered(path: str) -> dg.Diagram:
    """A bordered diagram, bordering a basic diagram with STAB data if needed."""
    D = _load_diagram(path)
    if D.kind == "bordered":
        return D
    if "STAB" not in D.extra:
        raise InputError(f"{path}: expected a bordered diagram or a basic diagram with a STAB section")
    try:
        return sp.border(D)
    except sp.StabilisationError as exc:
        raise InputError(str(exc)) from None


def _parse(fn: Callable, text: str, what: str):
    try:
        return fn(text)
    except ValueError as exc:
        raise InputError(f"bad {what} {text!r}: {exc}") from None


def _generator(D: dg.Diagram, text: str) -> frozenset:
    x = dg.parse_generator(text)
    for p in x:
        if p not in D.points:
            raise InputError(f"{text!r}: no point {p} in {D.source}")
    return x


def _domain(D: dg.Diagram, text: str) -> dg.Domain:
    try:
        return D.domain(text)
    except ValueError as exc:
        raise InputError(f"bad domain {text!r}: {exc}") from None


def _systems(text: str | None):
    if text is None:
        return None
    return tuple(_parse(lambda t: [int(v) for v in t.split(",")], text, "system list"))


def _counts(path: str, D: dg.Diagram, k: int) -> pa.CountTable:
    try:
        return pa.load_count_table(path, D, k)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except pa.PolyError as exc:
        raise InputError(str(exc)) from None


# ----------------------------------------------------------------------
# verbs


def cmd_algebra(args, rep: Report) -> None:
    if args.op == "mul":
        if len(args.terms) != 2:
            raise InputError("algebra mul takes two elements")
        a, b = (_parse(ta.TorusElement.parse, t, "algebra element") for t in args.terms)
        value = str(a * b)
        rep.record(value, a=str(a), b=str(b), product=value)
    elif args.op == "table":
        for a in ta.GENERATORS:
            for b in ta.GENERATORS:
                value = str(ta.multiply(a, b))
                if value != "0" or args.all:
                    rep.record(f"{a} * {b} = {value}", a=a, b=b, product=value)
    else:  # homology
        for t in args.terms:
            seq = _parse(ch.parse_sequence, t, "chord sequence")
            hom = ta.sequence_homology(seq)
            rep.record(f"{t}: {hom}", sequence=t, homology=list(hom))


def cmd_reduce(args, rep: Report) -> None:
    seq = _parse(ch.parse_sequence, args.sequence, "chord sequence")
    fn = ch.reduce_123 if args.mode == "123" else ch.reduce
    out = ch.format_sequence(fn(seq))
    if args.compare is None:
        rep.record(out, sequence=args.sequence, mode=args.mode, reduced=out)
        return
    other = _parse(ch.parse_sequence, args.compare, "chord sequence")
    eq = ch.equivalent_123 if args.mode == "123" else ch.composable_equivalent
    same = eq(seq, other)
    rep.record(f"{out} {'~' if same else '!~'} {ch.format_sequence(fn(other))}", equivalent=same)
    if not same:
        raise CheckFailed()


def cmd_splicings(args, rep: Report) -> None:
    rho = _parse(ch.parse_chord_set, args.rho, "chord set")
    try:
        if args.shippings is not None:
            sigma = _parse(ch.Splicing.parse, args.sigma, "splicing") if args.sigma else None
            sigmas = [sigma] if sigma is not None else ch.enumerate_interleavings(rho)
            for s in sigmas:
                for sh in ch.enumerate_shippings(rho, s, args.shippings):
                    boat, anchor = ch.format_chord_set(sh.boat), ch.format_chord_set(sh.anchor)
                    rep.record(
                        f"{s} : boat {boat} {sh.boat_splicing} ; anchor {anchor} {sh.anchor_splicing} ; k'={sh.padded}",
                        sigma=str(s),
                        boat=boat,
                        sboat=str(sh.boat_splicing),
                        anchor=anchor,
                        sanchor=str(sh.anchor_splicing),
                        padded=sh.padded,
                    )
            return
        if args.interleavings:
            sigmas = ch.enumerate_interleavings(rho)
        else:
            m = args.columns if args.columns is not None else sum(ch.jump_profile(rho))
            sigmas = ch.enumerate_splicings(rho, m)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for s in sigmas:
        rep.record(str(s), splicing=str(s), col=ch.col(s))


def cmd_diagram_check(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    indep = D.homologically_independent()
    cert = dg.admissibility_certificate(D)
    brute = dg.brute_force_admissible(D, bound=args.box)
    fields = dict(
        source=D.source,
        kind=D.kind,
        genus=D.genus,
        h=D.h,
        regions=len(D.regions),
        points=len(D.points),
        systems=D.systems,
        independent=indep,
        admissible=cert is None,
        admissible_box=brute,
    )
    lines = [f"{k}: {v}" for k, v in fields.items()]
    if D.kind == "bordered":
        prov = dg.admissibility_certificate(D, provincial=True)
        fields["provincially_admissible"] = prov is None
        lines.append(f"provincially_admissible: {prov is None}")
    if cert is not None:
        fields["certificate"] = str(cert)
        lines.append(f"certificate: {cert}")
    rep.record("\n".join(lines), **fields)
    if cert is not None or not indep or brute != (cert is None):
        raise CheckFailed()


def cmd_generators(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    i, j = _systems(args.systems) or (0, 1)
    for x in sorted(dg.enumerate_generators(D, i, j), key=dg.format_generator):
        label = dg.format_generator(x)
        if D.kind == "bordered" and (i, j) == (0, 1):
            idem = "".join(dg.idempotent_of(D, x))
            rep.record(f"{label} ; {idem}", generator=label, idempotent=idem)
        else:
            rep.record(label, generator=label)


def cmd_domains(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    systems = _systems(args.systems)
    if not args.gens:
        for P in dg.periodic_domain_basis(D, systems):
            rep.record(f"periodic {P}", periodic=str(P))
        return
    gens = [_generator(D, g) for g in args.gens]
    try:
        found = dg.nonnegative_domains(D, gens, systems, args.max_total)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for B in found:
        e = dg.euler_measure(D, B)
        rep.record(f"{B} ; e={e}", domain=str(B), euler=str(e))


def cmd_index(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    B = _domain(D, args.domain)
    rho = _parse(ch.parse_chord_set, args.rho, "chord set") if args.rho else None
    sigma = _parse(ch.Splicing.parse, args.sigma, "splicing") if args.sigma else None
    try:
        value = dg.index(D, B, args.chi, rho, sigma, args.cut, args.mode, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rep.record(str(value), index=value, mode=args.mode)


def cmd_splay(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    try:
        d = sp.parse_stab(D)
        if args.rows:
            d = d.with_iotas(args.rows.split(","))
        if args.border:
            out = sp.border(D, d)
            thetas = []
        else:
            S = sp.partial_splay_full(D, d) if args.partial else sp.splay_full(D, d)
            out = S.diagram
            thetas = [dg.format_generator(t) for t in sp.theta_plus(S)]
    except sp.StabilisationError as exc:
        raise InputError(str(exc)) from None
    text = dg.format_diagram(out)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    if rep.machine:
        rep.record("", regions=len(out.regions), points=len(out.points), systems=out.systems, theta_plus=thetas)
    else:
        if not args.output:
            rep.out.write(text)
        for i, t in enumerate(thetas):
            rep.record(f"# theta+ {i + 1},{i + 2}: {t}")


def cmd_decompose(args, rep: Report) -> None:
    if args.what == "reeb":
        if len(args.items) != 2:
            raise InputError("decompose reeb takes tier letters and comma-separated cell multiplicities")
        letters, cells = args.items
        vec = _parse(lambda t: [int(v) for v in t.split(",")], cells, "cell list")
        try:
            S = sp.decompose_reeb_domains(sp.LocalGrid(letters), vec)
        except sp.DecompositionError as exc:
            rep.record(f"not decomposable: {exc}", error=str(exc))
            raise CheckFailed() from None
        chords = ch.format_sequence(S.chords())
        rep.record(chords, chords=chords, blocks=list(S.blocks), jumps=list(S.jumps))
    elif args.what == "easterly":
        patterns = args.items
        rho = _parse(ch.parse_chord_set, args.rho, "chord set") if args.rho else None
        lam = len(patterns[0]) if patterns else 0
        try:
            cls = pa.classify_pieces(patterns, lam, rho)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        n = pa.model_count_easterly(cls)
        rep.record(f"{cls} ; count {n}", kind=cls.kind, handle=cls.handle, count=n)
    else:  # anchor
        for rho in args.items:
            try:
                n = pa.model_count_anchor(rho)
            except ValueError as exc:
                raise InputError(str(exc)) from None
            rep.record(f"{rho} ; count {n}", chord=rho, count=n)


def _assembled(args):
    D = _bordered(args.diagram)
    table = _counts(args.counts, D, args.level)
    try:
        N, M = pa.assemble_poly_k(D, args.level, table)
    except pa.PolyError as exc:
        raise CheckFailed(str(exc)) from None
    return D, N, M


def cmd_assemble(args, rep: Report) -> None:
    _, N, M = _assembled(args)
    if args.partial:
        for (x, rho, sigma), ys in sorted(N.n.items(), key=lambda kv: kv[0]):
            r, v = ch.format_chord_set(rho), ai.format_combo(ys)
            rep.record(f"{x} ; {r} ; {sigma} ; {v}", x=x, rho=r, sigma=str(sigma), value=v)
        return
    for (x, rho), ys in sorted(M.maps.items(), key=lambda kv: kv[0]):
        r, v = ch.format_chord_set(rho), ai.format_combo(ys)
        rep.record(f"{x} ; {r} ; {v}", x=x, rho=r, value=v)


def cmd_verify(args, rep: Report) -> None:
    _, N, _ = _assembled(args)
    report = pa.verify_poly(N, args.max_length)
    for r in report.residuals:
        rep.record(
            "residual " + r.format(),
            x=r.x,
            rho=ch.format_chord_set(r.rho),
            sigma=str(r.sigma),
            residual=ai.format_combo(r.value),
        )
    rep.record(f"checked {report.checked} inputs, {len(report.residuals)} residuals", checked=report.checked,
               residuals=len(report.residuals))
    if not report.ok:
        raise CheckFailed()


def cmd_kappa(args, rep: Report) -> None:
    D = _load_diagram(args.diagram)
    if D.kind != "bordered" and "STAB" in D.extra:
        D = _bordered(args.diagram)
    try:
        value = pa.kappa_bound(D)
    except pa.PolyError as exc:
        rep.record(str(exc), error=str(exc))
        raise CheckFailed() from None
    rep.record(str(value), kappa=value)


VERBS: dict[str, Callable] = {
    "algebra": cmd_algebra,
    "reduce": cmd_reduce,
    "splicings": cmd_splicings,
    "diagram-check": cmd_diagram_check,
    "generators": cmd_generators,
    "domains": cmd_domains,
    "index": cmd_index,
    "splay": cmd_splay,
    "decompose": cmd_decompose,
    "assemble": cmd_assemble,
    "verify": cmd_verify,
    "kappa": cmd_kappa,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polysplay", description="Splayed bordered diagrams and Poly_k assembly.")
    p.add_argument("--report", choices=("text", "machine"), default="text")
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("algebra", help="torus algebra products")
    a.add_argument("op", choices=("mul", "table", "homology"))
    a.add_argument("terms", nargs="*")
    a.add_argument("--all", action="store_true", help="table: include zero products")

    r = sub.add_parser("reduce", help="composable or 123 reduction of a chord sequence")
    r.add_argument("sequence")
    r.add_argument("--mode", choices=("composable", "123"), default="composable")
    r.add_argument("--compare", help="test equivalence with a second sequence")

    s = sub.add_parser("splicings", help="splicings, interleavings and shippings of a chord set")
    s.add_argument("rho")
    s.add_argument("--interleavings", action="store_true")
    s.add_argument("--columns", type=int)
    s.add_argument("--shippings", type=int, metavar="K")
    s.add_argument("--sigma")

    d = sub.add_parser("diagram-check", help="parse, validate and test admissibility")
    d.add_argument("diagram")
    d.add_argument("--box", type=int, default=5, help="coefficient box of the brute-force check")

    g = sub.add_parser("generators", help="list generators")
    g.add_argument("diagram")
    g.add_argument("--systems", help="two systems, default 0,1")

    m = sub.add_parser("domains", help="periodic basis, or nonnegative domains between generators")
    m.add_argument("diagram")
    m.add_argument("gens", nargs="*", help="one generator per system in the cycle")
    m.add_argument("--systems")
    m.add_argument("--max-total", type=int)

    i = sub.add_parser("index", help="index of a domain")
    i.add_argument("diagram")
    i.add_argument("--domain", required=True)
    i.add_argument("--chi", type=int, required=True)
    i.add_argument("--rho")
    i.add_argument("--sigma")
    i.add_argument("--cut", type=int, default=0)
    i.add_argument("--mode", choices=dg.INDEX_MODES, default="bigon")
    i.add_argument("--k", type=int, default=1, help="polygon modes: a (k+1)-gon")

    y = sub.add_parser("splay", help="border, splay or partially splay a basic diagram")
    y.add_argument("diagram")
    y.add_argument("--rows", help="idempotent rows, e.g. mm,lm")
    y.add_argument("--partial", action="store_true")
    y.add_argument("--border", action="store_true")
    y.add_argument("--output", "-o")

    c = sub.add_parser("decompose", help="Reeb domain decomposition and local model counts")
    c.add_argument("what", choices=("reeb", "easterly", "anchor"))
    c.add_argument("items", nargs="+")
    c.add_argument("--rho", help="easterly: boat chords per boundary")

    for name, helptext in (("assemble", "assemble Poly_k maps"), ("verify", "check the partial relations")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("diagram")
        q.add_argument("counts")
        q.add_argument("--level", type=int, default=0)
        if name == "assemble":
            q.add_argument("--partial", action="store_true", help="print n maps instead of m maps")
        else:
            q.add_argument("--max-length", type=int, default=4)

    k = sub.add_parser("kappa", help="bound on the input length of nonzero maps")
    k.add_argument("diagram")
    return p


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    rep = Report(args.report == "machine", out)
    try:
        VERBS[args.verb](args, rep)
    except InputError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except CheckFailed as exc:
        if str(exc):
            err.write(f"failed: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
