import itertools

import pytest

import oracles
from polysplay import chords as ch
from polysplay import diagram as dg
from polysplay import splaying as sp
from polysplay.splaying import LocalGrid, ReebDomainSequence


@pytest.fixture(scope="module")
def stab(hopf):
    return sp.parse_stab(hopf)


@pytest.fixture(scope="module")
def splay_mm_mm(hopf, stab):
    return sp.splay_full(hopf, stab.with_iotas(["mm", "mm"]))


# ----------------------------------------------------------------------
# constructions


def test_stabilisation_data(stab):
    assert [p.pair for p in stab.pairs] == [1, 2]
    assert stab.iotas == (("m", "m"), ("l", "m"))
    assert stab.with_iotas(["ml"]).iotas == (("m", "l"),)


def test_bad_iotas(hopf, stab):
    with pytest.raises(sp.StabilisationError):
        sp.splay(hopf, stab.with_iotas(["mmm"]))
    with pytest.raises(sp.StabilisationError):
        sp.splay(hopf, stab.with_iotas(["mx"]))


def test_border_matches_bundled_file(hopf, hopf_bordered):
    B = sp.border(hopf)
    assert dg.format_diagram(B) == dg.format_diagram(hopf_bordered)
    assert B.genus == hopf.genus + hopf.h
    arcs = [c for c in B.curves.values() if c.kind == "arc"]
    assert len(arcs) == 2 * hopf.h
    assert len(B.curves_of(0)) == B.genus + B.h - 1
    # each b_j sits in the region holding boundary segment 0
    for j in range(B.h):
        assert B.basepoints[f"b{j + 1}"] == B.segment_region(j, 0)


def test_single_row_splay_is_closed_stabilisation(hopf, stab):
    for row in ("mm", "ml", "lm", "ll"):
        S = sp.splay(hopf, stab.with_iotas([row]))
        C = sp.closed_stabilisation(hopf, tuple(row))
        assert dg.format_diagram(S) == dg.format_diagram(C)
        assert S.systems == [0, 1]


def test_splayed_diagrams_are_admissible_multidiagrams(hopf, stab):
    for rows in (["mm", "lm"], ["ml", "lm", "ll"], ["mm", "mm"]):
        X = sp.splay(hopf, stab.with_iotas(rows))
        assert X.systems == list(range(len(rows) + 1))
        assert X.homologically_independent()
        assert dg.is_admissible(X)


def e_points(X):
    return sorted(p for p in X.points if p.startswith("e"))


def test_e_points_at_idempotent_changes(hopf, stab):
    for rows in (["mm", "lm"], ["ml", "lm", "ll"], ["mm", "lm", "mm"], ["mm", "mm"]):
        X = sp.splay(hopf, stab.with_iotas(rows))
        consecutive = {p for p in e_points(X) if int(p.split("_")[2]) == int(p.split("_")[1]) + 1}
        want = {
            f"e{j + 1}_{i + 1}_{i + 2}"
            for i in range(len(rows) - 1)
            for j in range(2)
            if rows[i][j] != rows[i + 1][j]
        }
        assert consecutive == want, rows


def test_splay2_shape(hopf, stab):
    S = sp.splay_full(hopf, stab.with_iotas(["mm", "lm"]))
    assert e_points(S.diagram) == ["e1_1_2"]
    # boundary 2 stays meridional on both tiers: an approximation pair
    assert S.levels["am2"] == [1, 2]
    assert S.levels["am1"] == [1] and S.levels["al1"] == [2]


def test_partial_splay(hopf, stab):
    P = sp.partial_splay_full(hopf, stab.with_iotas(["mm", "lm"]))
    assert P.diagram.kind == "bordered"
    assert P.diagram.homologically_independent()
    assert len(sp.theta_plus(P)) == len(P.diagram.systems) - 2


# ----------------------------------------------------------------------
# distinguished generators and nearest points


def test_theta_plus_counts(hopf, stab):
    for rows in (["mm"], ["mm", "lm"], ["ml", "lm", "ll"], ["mm", "lm", "mm"]):
        S = sp.splay_full(hopf, stab.with_iotas(rows))
        thetas = sp.theta_plus(S)
        assert len(thetas) == len(rows) - 1
        for i, th in enumerate(thetas, start=1):
            assert th in dg.enumerate_generators(S.diagram, i, i + 1)


def test_theta_plus_uses_e_points(hopf, stab):
    S = sp.splay_full(hopf, stab.with_iotas(["ml", "lm", "ll"]))
    first, second = sp.theta_plus(S)
    assert {"e1_1_2", "e2_1_2"} <= first
    assert "e2_2_3" in second


def test_theta_plus_without_jumps(splay_mm_mm):
    (th,) = sp.theta_plus(splay_mm_mm)
    assert not any(p.startswith("e") for p in th)


def test_nearest_point(splay_mm_mm):
    S = splay_mm_mm
    X = S.diagram
    G1, G2 = dg.enumerate_generators(X, 0, 1), dg.enumerate_generators(X, 0, 2)
    image = [sp.nearest_point(S, x, 2) for x in G1]
    assert sorted(map(sorted, image)) == sorted(map(sorted, G2))
    for x in G1:
        assert sp.nearest_point(S, x, 1) == x
        assert sp.nearest_point(S, sp.nearest_point(S, x, 2), 1) == x


def test_nearest_point_refuses_jumping_slots(splay_mm_lm):
    x = dg.enumerate_generators(splay_mm_lm.diagram, 0, 1)[0]
    with pytest.raises(sp.StabilisationError):
        sp.nearest_point(splay_mm_lm, x, 2)


def test_regularise(splay_mm_mm, splay_mm_lm):
    R = sp.regularise(splay_mm_mm)
    assert R.systems == [0, 1]
    assert len(dg.enumerate_generators(R, 0, 1)) == len(dg.enumerate_generators(splay_mm_mm.diagram, 0, 2))
    same = sp.regularise(splay_mm_lm)
    assert dg.format_diagram(same) == dg.format_diagram(splay_mm_lm.diagram)


def test_regularise_three_levels(hopf, stab):
    S = sp.splay_full(hopf, stab.with_iotas(["mm", "mm", "lm"]))
    assert sp.regular_systems(S, [1, 2, 3]) == [1, 3]
    assert sp.regularise(S).systems == [0, 1, 2]


# ----------------------------------------------------------------------
# domain transport


def test_splay_domain_zero(splay_mm_mm):
    sub, B = sp.splay_domain(splay_mm_mm, splay_mm_mm.diagram.zero(), 2)
    assert not B and sub.systems == [0, 1]


def test_splay_domain_needs_approximation(splay_mm_lm):
    with pytest.raises(sp.StabilisationError):
        sp.splay_domain(splay_mm_lm, splay_mm_lm.diagram.zero(), 2)


def test_splay_domain_transports_classes(splay_mm_mm):
    S = splay_mm_mm
    X = S.diagram
    (th,) = sp.theta_plus(S)
    approx = set(X.tagged("approx"))
    pieces = [P for P in dg.periodic_domain_basis(X, (0, 1, 2)) if set(P.support()) <= approx]
    assert pieces
    hit = set()
    for x in dg.enumerate_generators(X, 0, 1):
        for y in dg.enumerate_generators(X, 0, 2):
            B = dg.particular_domain(X, [x, th, y], (0, 1, 2))
            assert B is not None
            sub, image = sp.splay_domain(S, B, 2)
            y1 = sp.nearest_point(S, y, 1)
            assert dg.in_pi2(sub, image, [x, y1], (0, 1))
            assert sp.splays(S, B, 2, image)
            for P in pieces:
                assert sp.splay_domain(S, B + P, 2)[1] == image
            hit.add((x, y1))
    # every pair of generators of the smaller diagram is reached
    assert len(hit) == len(dg.enumerate_generators(X, 0, 1)) ** 2


# ----------------------------------------------------------------------
# Reeb domains


def test_reeb_sequence_round_trip():
    S = ReebDomainSequence.from_chords(("r12", "r1", "r23", "r2"))
    assert S.letters == ("m", "l", "m")
    assert S.blocks == (1, 1, 0)
    assert S.chords() == ("r12", "r1", "r23", "r2")
    assert S.canonical().chords() == ("r12", "r123", "r2")


def test_reeb_sequence_errors():
    with pytest.raises(sp.DecompositionError):
        ReebDomainSequence.from_chords(())
    with pytest.raises(sp.DecompositionError):
        ReebDomainSequence.from_chords(("r1", "r1"))
    with pytest.raises(sp.DecompositionError):
        LocalGrid(("m", "m"))


def test_decompose_single_quadrants():
    g = LocalGrid(("m", "l"))
    # cells are x-major: (0,0), (0,1), (1,0), (1,1); SE quadrant alone is r1
    assert sp.decompose_reeb_domains(g, (0, 0, 1, 0)).chords() == ("r1",)
    assert sp.decompose_reeb_domains(g, (0, 1, 0, 0)).chords() == ("r3",)
    assert sp.decompose_reeb_domains(g, (0, 1, 1, 1)).chords() == ("r123",)


def test_decompose_examples():
    g = LocalGrid(("m", "l"))
    assert sp.decompose_reeb_domains(g, g.total(ReebDomainSequence.from_chords(("r1",)))).chords() == ("r1",)
    h = LocalGrid(("l", "m"))
    assert sp.decompose_reeb_domains(h, h.total(ReebDomainSequence.from_chords(("r2",)))).chords() == ("r2",)
    flat = LocalGrid(("m",))
    zero = sp.decompose_reeb_domains(flat, flat.zero())
    assert zero.chords() == () and zero.blocks == (0,)


def test_decompose_rejects_inconsistent():
    g = LocalGrid(("m", "l"))
    with pytest.raises(sp.DecompositionError):
        sp.decompose_reeb_domains(g, (1, 0, 0, 0))
    with pytest.raises(sp.DecompositionError):
        sp.decompose_reeb_domains(g, (0, 1, 1, 0))
    with pytest.raises(sp.DecompositionError):
        # letters change, so some jump is required
        sp.decompose_reeb_domains(g, g.zero())
    with pytest.raises(sp.DecompositionError):
        sp.decompose_reeb_domains(g, (0, 0, 1))


def test_decomposition_inverts_totals():
    for s in oracles.coherent_sequences(4):
        starts = ("m", "l") if not s else (None,)
        for start in starts:
            S = ReebDomainSequence.from_chords(s, start)
            g = LocalGrid(S.letters)
            U = sp.decompose_reeb_domains(g, g.total(S))
            assert g.total(U) == g.total(S)
            assert U.chords() == oracles.normal_form_123(s)


def test_local_domain_and_chords(splay_mm_lm):
    S = splay_mm_lm
    X = S.diagram
    (th,) = sp.theta_plus(S)
    x = frozenset({"p1_1", "q1_1", "q2_1"})
    y = frozenset({"q2_2", "x1.1_2", "y1.2_2"})
    B = X.domain("R9:1,R17:1,R23:1,R24:1")
    assert dg.in_pi2(X, B, [x, th, y], (0, 1, 2))
    L = [sp.local_domain(S, B, j) for j in (1, 2)]
    assert L[0].letters == ("m", "l") and L[1].letters == ("m",)
    rho = sp.rho_of_domain(L)
    assert rho == (("r1",), ("r12",))
    sigma = sp.sigma_of_domain(L, S.iotas)
    assert str(sigma) == "[1:1]"
    assert ch.idempotents_of(sigma, rho) == [tuple(r) for r in S.iotas]


def test_local_domain_of_zero(splay_mm_mm):
    L = [sp.local_domain(splay_mm_mm, splay_mm_mm.diagram.zero(), j) for j in (1, 2)]
    assert all(d.letters == ("m",) for d in L)
    assert sp.rho_of_domain(L) == ((), ())


def test_local_domain_needs_closed_splay(hopf, stab):
    P = sp.partial_splay_full(hopf, stab.with_iotas(["mm", "lm"]))
    with pytest.raises(sp.StabilisationError):
        sp.local_domain(P, P.diagram.zero(), 1)


def test_tier_letters():
    assert sp.tier_letters([("m", "l"), ("l", "l"), ("l", "m")], 0) == ("m", "l")
    assert sp.tier_letters([("m", "l"), ("l", "l"), ("l", "m")], 1) == ("l", "m")


def test_glued_generators_match_closed_stabilisation(hopf, hopf_bordered):
    # each bordered generator becomes a generator of the closed
    # stabilisation at its own idempotent, so the counts add up
    total = 0
    for row in itertools.product("ml", repeat=2):
        C = sp.closed_stabilisation(hopf, row)
        total += len(dg.enumerate_generators(C, 0, 1))
        n = sum(
            1 for x in dg.enumerate_generators(hopf_bordered, 0, 1) if dg.idempotent_of(hopf_bordered, x) == row
        )
        assert n == len(dg.enumerate_generators(C, 0, 1)), row
    assert total == 24
