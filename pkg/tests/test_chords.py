import itertools

import pytest

import oracles
from polysplay import chords as ch
from polysplay.chords import Splicing


def P(text):
    return ch.parse_chord_set(text)


# ----------------------------------------------------------------------
# sequences


def test_parse_and_format_round_trip():
    rho = P("r1.r23|r2")
    assert rho == (("r1", "r23"), ("r2",))
    assert ch.format_chord_set(rho) == "r1.r23|r2"
    assert P("-|r3") == ((), ("r3",))
    assert ch.format_chord_set(((), ())) == "-|-"


def test_parse_rejects_unknown_chord():
    with pytest.raises(ValueError):
        ch.parse_sequence("r1.r5")


def test_jump_subsequence():
    assert ch.jump_subsequence(("r1", "r12", "r2")) == ("r1", "r2")
    assert ch.jump_subsequence(()) == ()
    assert ch.jump_subsequence(("r123", "r23", "r123")) == ("r123", "r123")


def test_reductions():
    assert ch.reduce_123(("r1", "r23")) == ("r123",)
    assert ch.reduce_123(("r1", "r2", "r3")) == ("r1", "r2", "r3")
    assert ch.reduce(("r1", "r2", "r3")) == ("r123",)


def test_equivalences():
    assert ch.equivalent_123(("r1", "r23"), ("r12", "r3"))
    assert ch.equivalent_123(("r1",), ("r1",))
    assert not ch.composable_equivalent(("r1", "r2"), ("r2", "r1"))


def test_reductions_match_rewriting_oracle():
    for s in oracles.coherent_sequences(5):
        assert ch.reduce_123(s) == oracles.normal_form_123(s), s
        assert ch.reduce(s) == oracles.normal_form_composable(s), s


def test_truncations_split_the_sequence():
    s = ("r1", "r23", "r2")
    for k in range(len(s) + 1):
        assert ch.truncate_low(s, k) + ch.truncate_high(s, k) == s
    with pytest.raises(ValueError):
        ch.truncate_low(s, 4)


def test_star():
    assert ch.star(P("r1|r2"), P("r3|-")) == (("r1", "r3"), ("r2",))
    a = P("r1|r2")
    assert ch.star(a, P("-|-")) == a
    with pytest.raises(ValueError):
        ch.star(a, P("r1"))


def test_mu_bar():
    assert ch.mu_bar(P("r1.r2|r3"), 0, 0) == P("r12|r3")
    assert ch.mu_bar(P("r3.r2"), 0, 0) is None


# ----------------------------------------------------------------------
# splicings


def test_splicing_text_round_trip():
    s = Splicing(((0,), (0, 1), (1,)))
    assert str(s) == "[1:1,1:2+2:1,2:2]"
    assert Splicing.parse(str(s)) == s
    assert Splicing.parse("[]") == ch.EMPTY_SPLICING
    with pytest.raises(ValueError):
        Splicing.parse("1:1")


def test_interleaving_counts_small():
    assert len(ch.enumerate_interleavings(P("r1|r2"))) == 2
    assert len(ch.enumerate_interleavings(P("r1.r2|r1"))) == 3
    assert ch.enumerate_splicings(P("r12|r23"), 2) == []
    assert ch.enumerate_splicings(P("r12|r23"), 0) == [ch.EMPTY_SPLICING]


def test_splicings_are_valid_and_distinct():
    rho = P("r1.r2|r3.r2")
    for m in range(5):
        sp = ch.enumerate_splicings(rho, m)
        assert len(set(sp)) == len(sp)
        assert all(ch.splices(s, rho) and s.m == m for s in sp)
    # (2, 2) jumps: 3 x 3 column choices less 3 with an empty column at m = 3
    assert [len(ch.enumerate_splicings(rho, m)) for m in range(5)] == [0, 0, 1, 6, 6]


def test_col():
    for s in ch.enumerate_interleavings(P("r1.r2|r3")):
        assert ch.col(s) == 0 and s.is_interleaved()
    assert ch.col(Splicing(((0, 1),))) == 1
    assert ch.col(ch.EMPTY_SPLICING) == 0


def test_idempotents_of():
    rho = P("r1|-")
    out = ch.idempotents_of(Splicing(((0,),)), rho, base=("m", "l"))
    assert out == [("m", "l"), ("l", "l")]
    flat = ch.idempotents_of(ch.EMPTY_SPLICING, P("r12|r23"))
    assert flat == [("m", "l")]
    with pytest.raises(ValueError):
        ch.idempotents_of(Splicing(((0,),)), P("r1|-"))


def test_splicing_from_round_trip():
    rho = P("r1.r2|r3")
    for m in (2, 3):
        for s in ch.enumerate_splicings(rho, m):
            assert ch.splicing_from(rho, ch.idempotents_of(s, rho)) == s


def test_splicing_from_rejects_bad_rows():
    with pytest.raises(ValueError):
        ch.splicing_from(P("r12"), [("m",), ("m",)])
    with pytest.raises(ValueError):
        ch.splicing_from(P("r1"), [("l",), ("m",)])


def test_single_change_gives_first_jump():
    s = ch.splicing_from(P("r2|-"), [("l", "m"), ("m", "m")])
    assert s.parts(P("r2|-")) == [["r2"], [None]]


# ----------------------------------------------------------------------
# compatibility, collisions


def test_compatibility_cases():
    rho = P("r1.r2")
    s = Splicing(((0,), (0,)))
    assert ch.compatibility_case(rho, s, 0, 0) == 3
    new_rho, new_s = ch.compose_at(rho, s, 0, 0)
    assert new_rho == P("r12") and new_s == ch.EMPTY_SPLICING
    # jumping times non-jumping is r123, which keeps the part
    rho2 = P("r1.r23")
    s2 = Splicing(((0,),))
    assert ch.compatibility_case(rho2, s2, 0, 0) == 2
    assert ch.compose_at(rho2, s2, 0, 0) == (P("r123"), s2)
    rho3 = P("r3.r2")
    s3 = Splicing(((0,), (0,)))
    assert ch.compatibility_case(rho3, s3, 0, 0) == 1
    with pytest.raises(ValueError):
        ch.compose_at(rho3, s3, 0, 0)


def test_case_three_needs_consecutive_columns():
    rho = P("r1.r2|r3")
    s = Splicing(((0,), (1,), (0,)))
    assert ch.compatibility_case(rho, s, 0, 0) is None


def test_collide():
    s = Splicing(((0,), (1,)))
    assert ch.collidable(s, 0)
    c = ch.collide(s, 0)
    assert ch.col(c) == 1 and c == Splicing(((0, 1),))
    same = Splicing(((0,), (0,)))
    assert not ch.collidable(same, 0)
    with pytest.raises(ValueError):
        ch.collide(same, 0)


def test_splits_reassemble():
    rho = P("r1.r12.r2|r3")
    for sigma in ch.enumerate_interleavings(rho):
        for lam, s1, delta, s2 in ch.splits(rho, sigma):
            assert ch.star(lam, delta) == rho
            assert ch.star_splicing(s1, s2) == sigma
            assert ch.splices(s1, lam) and ch.splices(s2, delta)


def test_splits_brute_force():
    # every way of cutting each sequence, kept when the splicing cut is consistent
    rho = P("r12.r1.r23|r3.r2")
    for sigma in ch.enumerate_interleavings(rho):
        want = set()
        for cuts in itertools.product(*(range(len(s) + 1) for s in rho)):
            lam = tuple(s[:a] for s, a in zip(rho, cuts))
            delta = tuple(s[a:] for s, a in zip(rho, cuts))
            for c in range(sigma.m + 1):
                s1, s2 = Splicing(sigma.cols[:c]), Splicing(sigma.cols[c:])
                if ch.splices(s1, lam) and ch.splices(s2, delta):
                    want.add((lam, s1, delta, s2))
        assert set(ch.splits(rho, sigma)) == want


# ----------------------------------------------------------------------
# shippings


def test_shipping_without_jumps():
    rho = P("r12|r23")
    out = ch.enumerate_shippings(rho, ch.EMPTY_SPLICING, 0)
    assert len(out) == 1 and out[0].anchor == ((), ())


def test_shipping_anchor_starts_with_jump():
    rho = P("r3.r2|-")
    sigma = Splicing(((0,), (0,)))
    out = ch.enumerate_shippings(rho, sigma, 1)
    assert [s.anchor for s in out] == [(("r2",), ())]
    assert out[0].boat == (("r3",), ())


def test_shippings_reassemble_and_pad():
    rho = P("r1.r23|r3.r12")
    for sigma in ch.enumerate_interleavings(rho):
        for k in range(4):
            for s in ch.enumerate_shippings(rho, sigma, k):
                assert s.reassemble() == (rho, sigma)
                assert s.anchor_splicing.m == min(k, sigma.m)
                assert s.padded == max(sum(ch.jump_profile(s.anchor)), k)


def test_level_zero_shipping_is_all_boat():
    rho = P("r1.r2|r3")
    for sigma in ch.enumerate_interleavings(rho):
        out = ch.enumerate_shippings(rho, sigma, 0)
        assert len(out) == 1
        assert out[0].boat == rho and not any(out[0].anchor)


def test_shippings_need_interleaving():
    with pytest.raises(ValueError):
        ch.enumerate_shippings(P("r1|r3"), Splicing(((0, 1),)), 1)


def test_splays():
    rho = P("r1.r2|-")
    sigma = ch.enumerate_interleavings(rho)[0]
    lower = ch.enumerate_shippings(rho, sigma, 0)[0]
    upper = ch.enumerate_shippings(rho, sigma, 1)[0]
    assert ch.splays(lower, upper)
    assert not ch.splays(upper, lower)


def test_enumeration_cap(monkeypatch):
    monkeypatch.setattr(ch, "MAX_SEQUENCE_LENGTH", 2)
    with pytest.raises(ValueError):
        ch.enumerate_interleavings(P("r1.r2.r1"))
