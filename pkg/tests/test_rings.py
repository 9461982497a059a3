import random

import pytest

from padix.arith import ValuationVerdict
from padix.rings import (
    EisensteinRing,
    RingDescriptor,
    make_eisenstein,
    make_unramified,
    parse_descriptor,
    ring_from_descriptor,
)


def test_make_unramified_examples():
    R = make_unramified(3, 1, 8)
    assert R.residue_field.q == 3 and R.modulus_int == 3**8
    R2 = make_unramified(3, 2, 8)
    assert R2.modulus_poly == (1, 0, 1)  # lift of x^2+1
    R3 = make_unramified(2, 3, 4)
    assert R3.residue_field.q == 8


def test_make_eisenstein_examples():
    Re = make_eisenstein(make_unramified(3, 1, 8), [-3, 0, 1])
    assert Re.e == 2 and Re.descriptor.disc_val == 1
    pi = Re.mul_pi_pow(Re.one, 1)
    assert Re.mul(pi, pi) == Re.from_int(3)
    R5 = make_eisenstein(make_unramified(5, 1, 6), [-5, 0, 0, 1])
    assert R5.e == 3 and R5.descriptor.disc_val == 2
    # wild quadratic over Q_2 needs an explicit discriminant valuation
    Rw = make_eisenstein(make_unramified(2, 1, 8), [-2, 0, 1], disc_val=3)
    assert Rw.descriptor.disc_val == 3
    with pytest.raises(ValueError):
        make_eisenstein(make_unramified(2, 1, 8), [-2, 0, 1])


def test_eisenstein_rejects_non_eisenstein():
    with pytest.raises(ValueError):
        make_eisenstein(make_unramified(3, 1, 8), [-1, 0, 1])  # unit constant
    with pytest.raises(ValueError):
        make_eisenstein(make_unramified(3, 1, 8), [-9, 0, 1])  # valuation 2
    with pytest.raises(ValueError):
        make_eisenstein(make_unramified(3, 1, 8), [-3, 1, 1])  # unit middle


def test_residue_examples():
    Re = make_eisenstein(make_unramified(3, 2, 6), [-3, 0, 1])
    K = Re.residue_field
    pi = Re.mul_pi_pow(Re.one, 1)
    assert Re.residue(pi) == K.zero
    y = Re.add_scalar(Re.mul_pi_pow(Re.from_int(7), 1), 1)  # 1 + 7*pi
    assert Re.residue(y) == K.one
    alpha = K.from_coords([2, 1])
    assert Re.residue(Re.lift_residue(alpha)) == alpha


def test_pi_valuation_examples():
    Re = make_eisenstein(make_unramified(3, 1, 8), [-3, 0, 1])
    assert Re.pi_valuation(Re.from_int(3)) == ValuationVerdict.exactly(2)
    pi = Re.mul_pi_pow(Re.one, 1)
    assert Re.pi_valuation(pi) == ValuationVerdict.exactly(1)
    assert Re.pi_valuation(Re.from_int(5)) == ValuationVerdict.exactly(0)
    assert Re.pi_valuation(Re.zero) == ValuationVerdict.at_least(16)


def test_eval_poly_examples():
    Re = make_eisenstein(make_unramified(3, 1, 8), [-3, 0, 1])
    pi = Re.mul_pi_pow(Re.one, 1)
    assert Re.eval_poly([-3, 0, 1], pi) == Re.zero
    x = Re.add_scalar(pi, 4)
    assert Re.eval_poly([7], x) == Re.from_int(7)
    assert Re.eval_poly([0, 1], x) == x


def test_valuation_multiplicative_and_residue_homomorphism():
    rng = random.Random(12)
    for ring in (
        make_unramified(3, 2, 6),
        make_eisenstein(make_unramified(3, 1, 6), [-3, 0, 1]),
        make_eisenstein(make_unramified(2, 1, 6), [-2, 0, 1], disc_val=3),
    ):
        K = ring.residue_field

        def rand_elt():
            x = ring.from_int(rng.randrange(ring.modulus_int))
            for _ in range(rng.randrange(3)):
                x = ring.add(
                    x, ring.mul_pi_pow(ring.from_int(rng.randrange(7)), rng.randrange(3))
                )
            return x

        for _ in range(60):
            x, y = rand_elt(), rand_elt()
            vx = ring.visible_pi_valuation(x, ring.k)
            vy = ring.visible_pi_valuation(y, ring.k)
            prod = ring.mul(x, y)
            if vx is not None and vy is not None and vx + vy < ring.pi_precision:
                assert ring.visible_pi_valuation(prod, ring.k) == vx + vy
            assert ring.residue(prod) == K.mul(ring.residue(x), ring.residue(y))
            assert ring.residue(ring.add(x, y)) == K.add(ring.residue(x), ring.residue(y))


def test_tower_degree_law():
    # residue field has p^f elements; v_pi(p) = e
    for p, f, e, eis in [(3, 1, 2, [-3, 0, 1]), (3, 2, 2, [-3, 0, 1]), (5, 1, 3, [-5, 0, 0, 1])]:
        base = make_unramified(p, f, 6)
        ring = make_eisenstein(base, eis)
        assert ring.residue_field.q == p**f
        assert ring.pi_valuation(ring.from_int(p)) == ValuationVerdict.exactly(e)


def test_unramified_matches_core_valuation():
    R = make_unramified(5, 1, 6)
    for v in (0, 1, 5, 50, 125, 3125):
        got = R.pi_valuation(R.from_int(v))
        if v == 0:
            assert not got.finite
        else:
            expect = 0
            t = v
            while t % 5 == 0:
                t //= 5
                expect += 1
            assert got == ValuationVerdict.exactly(expect)


def test_div_pi_pow_roundtrip():
    rng = random.Random(3)
    for ring in (
        make_unramified(3, 2, 8),
        make_eisenstein(make_unramified(3, 1, 8), [-3, 0, 1]),
        make_eisenstein(make_unramified(5, 1, 6), [-5, 0, 0, 1]),
    ):
        for _ in range(40):
            x = ring.from_int(rng.randrange(1, ring.modulus_int))
            m = rng.randrange(0, 2 * ring.e)
            y = ring.mul_pi_pow(x, m)
            back = ring.div_pi_pow(y, m)
            cost = ring.pi_pow_digit_cost(m)
            keep = ring.p ** (ring.k - cost)
            # agreement to the precision that survives the division
            want = ring.from_int(x[0][0] % keep if ring.e > 1 else x[0] % keep)
            got0 = back[0][0] % keep if ring.e > 1 else back[0] % keep
            assert got0 == (x[0][0] if ring.e > 1 else x[0]) % keep


def test_descriptor_text_forms():
    d = parse_descriptor("unram:3", 5)
    assert d == RingDescriptor(p=5, f=3, e=1, eisenstein=None, disc_val=0)
    assert d.text_form == "unram:3"
    d2 = parse_descriptor("eis:2:1:-3,0,1", 3)
    assert d2.e == 2 and d2.f == 1 and d2.disc_val == 1
    assert d2.text_form == "eis:2:1:-3,0,1"
    with pytest.raises(ValueError):
        parse_descriptor("eis:2:1:-2,0,1", 2)  # wild: needs explicit disc_val
    with pytest.raises(ValueError):
        parse_descriptor("weird:1", 3)
    ring = ring_from_descriptor("eis:2:1:-3,0,1", 3, 6)
    assert isinstance(ring, EisensteinRing) and ring.k == 6


def test_degree_cap():
    with pytest.raises(ValueError):
        RingDescriptor(p=2, f=17, e=1, eisenstein=None, disc_val=0)
    with pytest.raises(ValueError):
        make_eisenstein(make_unramified(3, 9, 4), [-3, 0, 1])  # e*f = 18
