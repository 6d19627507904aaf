import random
from fractions import Fraction

import pytest

from supersew.scalars import GQ
from supersew.grassmann import GrassmannElement as GE, ge_exp
from supersew.nscoord import CoordData, InfCoordData, e_hat, inf_exp_map
from supersew.sewing import (ModuliPoint, SewError, sew, sn_act, solve_gamma,
                             solve_psi, tangent_functional,
                             tangent_functional_closed_form, theta1, theta2)
from supersew.series import SuperMap

W = 8


def z(i):
    return GE.gen(i, W)


def sc(x):
    return GE.scalar(x, W)


AH = GE.evar("ah", 1, W)


def test_psi_zero_data_is_zero():
    assert solve_psi(GE.one(W), {}, {}, {}, {}, 3) == {}


def test_psi_first_order_leading_terms():
    psi = solve_psi(AH, {2: sc(1)}, {3: z(1)}, {1: sc(1)}, {1: z(2)}, 2,
                    finalize=False)
    u = GE.evar("u", 1, W)
    v = GE.evar("v", 1, W)
    # positive side: psi_j = -A_j, psi_{j-1/2} = -M_{j-1/2} at pure u-degree
    assert psi[4].subs({"v": GE.zero(W)}) == -(u * sc(1))
    assert psi[3].subs({"v": GE.zero(W)}) == -(u * z(1))
    # negative side: psi_{-j} = -alpha0^{-j} B_j, and the odd analogue
    assert psi[-2].subs({"u": GE.zero(W)}) == -(GE.evar("ah", -2, W) * v)
    assert psi[-1].subs({"u": GE.zero(W)}) == -(GE.evar("ah", -1, W) * v * z(2))
    # psi_0 has no pure one-sided part
    p0 = psi.get(0, GE.zero(W))
    assert p0.subs({"u": GE.zero(W)}) == GE.zero(W)
    assert p0.subs({"v": GE.zero(W)}) == GE.zero(W)


def test_gamma_leading_coefficients():
    # even entries: coefficient (j^3 - j)/12 * alpha0^{-j} on A_j B_j
    for j, expect in ((1, Fraction(0)), (2, Fraction(1, 2)),
                      (3, Fraction(2)), (4, Fraction(5))):
        g = solve_gamma(AH, {j: sc(1)}, {}, {j: sc(1)}, {}, 2)
        want = GE.evar("ah", -2 * j, W) * sc(expect) if expect else GE.zero(W)
        assert g == want, (j, g)
    # odd entries: (j^2 - j)/3 * alpha0^{-j+1/2} on N_{j-1/2} M_{j-1/2}
    for j, expect in ((1, Fraction(0)), (2, Fraction(2, 3)),
                      (3, Fraction(2)), (4, Fraction(4))):
        g = solve_gamma(AH, {}, {2 * j - 1: z(1)}, {}, {2 * j - 1: z(2)}, 2)
        want = GE.evar("ah", -2 * j + 1, W) * sc(expect) * (z(2) * z(1)) \
            if expect else GE.zero(W)
        assert g == want, (j, g)


def test_gamma_requires_cap_two():
    with pytest.raises(ValueError):
        solve_gamma(AH, {}, {}, {}, {}, 1)


def random_coord(rng, maxidx=2):
    a = sc(rng.randrange(1, 3)) + rng.randrange(-1, 2) * z(1) * z(2)
    A = {rng.randrange(1, maxidx + 1): sc(rng.randrange(-2, 3))}
    M = {2 * rng.randrange(1, maxidx + 1) - 1: rng.randrange(-2, 3) * z(3)}
    return CoordData(a, {j: v for j, v in A.items() if v},
                     {r: v for r, v in M.items() if v})


def random_inf(rng, maxidx=2):
    A = {rng.randrange(1, maxidx + 1): sc(rng.randrange(-2, 3))}
    M = {2 * rng.randrange(1, maxidx + 1) - 1: rng.randrange(-2, 3) * z(4)}
    return InfCoordData({j: v for j, v in A.items() if v},
                        {r: v for r, v in M.items() if v})


def random_sk1(rng):
    return ModuliPoint.one_tube(random_inf(rng), random_coord(rng), W)


def random_sk2(rng, zbody=None):
    zz = sc(zbody if zbody is not None else rng.randrange(2, 5)) + \
        rng.randrange(-1, 2) * z(5) * z(6)
    th = rng.randrange(-1, 2) * z(7)
    return ModuliPoint(2, [(zz, th)], random_inf(rng),
                       [random_coord(rng), random_coord(rng)], W)


def test_unit_law_right():
    rng = random.Random(1)
    e = ModuliPoint.unit(W)
    for _ in range(3):
        q = random_sk2(rng)
        for i in (1, 2):
            res = sew(q, i, e, degree_cap=3)
            assert res == q, (i,)


def test_unit_law_left():
    rng = random.Random(2)
    e = ModuliPoint.unit(W)
    for _ in range(3):
        q = random_sk2(rng)
        res = sew(e, 1, q, degree_cap=3)
        assert res == q
    q1 = random_sk1(rng)
    assert sew(e, 1, q1, degree_cap=3) == q1
    assert sew(q1, 1, e, degree_cap=3) == q1


def test_subgroup_law_coordinate_side():
    # (0,(1, t(A,M))) 1oo0 (0,(1, s(A,M))) = (0,(1,(s+t)(A,M)))
    A = {1: sc(1), 2: sc(-1)}
    M = {1: z(1)}
    s, t = sc(2), sc(3)

    def point(scale):
        return ModuliPoint.one_tube(
            InfCoordData(),
            CoordData(GE.one(W), {j: scale * v for j, v in A.items()},
                      {r: scale * v for r, v in M.items()}), W)

    got = sew(point(t), 1, point(s), degree_cap=4)
    assert got == point(s + t)


def test_subgroup_law_infinity_side():
    # ((s(A,M)),(1,0)) 1oo0 ((t(A,M)),(1,0)) = ((s+t)(A,M),(1,0))
    A = {1: sc(1)}
    M = {3: z(2)}
    s, t = sc(1), sc(2)

    def point(scale):
        return ModuliPoint.one_tube(
            InfCoordData({j: scale * v for j, v in A.items()},
                         {r: scale * v for r, v in M.items()}),
            CoordData.identity(W), W)

    got = sew(point(s), 1, point(t), degree_cap=4)
    assert got == point(s + t)


def std2(zz, th):
    return ModuliPoint.standard2(zz, th, width=W)


def test_double_factorization_three_punctures():
    z1 = sc(4) + z(1) * z(2)
    t1 = z(3)
    z2 = sc(3)
    t2 = z(4)
    target = ModuliPoint(3, [(z1, t1), (z2, t2)], InfCoordData(),
                         [CoordData.identity(W)] * 3, W)
    inner = (z1 - z2 - t1 * t2, t1 - t2)
    got1 = sew(std2(z2, t2), 1, std2(*inner), degree_cap=3)
    assert got1 == target
    got2 = sew(std2(z1, t1), 2, std2(z2, t2), degree_cap=3)
    assert got2 == target


def test_shifted_puncture_from_first_entry_data():
    # sewing a pure first-entry infinity datum translates the puncture
    zz = sc(5) + z(1) * z(2)
    th = z(3)
    z0 = sc(2)
    t0 = z(4)
    q2 = ModuliPoint.one_tube(InfCoordData({1: -z0}, {1: -t0}),
                              CoordData.identity(W), W)
    got = sew(std2(zz, th), 1, q2, degree_cap=3)
    want = std2(z0 + zz + t0 * th, th + t0)
    assert got == want


def random_sk1_coord_only(rng):
    """A one-tube point with standard infinity behaviour: truncation tails
    vanish identically, so iterated sewings stay exact on their windows."""
    return ModuliPoint.one_tube(InfCoordData(), random_coord(rng), W)


def test_sew_associativity_all_cases():
    rng = random.Random(7)
    trunc = ({"g": 1}, 3)
    kw = dict(degree_cap=3, idxcap=8, trunc=trunc, finalize=False)
    for trial in range(2):
        q1 = random_sk2(rng, zbody=3 + trial).mark("g")
        q2 = random_sk1_coord_only(rng).mark("g")
        q3 = random_sk1_coord_only(rng).mark("g")
        # case (iii): i <= j < i + m with m = 1
        lhs = sew(sew(q1, 1, q2, **kw), 1, q3, **kw)
        rhs = sew(q1, 1, sew(q2, 1, q3, **kw), **kw)
        assert lhs == rhs
        # case (i): j < i
        lhs = sew(sew(q1, 2, q2, **kw), 1, q3, **kw)
        rhs = sew(sew(q1, 1, q3, **kw), 2, q2, **kw)
        assert lhs == rhs
        # case (ii): j >= i + m
        lhs = sew(sew(q1, 1, q2, **kw), 2, q3, **kw)
        rhs = sew(sew(q1, 2, q3, **kw), 1, q2, **kw)
        assert lhs == rhs


def test_generation_from_three_building_blocks():
    # any two-tube point arises by dressing the standard two-tube sphere
    # with one-tube points (coordinate side) and a one-tube point at the
    # outgoing side
    rng = random.Random(29)
    target = random_sk2(rng)
    zz, th = target.punctures[0]
    base = std2(zz, th)
    step1 = sew(base, 1, ModuliPoint.one_tube(InfCoordData(),
                                              target.coords[0], W),
                degree_cap=3)
    step2 = sew(step1, 2, ModuliPoint.one_tube(InfCoordData(),
                                               target.coords[1], W),
                degree_cap=3)
    full = sew(ModuliPoint.one_tube(target.inf, CoordData.identity(W), W),
               1, step2, degree_cap=3)
    assert full == target


def test_sn_identity():
    rng = random.Random(11)
    q = random_sk2(rng)
    assert sn_act((1, 2), q, cap=3) == q


def test_sn_last_transposition_involution():
    rng = random.Random(13)
    q = random_sk2(rng)
    out = sn_act((2, 1), q, cap=3)
    back = sn_act((2, 1), out, cap=3)
    assert back == q


def random_sk3(rng):
    z1 = sc(rng.randrange(2, 4)) + rng.randrange(-1, 2) * z(1) * z(2)
    z2 = sc(rng.randrange(5, 7))
    t1 = rng.randrange(-1, 2) * z(3)
    t2 = rng.randrange(-1, 2) * z(7)
    return ModuliPoint(3, [(z1, t1), (z2, t2)], random_inf(rng),
                       [random_coord(rng) for _ in range(3)], W)


def perm_compose(s, t):
    # (s o t)(i) = s(t(i))
    return tuple(s[t[i] - 1] for i in range(len(t)))


def test_sn_group_law_on_three_tubes():
    import itertools
    rng = random.Random(17)
    q = random_sk3(rng).mark("g")
    trunc = ({"g": 1}, 2)
    kw = dict(cap=2, idxcap=7, trunc=trunc, finalize=False)
    perms = list(itertools.permutations((1, 2, 3)))
    for s in perms:
        for t in perms:
            lhs = sn_act(perm_compose(s, t), q, **kw)
            rhs = sn_act(s, sn_act(t, q, **kw), **kw)
            assert lhs == rhs, (s, t)


def test_theta_zero_data_trivial():
    zz = sc(3)
    th = z(1)
    assert theta1(GE.one(W), {}, {}, (zz, th), order=3) == {}
    assert theta2({}, {}, (zz, th), order=3) == {}


def test_theta1_matches_sewn_coordinate():
    zz = sc(2) + z(1) * z(2)
    th = z(3)
    a = sc(1) + z(4) * z(5)
    A = {1: sc(2)}
    M = {1: z(6)}
    q1 = ModuliPoint.one_tube(InfCoordData(), CoordData(a, A, M), W)
    got = sew(q1, 1, std2(zz, th), degree_cap=3, idxcap=8)
    # puncture lands at the preimage of (zz, th) under the coordinate map
    d = CoordData(a, A, M)
    trunc = ({"g": 1}, 3)
    dm = CoordData(a, {j: GE.evar("g", 1, W) * v for j, v in A.items()},
                   {r: GE.evar("g", 1, W) * v for r, v in M.items()})
    H = e_hat(dm, trunc=trunc)
    K = H.inverse_at_zero(order=9, trunc=trunc)
    K = SuperMap(K.ev.clone(nmax=None), K.od.clone(nmax=None))
    pz, pt = K.eval_at(zz, th, trunc=trunc)
    one = GE.one(W)
    pz, pt = pz.subs({"g": one}), pt.subs({"g": one})
    assert got.punctures[0] == (pz, pt)
    # the new coordinate carries the theta-1 data up to the scale bridge:
    # the table is read in the frame rescaled by the absorbed datum's scale,
    # so entry j is rescaled by asqrt^(2j) (and the leading entry by asqrt)
    td = theta1(a, A, M, (zz, th), order=3, idxcap=8, as_data=True)
    c0 = got.coords[0]
    assert c0.asqrt == a * td.asqrt
    assert c0.A == {j: (a ** (2 * j)) * v for j, v in td.A.items()}
    assert c0.M == {r2: (a ** r2) * v for r2, v in td.M.items()}
    # the scale entry of the logged table exponentiates back to the datum
    table = theta1(a, A, M, (zz, th), order=3, idxcap=8, finalize=False)
    back = ge_exp(table.get(0, GE.zero(W)), ({"u": 1}, 3))
    assert back.subs({"u": GE.one(W)}) == td.asqrt
    # the 0-pinned coordinate is untouched
    assert got.coords[1] == d
    assert got.inf == InfCoordData()


def test_theta2_matches_sewn_coordinate():
    zz = sc(3) + z(1) * z(2)
    th = z(3)
    B0 = {1: sc(1), 2: sc(-1)}
    N0 = {1: z(4)}
    b1 = sc(2)
    q2 = ModuliPoint.one_tube(InfCoordData(B0, N0), CoordData(b1), W)
    got = sew(std2(zz, th), 2, q2, degree_cap=3, idxcap=8)
    td = theta2(B0, N0, (zz, th), order=3, idxcap=8, as_data=True)
    assert got.coords[0] == td
    assert got.inf == InfCoordData(B0, N0)
    assert got.coords[1] == CoordData(b1)
    # the moved puncture is the preimage of (zz, th) under the negative-side
    # exponential map
    trunc = ({"g": 1}, 3)
    g = GE.evar("g", 1, W)
    hd = inf_exp_map({j: g * v for j, v in B0.items()},
                     {r: g * v for r, v in N0.items()}, trunc, width=W)
    hdi = hd.inverse_graded(trunc)
    xz, xt = hdi.eval_at(zz, th, trunc=trunc)
    one = GE.one(W)
    assert got.punctures[0] == (xz.subs({"g": one}), xt.subs({"g": one}))


def test_tangent_functional_two_routes():
    zz = GE.evar("zz", 1, W)
    th = GE.ovar(("tq", 0), W)
    got = tangent_functional(zz, th, cap=3)
    want = tangent_functional_closed_form(zz, th, jcap=2)
    for key, val in want.items():
        assert got.get(key) == val, (key, got.get(key), val)


def test_moduli_json_round_trip():
    rng = random.Random(23)
    q = random_sk2(rng)
    data = q.to_json()
    back = ModuliPoint.from_json(data, W)
    assert back == q
