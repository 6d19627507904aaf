"""Moduli points (superspheres with tubes, encoded as punctures plus local
coordinate data), the symmetric-group action, the canonical sewing solution
and its central-charge series, and the two families of sewn-coordinate data.

Truncation model: all coordinate-data entries (the A_j, M_{j-1/2} of every
local coordinate and the infinity data) are graded by bookkeeping variables;
every series computed here is a finite Laurent polynomial once the total
data degree is capped, except for expansions of powers of (w + invertible)
which carry an explicit exactness window in the series variable.
"""

from fractions import Fraction

from .scalars import GQ
from .grassmann import GrassmannElement as GE, ge_exp, ge_log
from .nscoord import (CoordData, InfCoordData, e_hat, e_hat_inv, e_tilde,
                      inf_exp_map)
from .series import (PHI, XVAR, SuperMap, SuperSeries, WindowError,
                     exp_ns_terms)


class SewError(ValueError):
    pass


class ModuliPoint:
    """A supersphere with 1 outgoing and n incoming tubes.

    punctures: list of (z, theta) pairs for punctures 1..n-1 (puncture n is
    pinned at 0, puncture 0 at infinity); inf: data of the coordinate at
    infinity; coords: local coordinate data at punctures 1..n.  For n = 0
    only the infinity data remains and its (A_1, M_{1/2}) entries vanish.
    """

    __slots__ = ("n", "punctures", "inf", "coords", "width")

    def __init__(self, n, punctures, inf, coords, width=0, validate=True):
        self.n = n
        self.punctures = list(punctures)
        self.inf = inf
        self.coords = list(coords)
        self.width = width
        if validate:
            self.validate()

    def validate(self):
        if self.n < 0 or len(self.punctures) != max(self.n - 1, 0) or \
                len(self.coords) != self.n:
            raise ValueError("inconsistent puncture/coordinate counts")
        bodies = []
        for (z, th) in self.punctures:
            b = z.body()
            if b:
                bodies.append(b)
            else:
                # symbolic punctures are allowed when formally invertible
                try:
                    z.inverse()
                except Exception:
                    raise ValueError("puncture is not invertible")
        if len({(b.re, b.im) for b in bodies}) != len(bodies):
            raise ValueError("puncture bodies must be pairwise distinct")
        if self.n == 0:
            if self.inf.A.get(1) or self.inf.M.get(1):
                raise ValueError("one-tube data requires vanishing first "
                                 "infinity entries")

    @classmethod
    def unit(cls, width=0):
        """The sewing unit: one incoming tube, standard coordinates."""
        return cls(1, [], InfCoordData(), [CoordData.identity(width)], width)

    @classmethod
    def standard2(cls, z, theta, width=None):
        """Two incoming tubes at (z, theta) and 0, standard coordinates."""
        w = width if width is not None else z.width
        return cls(2, [(z, theta)], InfCoordData(),
                   [CoordData.identity(w), CoordData.identity(w)], w)

    @classmethod
    def one_tube(cls, inf, coord, width=0):
        return cls(1, [], inf, [coord], width)

    def puncture(self, i):
        """The i-th positively oriented puncture (1-based)."""
        if i == self.n:
            return (GE.zero(self.width), GE.zero(self.width))
        return self.punctures[i - 1]

    def mark(self, name):
        return ModuliPoint(self.n, self.punctures,
                           self.inf.scale_marker(name, self.width),
                           [CoordData(c.asqrt,
                                      {j: GE.evar(name, 1, self.width) * v
                                       for j, v in c.A.items()},
                                      {r2: GE.evar(name, 1, self.width) * v
                                       for r2, v in c.M.items()})
                            for c in self.coords],
                           self.width, validate=False)

    def subs(self, mapping, inverses=None, trunc=None):
        return ModuliPoint(
            self.n,
            [(z.subs(mapping, inverses, trunc), t.subs(mapping, inverses, trunc))
             for (z, t) in self.punctures],
            self.inf.subs(mapping, inverses, trunc),
            [c.subs(mapping, inverses, trunc) for c in self.coords],
            self.width, validate=False)

    def __eq__(self, other):
        if isinstance(other, ModuliPoint):
            return (self.n == other.n and self.punctures == other.punctures
                    and self.inf == other.inf and self.coords == other.coords)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return ("ModuliPoint(n=%d, punctures=%r, inf=%r, coords=%r)"
                % (self.n, self.punctures, self.inf, self.coords))

    def to_json(self):
        return {"n": self.n,
                "punctures": [[z.to_json(), t.to_json()]
                              for (z, t) in self.punctures],
                "inf": self.inf.to_json(),
                "coords": [c.to_json() for c in self.coords]}

    @classmethod
    def from_json(cls, data, width):
        return cls(int(data["n"]),
                   [(GE.from_json(z, width), GE.from_json(t, width))
                    for z, t in data.get("punctures", [])],
                   InfCoordData.from_json(data.get("inf", {}), width),
                   [CoordData.from_json(c, width)
                    for c in data.get("coords", [])],
                   width)


def _max_index(*datasets):
    out = 1
    for A, M in datasets:
        for j in A:
            out = max(out, j)
        for r2 in M:
            out = max(out, (r2 + 1) // 2)
    return out


def _neg_terms(A, M, sign):
    terms = [(-2 * j, sign * v) for j, v in A.items()]
    terms += [(-r2, sign * v) for r2, v in M.items()]
    return terms


def psi_to_json(psi):
    return {str(j2): v.to_json() for j2, v in sorted(psi.items())}


def solve_psi(asqrt, A, M, B, N, degree_cap, mark=True, trunc=None,
              width=None, finalize=True):
    """The canonical factorization coefficients of the sewing uniformizer.

    Returns {doubled index j2: coefficient}; the table satisfies the
    exponential-switching identity: moving the middle dilation through the
    raising exponential regroups the product into raising * lowering *
    dilation factors with these coefficients, uniquely once the leading
    linear terms are pinned.

    degree_cap bounds the total degree in the (A, M) entries times the
    (B, N) entries; with mark=True the two sides are tagged by bookkeeping
    variables "u" and "v" (substituted away again unless finalize=False).
    """
    if degree_cap < 1:
        raise ValueError("degree cap must be at least 1")
    w = width
    if w is None:
        w = max([asqrt.width] + [x.width for x in A.values()]
                + [x.width for x in M.values()]
                + [x.width for x in B.values()]
                + [x.width for x in N.values()])
    if mark:
        u = GE.evar("u", 1, w)
        v = GE.evar("v", 1, w)
        A = {j: u * x for j, x in A.items()}
        M = {r2: u * x for r2, x in M.items()}
        B = {j: v * x for j, x in B.items()}
        N = {r2: v * x for r2, x in N.items()}
        trunc = ({"u": 1, "v": 1}, degree_cap)
    elif trunc is None:
        raise ValueError("unmarked solve needs an explicit truncation")
    jmax = degree_cap * _max_index((A, M), (B, N))
    ai = asqrt.inverse(trunc)
    a2i = ai * ai

    ident = SuperMap.identity(w)
    h_a = e_tilde(A, M, trunc=trunc, width=w)
    h_alpha = SuperMap.dilation(asqrt)
    terms_b = _neg_terms(B, N, -1)
    h_b = SuperMap(exp_ns_terms(ident.ev, terms_b, trunc=trunc),
                   exp_ns_terms(ident.od, terms_b, trunc=trunc))
    lhs = h_a.then(h_alpha).then(h_b, trunc=trunc)

    psi = {}

    def rhs_map():
        tminus = [(j2, c) for j2, c in psi.items() if j2 < 0 and c]
        tplus = [(j2, c) for j2, c in psi.items() if j2 > 0 and c]
        hm = SuperMap(exp_ns_terms(ident.ev, tminus, trunc=trunc),
                      exp_ns_terms(ident.od, tminus, trunc=trunc))
        hp = SuperMap(exp_ns_terms(ident.ev, tplus, trunc=trunc),
                      exp_ns_terms(ident.od, tplus, trunc=trunc))
        p0 = psi.get(0, GE.zero(w))
        e2 = ge_exp(-2 * p0, trunc)
        e1 = ge_exp(-p0, trunc)
        h0 = SuperMap(SuperSeries(e2 * GE.evar(XVAR, 1, w)),
                      SuperSeries(e1 * GE.ovar(PHI, w)))
        return hm.then(hp, trunc=trunc).then(h0, trunc=trunc) \
                 .then(h_alpha, trunc=trunc)

    for _d in range(1, degree_cap + 1):
        r = rhs_map()
        delta_ev = (lhs.ev - r.ev).clone()
        delta_ev = delta_ev.clone(el=delta_ev.el.truncate(*trunc))
        delta_od = (lhs.od - r.od).clone()
        delta_od = delta_od.clone(el=delta_od.el.truncate(*trunc))
        if not delta_ev.el and not delta_od.el:
            break
        for j in range(-jmax, jmax + 1):
            ce = delta_ev.f_coeff(j + 1)
            if ce:
                upd = -(a2i * ce)
                if j == 0:
                    upd = upd * GQ(Fraction(1, 2))
                psi[2 * j] = (psi.get(2 * j, GE.zero(w)) + upd) \
                    .truncate(*trunc)
            co = delta_od.f_coeff(j)
            if co:
                psi[2 * j - 1] = (psi.get(2 * j - 1, GE.zero(w)) - ai * co) \
                    .truncate(*trunc)
    r = rhs_map()
    for comp in ("ev", "od"):
        resid = (getattr(lhs, comp).el - getattr(r, comp).el).truncate(*trunc)
        if resid:
            raise SewError("sewing factorization did not close: %r" % resid)
    psi = {j2: c for j2, c in psi.items() if c}
    if mark and finalize:
        one = GE.one(w)
        psi = {j2: c.subs({"u": one, "v": one}) for j2, c in psi.items()}
        psi = {j2: c for j2, c in psi.items() if c}
    return psi


def solve_gamma(asqrt, A, M, B, N, degree_cap, h=0, width=None,
                finalize=True):
    """The central-charge series of the sewing factorization.

    Extracted on a Verma-type module with symbolic central charge: the
    highest-weight component of the left side equals exp(Gamma*c) times that
    of the regrouped right side; Gamma is the c-linear part of its logarithm
    (checked to be exactly c-linear).
    """
    from .nsmod import VermaModule, exp_act

    if degree_cap < 2:
        raise ValueError("degree cap must be at least 2 for the central term")
    w = width
    if w is None:
        w = max([asqrt.width] + [x.width for x in A.values()]
                + [x.width for x in M.values()]
                + [x.width for x in B.values()]
                + [x.width for x in N.values()])
    u = GE.evar("u", 1, w)
    v = GE.evar("v", 1, w)
    Au = {j: u * x for j, x in A.items()}
    Mu = {r2: u * x for r2, x in M.items()}
    Bv = {j: v * x for j, x in B.items()}
    Nv = {r2: v * x for r2, x in N.items()}
    trunc = ({"u": 1, "v": 1}, degree_cap)
    psi = solve_psi(asqrt, Au, Mu, Bv, Nv, degree_cap, mark=False,
                    trunc=trunc, width=w, finalize=False)
    ai = asqrt.inverse(trunc)

    mod = VermaModule(h=h, width=w)
    vh = mod.basis_vector(mod.vacuum_key())

    lhs = exp_act(vh, _neg_terms(Bv, Nv, -1), trunc=trunc)
    lhs = lhs.apply_dilation(asqrt, -2, base_inv=ai, trunc=trunc)
    lhs = exp_act(lhs, [(2 * j, -x) for j, x in Au.items()]
                  + [(r2, -x) for r2, x in Mu.items()], trunc=trunc)

    rhs = vh.apply_dilation(asqrt, -2, base_inv=ai, trunc=trunc)
    p0 = psi.get(0, GE.zero(w))
    rhs = GradedScale(rhs, p0, trunc)
    rhs = exp_act(rhs, [(j2, c) for j2, c in psi.items() if j2 > 0],
                  trunc=trunc)
    rhs = exp_act(rhs, [(j2, c) for j2, c in psi.items() if j2 < 0],
                  trunc=trunc)

    vac = mod.vacuum_key()
    w0 = lhs.t.get(vac, GE.zero(w))
    u0 = rhs.t.get(vac, GE.zero(w))
    ratio = w0 * u0.inverse(trunc)
    ratio = ratio.truncate(*trunc)
    gc = ge_log(ratio, trunc)
    for (evens, _odds) in gc.t:
        if dict(evens).get("c", 0) != 1:
            raise SewError("central-charge series is not c-linear: %r" % gc)
    gamma = gc.diff_even("c")
    if finalize:
        one = GE.one(w)
        gamma = gamma.subs({"u": one, "v": one})
    return gamma


def GradedScale(vec, p0, trunc):
    """exp(2 * p0 * L(0)) on a graded vector: weight-k piece times
    exp(2 k p0)."""
    out = {}
    for key, coeff in vec.t.items():
        k2 = vec.module.weight2(key)
        out[key] = ge_exp(p0 * k2, trunc) * coeff
    return vec.module.vector(out)


# -- sewn-coordinate series --------------------------------------------------

def theta_tables_json(table):
    return {str(j2): v.to_json() for j2, v in sorted(table.items())}


def theta1(asqrt, A, M, point, order, idxcap=None, width=None,
           finalize=True, as_data=False):
    """Coordinate data of the sewn local coordinate when a generic
    one-tube datum absorbs a standard puncture at ``point``.

    Returns {0: log-scale entry, 2j: even entries, 2j-1: odd entries},
    exact through total (A, M)-degree <= order.  With as_data=True the raw
    coordinate datum is returned instead (scale entry not logged), which
    stays polynomial after the grading marker is substituted away.
    """
    w = width
    if w is None:
        w = max([asqrt.width] + [x.width for x in A.values()]
                + [x.width for x in M.values()]
                + [point[0].width, point[1].width])
    u = GE.evar("u", 1, w)
    Au = {j: u * x for j, x in A.items()}
    Mu = {r2: u * x for r2, x in M.items()}
    trunc = ({"u": 1}, order)
    if idxcap is None:
        idxcap = order * _max_index((Au, Mu)) + 1
    z, th = point
    d = CoordData(asqrt, Au, Mu)
    korder = 1 + order * _max_index((Au, Mu)) + 2
    h1 = e_hat(d, trunc=trunc)
    k = h1.inverse_at_zero(order=korder, trunc=trunc)
    if (k.ev.support_max() or 0) > korder - 1 or \
            (k.od.support_max() or 0) > korder - 1:
        raise SewError("inverse window too small for the requested order")
    k = SuperMap(k.ev.clone(nmax=None), k.od.clone(nmax=None))
    ai = asqrt.inverse(trunc)
    zt, tht = k.eval_at(z, th, trunc=trunc)
    wcap = idxcap + 2
    chain = SuperMap.dilation(ai, evar=h1.evar, ovar=h1.ovar)
    chain = chain.then(SuperMap.shift_inverse(zt, tht), wcap=wcap, trunc=trunc)
    chain = chain.then(h1, wcap=wcap, trunc=trunc)
    chain = chain.then(SuperMap.shift(z, th), wcap=wcap, trunc=trunc)
    td = e_hat_inv(chain, order=idxcap, trunc=trunc)
    return _theta_output(td, trunc, w, finalize, as_data, "u")


def _theta_output(td, trunc, w, finalize, as_data, marker):
    if as_data:
        if finalize:
            one = GE.one(w)
            td = td.subs({marker: one})
        return td
    table = {0: ge_log(td.asqrt, trunc)}
    for j, val in td.A.items():
        table[2 * j] = val
    for r2, val in td.M.items():
        table[r2] = val
    table = {j2: c for j2, c in table.items() if c}
    if finalize:
        one = GE.one(w)
        table = {j2: c.subs({marker: one}) for j2, c in table.items()}
        table = {j2: c for j2, c in table.items() if c}
    return table


def theta2(B, N, point, order, idxcap=None, width=None, finalize=True,
           tmark=None, as_data=False):
    """Coordinate data of the sewn local coordinate when an infinity datum
    is absorbed at the puncture ``point`` of a standard two-tube sphere.

    tmark: optional even variable name grading entry j by t^(2j) and
    the odd entry by t^(2j-1) (used by the graded module identities).
    """
    w = width
    if w is None:
        w = max([x.width for x in B.values()]
                + [x.width for x in N.values()]
                + [point[0].width, point[1].width] + [0])
    v = GE.evar("v", 1, w)

    def tfac(e2):
        if tmark is None:
            return GE.one(w)
        return GE.evar(tmark, e2, w)

    Bv = {j: v * tfac(2 * j) * x for j, x in B.items()}
    Nv = {r2: v * tfac(r2) * x for r2, x in N.items()}
    trunc = ({"v": 1}, order)
    if idxcap is None:
        idxcap = order * _max_index((Bv, Nv)) + 1
    z, th = point
    hd = inf_exp_map(Bv, Nv, trunc, width=w)
    hdi = hd.inverse_graded(trunc)
    zi = z.inverse()
    zt, tht = hdi.eval_at(z, th, zinv=zi, trunc=trunc)
    wcap = idxcap + 2
    chain = SuperMap.shift_inverse(zt, tht, width=w)
    chain = chain.then(hd, wcap=wcap, trunc=trunc)
    chain = chain.then(SuperMap.shift(z, th), wcap=wcap, trunc=trunc)
    td = e_hat_inv(chain, order=idxcap, trunc=trunc)
    return _theta_output(td, trunc, w, finalize, as_data, "v")


# -- the sewing operation -----------------------------------------------------

def _flip_series(s, width):
    """Substitute x -> 1/x (exact monomial swap)."""
    t = {}
    for (evens, odds), val in s.el.t.items():
        d = dict(evens)
        e = d.get(s.evar, 0)
        if e:
            d[s.evar] = -e
        t[(tuple(sorted(d.items())), odds)] = val
    return SuperSeries(GE(width, t), None, s.evar, s.ovar)


def _flip_map(width):
    """(x, phi) -> (1/x, phi): pure variable flip, not the superconformal
    inversion."""
    return SuperMap(SuperSeries(GE.evar(XVAR, -1, width)),
                    SuperSeries(GE.ovar(PHI, width)))


def e_inf_inv_flipped(Hf, idxcap, trunc, check=True):
    """Read infinity data from a composite expressed in the reciprocal
    variable (entry j sits at y^(j-1))."""
    Hf.ev.require_window(idxcap - 1)
    Hf.od.require_window(idxcap - 1)
    A0, M0 = {}, {}
    w = Hf.width
    floor = -(idxcap + 2)
    for j in range(1, idxcap + 1):
        cur = inf_exp_map(A0, M0, trunc, width=w, xfloor=floor)
        cur_ev = _flip_series(cur.ev, w)
        cur_od = _flip_series(cur.od, w)
        res_e = Hf.ev.f_coeff(j - 1) - cur_ev.f_coeff(j - 1)
        res_o = Hf.od.f_coeff(j - 1) - cur_od.f_coeff(j - 1)
        if trunc is not None:
            res_e = res_e.truncate(*trunc)
            res_o = res_o.truncate(*trunc)
        if res_e:
            A0[j] = -res_e
        if res_o:
            M0[2 * j - 1] = -res_o
    if check:
        cur = inf_exp_map(A0, M0, trunc, width=w, xfloor=floor)
        for j in range(1, idxcap + 1):
            de = _flip_series(cur.ev, w).f_coeff(j - 1) - Hf.ev.f_coeff(j - 1)
            do = _flip_series(cur.od, w).f_coeff(j - 1) - Hf.od.f_coeff(j - 1)
            if trunc is not None:
                de = de.truncate(*trunc)
                do = do.truncate(*trunc)
            if de or do:
                raise SewError("composite is not an infinity coordinate at "
                               "entry %d" % j)
    return InfCoordData(A0, M0)


def sew(Q1, i, Q2, degree_cap, idxcap=None, trunc=None, finalize=True):
    """Glue the 0-th tube of Q2 into the i-th tube of Q1.

    With trunc=None the coordinate data of both points is tagged by a
    bookkeeping variable "g" and the result is exact through total data
    degree <= degree_cap (the tag is substituted away unless
    finalize=False).  Passing an explicit trunc continues an existing
    grading, e.g. for associativity comparisons across iterated sewings.
    """
    if not 1 <= i <= Q1.n:
        raise SewError("no puncture %d to sew into" % i)
    w = max(Q1.width, Q2.width)
    if trunc is None:
        Q1 = Q1.mark("g")
        Q2 = Q2.mark("g")
        trunc = ({"g": 1}, degree_cap)

    m, n = Q1.n, Q2.n
    d_i = Q1.coords[i - 1]
    B0 = Q2.inf
    jall = _max_index(*[(c.A, c.M) for c in Q1.coords + Q2.coords]
                      + [(Q1.inf.A, Q1.inf.M), (Q2.inf.A, Q2.inf.M)])
    if idxcap is None:
        idxcap = degree_cap * jall + jall + 1
    wcap = idxcap + 3

    psi = solve_psi(d_i.asqrt, d_i.A, d_i.M, B0.A, B0.M, degree_cap,
                    mark=False, trunc=trunc, width=w, finalize=False)
    ai = d_i.asqrt.inverse(trunc)
    ident = SuperMap.identity(w)

    tminus = [(j2, c) for j2, c in psi.items() if j2 < 0]
    fbar1 = SuperMap(exp_ns_terms(ident.ev, tminus, trunc=trunc),
                     exp_ns_terms(ident.od, tminus, trunc=trunc))
    p0 = psi.get(0, GE.zero(w))
    psiplus_A = {j2 // 2: c for j2, c in psi.items() if j2 > 0 and j2 % 2 == 0}
    psiplus_M = {j2: c for j2, c in psi.items() if j2 > 0 and j2 % 2 == 1}
    scale0 = SuperMap(SuperSeries(ge_exp(2 * p0, trunc) * GE.evar(XVAR, 1, w)),
                      SuperSeries(ge_exp(p0, trunc) * GE.ovar(PHI, w)))
    fbar2 = scale0.then(SuperMap.dilation(ai)).then(
        e_tilde(psiplus_A, psiplus_M, trunc=trunc, width=w), trunc=trunc)

    zi, thi = Q1.puncture(i)
    fbar1_inv = fbar1.inverse_graded(trunc)
    f1_inv = fbar1_inv.then(SuperMap.shift_inverse(zi, thi))

    def f1_eval(z, th):
        sz = z - zi - th * thi
        st = th - thi
        zv, tv = fbar1.eval_at(sz, st, trunc=trunc)
        return zv, tv

    etilde2_inv = e_tilde(psiplus_A, psiplus_M, trunc=trunc,
                          width=w).inverse_graded(trunc)
    scale0_inv = SuperMap(
        SuperSeries(ge_exp(-2 * p0, trunc) * GE.evar(XVAR, 1, w)),
        SuperSeries(ge_exp(-p0, trunc) * GE.ovar(PHI, w)))
    f2_inv = etilde2_inv.then(SuperMap.dilation(d_i.asqrt)) \
                        .then(scale0_inv, trunc=trunc)

    tilde_plus = e_tilde(psiplus_A, psiplus_M, trunc=trunc, width=w)

    def f2_eval(z, th):
        # F2 = e_tilde(psi+) after dilation(ai) after the scale-by-exp map
        z1 = ge_exp(2 * p0, trunc) * z
        t1 = ge_exp(p0, trunc) * th
        return tilde_plus.eval_at(ai * ai * z1, ai * t1, trunc=trunc)

    def coord_at(coord, center, f_inv, p):
        """Data of coord-composite shifted to vanish at its new puncture."""
        hmap = e_hat(coord, trunc=trunc)
        wc = wcap
        for _attempt in range(5):
            chain = SuperMap.identity(w) if p is None else \
                SuperMap.shift_inverse(p[0], p[1], width=w)
            chain = chain.then(f_inv, wcap=wc, trunc=trunc)
            if center is not None:
                chain = chain.then(SuperMap.shift(center[0], center[1],
                                                  width=w),
                                   wcap=wc, trunc=trunc)
            chain = chain.then(hmap, wcap=wc, trunc=trunc)
            try:
                return e_hat_inv(chain, order=idxcap, trunc=trunc)
            except WindowError:
                wc = 2 * wc + 8
        raise SewError("coordinate window did not stabilize")

    def inf_at(infdata, f_inv, p):
        hd = inf_exp_map(infdata.A, infdata.M, trunc, width=w,
                         xfloor=-(idxcap + 2))
        wc = wcap
        for _attempt in range(5):
            chain = _flip_map(w)
            if p is not None:
                chain = chain.then(SuperMap.shift_inverse(p[0], p[1],
                                                          width=w),
                                   wcap=wc, trunc=trunc)
            chain = chain.then(f_inv, wcap=wc, trunc=trunc)
            chain = chain.then(hd, wcap=wc, trunc=trunc)
            try:
                return e_inf_inv_flipped(chain, idxcap, trunc)
            except WindowError:
                wc = 2 * wc + 8
        raise SewError("infinity window did not stabilize")

    def finalize_point(Qout):
        if finalize:
            one = GE.one(w)
            Qout = Qout.subs({"g": one})
            Qout.validate()
        return Qout

    if i == m and n > 0:
        new_punct = []
        new_coords = []
        for k in range(1, m):
            zk, tk = Q1.punctures[k - 1]
            pz, pt = f1_eval(zk, tk)
            new_punct.append((pz, pt))
            new_coords.append(coord_at(Q1.coords[k - 1], (zk, tk), f1_inv,
                                       (pz, pt)))
        for l in range(1, n):
            zl, tl = Q2.punctures[l - 1]
            qz, qt = f2_eval(zl, tl)
            new_punct.append((qz, qt))
            new_coords.append(coord_at(Q2.coords[l - 1], (zl, tl), f2_inv,
                                       (qz, qt)))
        new_coords.append(coord_at(Q2.coords[n - 1], None, f2_inv, None))
        new_inf = inf_at(Q1.inf, f1_inv, None)
        out = ModuliPoint(m + n - 1, new_punct, new_inf, new_coords, w,
                          validate=False)
        return finalize_point(out)

    if i == m and n == 0:
        if m == 1:
            ap, mp = _solve_center_normalization(Q1.inf, f1_inv, wcap,
                                                 idxcap, trunc, w)
            new_inf = inf_at(Q1.inf, f1_inv, (ap, mp))
            out = ModuliPoint(0, [], new_inf, [], w, validate=False)
            return finalize_point(out)
        zl, tl = Q1.punctures[m - 2]
        p = f1_eval(zl, tl)
        new_punct = []
        new_coords = []
        for k in range(1, m - 1):
            zk, tk = Q1.punctures[k - 1]
            pz, pt = f1_eval(zk, tk)
            pz = pz - p[0] - pt * p[1]
            pt = pt - p[1]
            new_punct.append((pz, pt))
            new_coords.append(coord_at(Q1.coords[k - 1], (zk, tk), f1_inv,
                                       p_then(p, (pz, pt))))
        new_coords.append(coord_at(Q1.coords[m - 2], (zl, tl), f1_inv, p))
        new_inf = inf_at(Q1.inf, f1_inv, p)
        out = ModuliPoint(m - 1, new_punct, new_inf, new_coords, w,
                          validate=False)
        return finalize_point(out)

    # i < m
    p = f1_eval(GE.zero(w), GE.zero(w))
    new_punct = []
    new_coords = []
    for k in range(1, i):
        zk, tk = Q1.punctures[k - 1]
        pz, pt = f1_eval(zk, tk)
        new_punct.append((_shift_pt(p, (pz, pt))))
        new_coords.append(coord_at(Q1.coords[k - 1], (zk, tk), f1_inv,
                                   p_then(p, new_punct[-1])))
    if n > 0:
        for l in range(1, n):
            zl, tl = Q2.punctures[l - 1]
            qz, qt = f2_eval(zl, tl)
            new_punct.append(_shift_pt(p, (qz, qt)))
            new_coords.append(coord_at(Q2.coords[l - 1], (zl, tl), f2_inv,
                                       p_then(p, new_punct[-1])))
        new_punct.append((-p[0], -p[1]))
        new_coords.append(coord_at(Q2.coords[n - 1], None, f2_inv,
                                   p_then(p, new_punct[-1])))
    for k in range(i + 1, m):
        zk, tk = Q1.punctures[k - 1]
        pz, pt = f1_eval(zk, tk)
        new_punct.append(_shift_pt(p, (pz, pt)))
        new_coords.append(coord_at(Q1.coords[k - 1], (zk, tk), f1_inv,
                                   p_then(p, new_punct[-1])))
    new_coords.append(coord_at(Q1.coords[m - 1], None, f1_inv, p))
    new_inf = inf_at(Q1.inf, f1_inv, p)
    out = ModuliPoint(m + n - 1, new_punct, new_inf, new_coords, w,
                      validate=False)
    return finalize_point(out)


def _shift_pt(p, q):
    """s_p applied to the point q."""
    return (q[0] - p[0] - q[1] * p[1], q[1] - p[1])


def p_then(p, target):
    """The shift center that sends the composite's zero to ``target``:
    the coordinate composite is (...) o s_p^{-1} shifted so it vanishes at
    s_p(q) = target, i.e. recentered by shifting with the target point."""
    return p if target is None else _compose_centers(p, target)


def _compose_centers(p, target):
    # s_target o s_p ... the coordinate chain uses s_p^{-1} then recenters
    # at the new puncture: overall shift center is p composed with target
    z = p[0] + target[0] + target[1] * p[1]
    t = p[1] + target[1]
    return (z, t)


def _solve_center_normalization(infdata, f1_inv, wcap, idxcap, trunc, w):
    """The unique recentering (a', m') killing the first infinity entries
    for a sewing that lands in the one-tube-less stratum."""
    ap = GE.zero(w)
    mp = GE.zero(w)
    hd0 = inf_exp_map(infdata.A, infdata.M, trunc, width=w,
                      xfloor=-(idxcap + 2))
    for _ in range(trunc[1] + 2):
        chain = _flip_map(w)
        chain = chain.then(SuperMap.shift_inverse(ap, mp, width=w),
                           wcap=wcap, trunc=trunc)
        chain = chain.then(f1_inv, wcap=wcap, trunc=trunc)
        chain = chain.then(hd0, wcap=wcap, trunc=trunc)
        got = e_inf_inv_flipped(chain, 1, trunc, check=False)
        a1 = got.A.get(1, GE.zero(w))
        m1 = got.M.get(1, GE.zero(w))
        if not a1 and not m1:
            return ap, mp
        ap = ap + a1
        mp = mp + m1
    raise SewError("center normalization did not converge")


# -- symmetric-group action ---------------------------------------------------

def sn_act(sigma, Q, cap, idxcap=None, trunc=None, finalize=True):
    """Left action of a permutation (tuple sigma with sigma[k] = image of
    k+1) on an n-tube point: relabeling of punctures 1..n-1 extended by the
    recentering transposition that swaps the last two punctures."""
    n = Q.n
    if len(sigma) != n:
        raise ValueError("permutation size must match the puncture count")
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError("not a permutation")
    marked = False
    if trunc is None:
        Q = Q.mark("g")
        trunc = ({"g": 1}, cap)
        marked = True
    # decompose sigma into adjacent transpositions: sorting the image
    # sequence by adjacent swaps writes sigma = t_p ... t_1 with t_1 the
    # first recorded swap, so the action applies them in recorded order
    ops = []
    work = list(sigma)
    while True:
        swapped = False
        for k in range(n - 1):
            if work[k] > work[k + 1]:
                work[k], work[k + 1] = work[k + 1], work[k]
                ops.append(k + 1)  # transposition (k+1, k+2)
                swapped = True
        if not swapped:
            break
    out = Q
    for k in ops:
        out = _transpose_adjacent(out, k, cap, idxcap, trunc)
    if finalize and marked:
        out = out.subs({"g": GE.one(out.width)})
        out.validate()
    return out


def _transpose_adjacent(Q, k, cap, idxcap, trunc):
    n = Q.n
    w = Q.width
    if k < n - 1:
        punct = list(Q.punctures)
        punct[k - 1], punct[k] = punct[k], punct[k - 1]
        coords = list(Q.coords)
        coords[k - 1], coords[k] = coords[k], coords[k - 1]
        return ModuliPoint(n, punct, Q.inf, coords, w, validate=False)
    # the last transposition (n-1, n): recenter at the old puncture n-1
    zc, tc = Q.punctures[n - 2]
    punct = []
    for j in range(0, n - 2):
        punct.append(_shift_pt((zc, tc), Q.punctures[j]))
    punct.append((-zc, -tc))
    coords = list(Q.coords)
    coords[n - 2], coords[n - 1] = coords[n - 1], coords[n - 2]
    if idxcap is None:
        jall = _max_index((Q.inf.A, Q.inf.M))
        idxcap = cap * jall + jall + 1
    wcap = idxcap + 3
    hd = inf_exp_map(Q.inf.A, Q.inf.M, trunc, width=w,
                     xfloor=-(idxcap + 2))
    chain = _flip_map(w)
    chain = chain.then(SuperMap.shift(-zc, -tc, width=w), wcap=wcap,
                       trunc=trunc)
    chain = chain.then(hd, wcap=wcap, trunc=trunc)
    new_inf = e_inf_inv_flipped(chain, idxcap, trunc)
    return ModuliPoint(n, punct, new_inf, coords, w, validate=False)


# -- tangent functional -------------------------------------------------------

def tangent_functional(z, theta, cap=3):
    """Coefficients of the odd tangent direction cut out by an infinitesimal
    third-entry odd deformation sewn into a standard two-tube sphere at
    (z, theta).

    Returns {("M", k, 2j-1): coeff, ("A", k, j): coeff, ("asqrt", 1): coeff}
    for k in {0, 1} (infinity side, puncture side), computed by the
    epsilon-derivative of the sewn data.
    """
    w = z.width
    eps = GE.ovar(("ep", 0), w)
    Q1 = ModuliPoint.standard2(z, theta, width=w)
    Q2 = ModuliPoint(0, [], InfCoordData({}, {3: eps}), [], w)
    trunc = ({"g": 1, ("ep", 0): 1}, cap + 1)
    out = sew(Q1.mark("g"), 1, Q2.mark("g"), cap, trunc=trunc,
              finalize=False)
    one = GE.one(w)
    out = out.subs({"g": one})
    table = {}

    def deps(x):
        return x.diff_odd(("ep", 0))

    c = out.coords[0]
    v = deps(c.asqrt)
    if v:
        table[("asqrt", 1)] = v
    for j, val in c.A.items():
        v = deps(val)
        if v:
            table[("A", 1, j)] = v
    for r2, val in c.M.items():
        v = deps(val)
        if v:
            table[("M", 1, r2)] = v
    for j, val in out.inf.A.items():
        v = deps(val)
        if v:
            table[("A", 0, j)] = v
    for r2, val in out.inf.M.items():
        v = deps(val)
        if v:
            table[("M", 0, r2)] = v
    return table


def tangent_functional_closed_form(z, theta, jcap=3):
    """The same functional read off from the closed-form expansion:
    z^(-(2k-1)j-2+k) on the odd entries and 2*theta*z^(-(2k-1)j-2) on the
    even ones, with (1/2) * 2*theta*z^(-2) on the scale entry."""
    w = z.width
    zi = z.inverse()
    table = {}
    for k in (0, 1):
        for j in range(1, jcap + 1):
            e = -(2 * k - 1) * j - 2 + k
            table[("M", k, 2 * j - 1)] = zpow(zi, z, e)
            ea = -(2 * k - 1) * j - 2
            val = 2 * theta * zpow(zi, z, ea)
            if val:
                table[("A", k, j)] = val
    val = theta * zpow(zi, z, -2)
    if val:
        table[("asqrt", 1)] = val
    return table


def zpow(zi, z, e):
    return z ** e if e >= 0 else zi ** (-e)
