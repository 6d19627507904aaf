"""The N=1 Neveu-Schwarz Lie superalgebra, its enveloping algebra extended
by grade projections, and truncated positive-energy modules.

Generators are encoded by a doubled index: ``idx2`` even means L(idx2/2),
``idx2`` odd means G(idx2/2).  Brackets:

    [L_m, L_n]         = (m-n) L_{m+n} + (1/12)(m^3-m) delta_{m+n,0} d
    [G_{m+1/2}, L_n]   = (m - (n-1)/2) G_{m+n+1/2}
    [G_r, G_s]         = 2 L_{r+s} + (1/3)(r^2 - 1/4) delta_{r+s,0} d

The central element acts as the polynomial variable ``c`` on the Verma-type
module (exact polynomials in c) and as the number 3/2 on the free
boson-fermion Fock module.  Module vectors are sparse tables over basis
keys; coefficients live in the Grassmann algebra extended by central
variables, so Grassmann-valued coefficients ("envelope" action) work with
the sign rule (a@P)(b@w) = (-1)^(parity P * parity b) ab @ P(w).
"""

from fractions import Fraction

from .scalars import GQ
from .grassmann import GrassmannElement as GE


def ns_bracket_gens(i2, j2):
    """[gen(i2), gen(j2)] as a list of (symbol, GQ) with symbols
    ('L', n), ('G', r2) or ('d',)."""
    out = []
    if i2 % 2 == 0 and j2 % 2 == 0:
        m, n = i2 // 2, j2 // 2
        if m != n:
            out.append((("L", m + n), GQ(m - n)))
        if m + n == 0 and m != 0:
            out.append((("d",), GQ(Fraction(m ** 3 - m, 12))))
    elif i2 % 2 == 1 and j2 % 2 == 0:
        n = j2 // 2
        # [G_r, L_n] = (r - n/2) G_{r+n}
        coeff = GQ(Fraction(i2, 2) - Fraction(n, 2))
        if coeff:
            out.append((("G", i2 + 2 * n), coeff))
    elif i2 % 2 == 0 and j2 % 2 == 1:
        n = i2 // 2
        coeff = GQ(Fraction(n, 2) - Fraction(j2, 2))
        if coeff:
            out.append((("G", j2 + 2 * n), coeff))
    else:
        out.append((("L", (i2 + j2) // 2), GQ(2)))
        if i2 + j2 == 0:
            r = Fraction(i2, 2)
            out.append((("d",), GQ(Fraction(1, 3) * (r * r - Fraction(1, 4)))))
    return [(s, v) for s, v in out if v]


def sym_idx2(sym):
    return 2 * sym[1] if sym[0] == "L" else sym[1]


def sym_parity(sym):
    return 0 if sym[0] in ("L", "d") else 1


def level_of(key):
    ls, gs = key
    return 2 * sum(ls) + sum(gs)  # doubled level


def enumerate_basis(level2_cap):
    """All (Ls, Gs) keys with doubled level <= cap, Ls weakly descending
    positive ints, Gs strictly descending positive doubled half-ints."""
    def parts(rem, maxpart):
        yield ()
        for p in range(min(rem, maxpart), 0, -1):
            for tail in parts(rem - p, p):
                yield (p,) + tail

    def odd_parts(rem, maxpart):
        yield ()
        p = maxpart if maxpart % 2 == 1 else maxpart - 1
        while p >= 1:
            if p <= rem:
                for tail in odd_parts(rem - p, p - 2):
                    yield (p,) + tail
            p -= 2

    out = []
    for lv2 in range(0, level2_cap + 1):
        for glev in range(0, lv2 + 1):
            rem = lv2 - glev
            if rem % 2:
                continue
            for gs in odd_parts(glev, glev if glev % 2 == 1 else glev - 1):
                if sum(gs) != glev:
                    continue
                for ls in parts(rem // 2, rem // 2 if rem else 0):
                    if 2 * sum(ls) == rem:
                        out.append((ls, gs))
    seen = set()
    uniq = []
    for k in out:
        if k not in seen:
            seen.add(k)
            uniq.append(k)
    return uniq


class _ModuleBase:
    def vector(self, table=None):
        return GradedVector(self, dict(table or {}))

    def basis_vector(self, key, coeff=1):
        co = coeff if isinstance(coeff, GE) else GE.scalar(coeff, self.width)
        return GradedVector(self, {key: co})


class VermaModule(_ModuleBase):
    """Verma-type module with highest weight h and symbolic central charge.

    Basis keys (Ls, Gs): L(-n1)...L(-nk) G(-r1)...G(-rl) v_h with the n's
    weakly and the (doubled) r's strictly descending.  Coefficients are
    polynomials in the central variable ``c``.
    """

    def __init__(self, h=0, width=0):
        self.h = Fraction(h)
        self.width = width
        self.central = GE.evar("c", 1, width)
        self._memo = {}

    def vacuum_key(self):
        return ((), ())

    def weight2(self, key):
        return level_of(key) + 2 * self.h

    def gen_apply(self, i2, key):
        memo = self._memo
        got = memo.get((i2, key))
        if got is not None:
            return got
        ls, gs = key
        out = {}

        def add(k, v):
            cur = out.get(k)
            v = cur + v if cur is not None else v
            if v:
                out[k] = v
            else:
                out.pop(k, None)

        if i2 % 2 == 0:
            n = i2 // 2
            if not ls and not gs:
                if n > 0:
                    pass
                elif n == 0:
                    if self.h:
                        add(key, GE.scalar(self.h, self.width))
                else:
                    add(((-n,), ()), GE.one(self.width))
            elif ls:
                m1 = ls[0]
                if n <= -m1:
                    add(((-n,) + ls, gs), GE.one(self.width))
                else:
                    tail = (ls[1:], gs)
                    for k2, v2 in self.gen_apply(i2, tail).items():
                        for k3, v3 in self.gen_apply(-2 * m1, k2).items():
                            add(k3, v3 * v2)
                    for sym, coeff in ns_bracket_gens(i2, -2 * m1):
                        if sym[0] == "d":
                            add(tail, self.central * coeff)
                        else:
                            for k3, v3 in self.gen_apply(sym_idx2(sym),
                                                         tail).items():
                                add(k3, v3 * coeff)
            elif n < 0:
                # creation L(n) in front of a pure G-word is already PBW
                add(((-n,), gs), GE.one(self.width))
            else:
                r2 = gs[0]
                tail = ((), gs[1:])
                for k2, v2 in self.gen_apply(i2, tail).items():
                    for k3, v3 in self.gen_apply(-r2, k2).items():
                        add(k3, v3 * v2)
                for sym, coeff in ns_bracket_gens(i2, -r2):
                    if sym[0] == "d":
                        add(tail, self.central * coeff)
                    else:
                        for k3, v3 in self.gen_apply(sym_idx2(sym),
                                                     tail).items():
                            add(k3, v3 * coeff)
        else:
            if not ls and not gs:
                if i2 < 0:
                    add(((), (-i2,)), GE.one(self.width))
            elif ls:
                m1 = ls[0]
                tail = (ls[1:], gs)
                for k2, v2 in self.gen_apply(i2, tail).items():
                    for k3, v3 in self.gen_apply(-2 * m1, k2).items():
                        add(k3, v3 * v2)
                for sym, coeff in ns_bracket_gens(i2, -2 * m1):
                    for k3, v3 in self.gen_apply(sym_idx2(sym), tail).items():
                        add(k3, v3 * coeff)
            else:
                s2 = gs[0]
                if i2 < 0 and -i2 > s2:
                    add((ls, (-i2,) + gs), GE.one(self.width))
                elif i2 < 0 and -i2 == s2:
                    # G(r)G(r) = L(2r)
                    tail = ((), gs[1:])
                    for k3, v3 in self.gen_apply(2 * i2, tail).items():
                        add(k3, v3)
                else:
                    tail = ((), gs[1:])
                    for k2, v2 in self.gen_apply(i2, tail).items():
                        for k3, v3 in self.gen_apply(-s2, k2).items():
                            add(k3, -(v3 * v2))
                    for sym, coeff in ns_bracket_gens(i2, -s2):
                        if sym[0] == "d":
                            add(tail, self.central * coeff)
                        else:
                            for k3, v3 in self.gen_apply(sym_idx2(sym),
                                                         tail).items():
                                add(k3, v3 * coeff)
        memo[(i2, key)] = out
        return out


class FockModule(_ModuleBase):
    """Free boson-fermion Fock space, central charge 3/2.

    Basis keys (bosons, fermions): a(-n1)...a(-nk) psi(-r1)...psi(-rl) vac
    with n's weakly and doubled r's strictly descending.  Mode relations
    [a(m), a(n)] = m delta_{m+n,0}, {psi(r), psi(s)} = delta_{r+s,0};
    L and G act through the standard quadratic expressions.
    """

    def __init__(self, width=0):
        self.width = width
        self.h = Fraction(0)
        self.central = GE.scalar(Fraction(3, 2), width)
        self._memo = {}

    def vacuum_key(self):
        return ((), ())

    def weight2(self, key):
        return level_of(key)

    def a_apply(self, n, key):
        bos, fer = key
        if n == 0:
            return {}
        if n < 0:
            new = tuple(sorted(bos + (-n,), reverse=True))
            return {(new, fer): GQ(1)}
        if n not in bos:
            return {}
        cnt = bos.count(n)
        lst = list(bos)
        lst.remove(n)
        return {(tuple(lst), fer): GQ(n * cnt)}

    def psi_apply(self, r2, key):
        bos, fer = key
        if r2 < 0:
            v = -r2
            if v in fer:
                return {}
            pos = sum(1 for x in fer if x > v)
            new = tuple(sorted(fer + (v,), reverse=True))
            return {(bos, new): GQ(-1 if pos % 2 else 1)}
        if r2 not in fer:
            return {}
        pos = fer.index(r2)
        new = fer[:pos] + fer[pos + 1:]
        return {(bos, new): GQ(-1 if pos % 2 else 1)}

    def _pair_apply(self, ops, key):
        """Apply a two-factor product given as [(kind, idx), ...] rightmost
        first; kind in {'a','psi'}."""
        cur = {key: GQ(1)}
        for kind, idx in reversed(ops):
            nxt = {}
            for k, v in cur.items():
                res = self.a_apply(idx, k) if kind == "a" \
                    else self.psi_apply(idx, k)
                for k2, v2 in res.items():
                    s = nxt.get(k2)
                    val = v * v2 if s is None else s + v * v2
                    if val:
                        nxt[k2] = val
                    else:
                        nxt.pop(k2, None)
            cur = nxt
        return cur

    def gen_apply(self, i2, key):
        memo = self._memo
        got = memo.get((i2, key))
        if got is not None:
            return got
        bos, fer = key
        lev2 = level_of(key)
        out = {}

        def add(res, fac):
            for k2, v2 in res.items():
                cur = out.get(k2)
                val = v2 * fac if cur is None else cur + v2 * fac
                if val:
                    out[k2] = val
                else:
                    out.pop(k2, None)

        if i2 % 2 == 0:
            m = i2 // 2
            span = lev2 // 2 + abs(m) + 2
            for k in range(-span, span + 1):
                i, j = -k, m + k
                if i == 0 or j == 0:
                    continue
                lo, hi = (i, j) if i <= j else (j, i)
                res = self._pair_apply([("a", lo), ("a", hi)], key)
                if res:
                    add(res, GQ(Fraction(1, 2)))
            span2 = lev2 + 2 * abs(m) + 3
            start = -span2 if span2 % 2 == 1 else -span2 + 1
            for r2 in range(start, span2 + 1, 2):
                i2f, j2f = -r2, 2 * m + r2
                if i2f == j2f:
                    continue
                coeff = GQ(Fraction(r2, 2) + Fraction(m, 2))
                if not coeff:
                    continue
                if i2f <= j2f:
                    res = self._pair_apply([("psi", i2f), ("psi", j2f)], key)
                    sgn = 1
                else:
                    res = self._pair_apply([("psi", j2f), ("psi", i2f)], key)
                    sgn = -1
                if res:
                    add(res, coeff * GQ(Fraction(sgn, 2)))
        else:
            r2 = i2
            span = lev2 // 2 + abs(r2) + 2
            for k in range(-span, span + 1):
                if k == 0:
                    continue
                s2 = r2 - 2 * k
                res = self._pair_apply([("a", k), ("psi", s2)], key)
                if res:
                    add(res, GQ(1))
        memo[(i2, key)] = out
        return out


class GradedVector:
    """Sparse module vector: {basis key: coefficient}."""

    __slots__ = ("module", "t")

    def __init__(self, module, table):
        self.module = module
        self.t = {k: v for k, v in table.items() if v}

    def __add__(self, other):
        t = dict(self.t)
        for k, v in other.t.items():
            cur = t.get(k)
            s = cur + v if cur is not None else v
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return GradedVector(self.module, t)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, coeff):
        if not isinstance(coeff, GE):
            coeff = GE.scalar(coeff, self.module.width)
        return GradedVector(self.module, {k: coeff * v
                                          for k, v in self.t.items()})

    def __eq__(self, other):
        if isinstance(other, GradedVector):
            return self.t == other.t
        return NotImplemented

    __hash__ = None

    def __bool__(self):
        return bool(self.t)

    def __repr__(self):
        return "GradedVector(%r)" % (self.t,)

    def truncate(self, weights, cap):
        return GradedVector(self.module,
                            {k: v.truncate(weights, cap)
                             for k, v in self.t.items()})

    def level_cap(self, level2_cap):
        return GradedVector(self.module,
                            {k: v for k, v in self.t.items()
                             if level_of(k) <= level2_cap})

    def apply_gen(self, i2, coeff=None):
        """Apply coeff * gen(i2) with the envelope sign rule."""
        mod = self.module
        odd = i2 % 2 == 1
        out = {}
        for key, b in self.t.items():
            fac = b.parity_twist() if odd else b
            if coeff is not None:
                fac = coeff * fac
            for k2, v2 in mod.gen_apply(i2, key).items():
                cur = out.get(k2)
                val = fac * v2 if cur is None else cur + fac * v2
                if val:
                    out[k2] = val
                else:
                    out.pop(k2, None)
        return GradedVector(mod, out)

    def apply_word(self, word):
        """Apply a product of generators, rightmost factor first; entries of
        word are idx2 or (idx2, coeff)."""
        v = self
        for item in reversed(word):
            if isinstance(item, tuple):
                v = v.apply_gen(item[0], item[1])
            else:
                v = v.apply_gen(item)
        return v

    def apply_dilation(self, base, lpow=-2, base_inv=None, trunc=None):
        """(base)^{lpow * L(0)}: scale the weight-k piece by base^(lpow*k).

        lpow must be even so exponents stay integral on half-integer
        weights."""
        if lpow % 2:
            raise ValueError("dilation power must be even")
        if not isinstance(base, GE):
            base = GE.scalar(base, self.module.width)
        need_inv = any((lpow * self.module.weight2(k)) // 2 < 0
                       for k in self.t)
        binv = base_inv
        if need_inv and binv is None:
            binv = base.inverse(trunc)
        t = {}
        for k, v in self.t.items():
            e = (lpow * self.module.weight2(k)) // 2
            if e >= 0:
                t[k] = (base ** e) * v
            else:
                t[k] = (binv ** (-e)) * v
        return GradedVector(self.module, t)

    def project(self, weight2):
        return GradedVector(self.module,
                            {k: v for k, v in self.t.items()
                             if self.module.weight2(k) == weight2})

    def pair(self, dual):
        """Pair with a dual vector given as {key: coefficient}."""
        out = GE.zero(self.module.width)
        table = dual.t if isinstance(dual, GradedVector) else dual
        for k, v in table.items():
            w = self.t.get(k)
            if w is not None:
                out = out + v * w
        return out


def exp_act(vec, terms, level2_cap=None, trunc=None, maxit=400):
    """exp(sum coeff*gen) applied to a graded vector.

    Lowering-only exponentials (all idx2 > 0) terminate on their own;
    raising-only ones (all idx2 < 0) are truncated soundly by a level cap;
    anything mixed needs a graded truncation on the coefficients.
    """
    terms = [(i2, c) for i2, c in terms if c]
    if not terms:
        return vec
    all_low = all(i2 > 0 for i2, _ in terms)
    all_raise = all(i2 < 0 for i2, _ in terms)
    if not all_low and not all_raise and trunc is None:
        raise ValueError("mixed-direction exponential requires a graded "
                         "truncation")
    if all_raise and level2_cap is None and trunc is None:
        raise ValueError("raising exponential requires a level cap")
    out = vec
    term = vec
    for n in range(1, maxit + 1):
        nxt = None
        for i2, coeff in terms:
            piece = term.apply_gen(i2, coeff)
            nxt = piece if nxt is None else nxt + piece
        term = nxt.scale(GQ(Fraction(1, n)))
        if level2_cap is not None and all_raise:
            term = term.level_cap(level2_cap)
        if trunc is not None:
            term = term.truncate(*trunc)
        if not term:
            break
        out = out + term
    else:
        raise ValueError("module exponential did not terminate")
    if level2_cap is not None:
        out = out.level_cap(level2_cap)
    return out


def adjoint_apply(i2, dual, module, level2_cap, coeff=None):
    """Adjoint action on a dual vector (a table over basis keys), defined by
    <P' v', w> = <v', P w> and computed by transposing on a level window."""
    out = {}
    for key in enumerate_basis(level2_cap):
        v = module.basis_vector(key)
        img = v.apply_gen(i2, coeff)
        val = img.pair(dual)
        if val:
            out[key] = val
    return GradedVector(module, out)


# -- symbolic enveloping algebra with projections ----------------------------

class UPElement:
    """Element of the enveloping algebra extended by projections.

    Table {word: coefficient}; a word is a tuple of symbols ('L', n),
    ('G', r2), ('P', k2).  The central element is the coefficient variable
    ``d``.  Normal form: generators sorted by doubled index ascending (PBW,
    with G squares rewritten to L), projections commuted to the right end
    and collapsed.
    """

    def __init__(self, table=None, width=0):
        self.width = width
        self.t = {k: v for k, v in (table or {}).items() if v}

    @classmethod
    def gen(cls, sym, width=0):
        return cls({(sym,): GE.one(width)}, width)

    @classmethod
    def one(cls, width=0):
        return cls({(): GE.one(width)}, width)

    def __add__(self, other):
        t = dict(self.t)
        for k, v in other.t.items():
            cur = t.get(k)
            s = cur + v if cur is not None else v
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return UPElement(t, self.width)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        if not isinstance(c, GE):
            c = GE.scalar(c, self.width)
        return UPElement({k: c * v for k, v in self.t.items()}, self.width)

    def __mul__(self, other):
        t = {}
        for ka, va in self.t.items():
            for kb, vb in other.t.items():
                key = ka + kb
                val = va * vb
                cur = t.get(key)
                val = cur + val if cur is not None else val
                if val:
                    t[key] = val
                else:
                    t.pop(key, None)
        return UPElement(t, self.width)

    def __eq__(self, other):
        if isinstance(other, UPElement):
            return self.t == other.t
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return "UPElement(%r)" % (self.t,)

    def normal_form(self, rng=None):
        """Rewrite to PBW normal form; ``rng`` picks among reducible spots
        (any choice terminates at the same normal form)."""
        work = [(k, v) for k, v in self.t.items()]
        done = {}
        guard = 0
        while work:
            guard += 1
            if guard > 200000:
                raise RuntimeError("normal form did not terminate")
            word, coeff = work.pop()
            spots = _reducible_spots(word)
            if not spots:
                cur = done.get(word)
                s = cur + coeff if cur is not None else coeff
                if s:
                    done[word] = s
                else:
                    done.pop(word, None)
                continue
            idx = spots[0] if rng is None else spots[rng.randrange(len(spots))]
            for w2, c2 in _reduce_at(word, idx, self.width):
                work.append((w2, coeff * c2))
        return UPElement(done, self.width)

    def act(self, vec, level2_cap=None):
        out = None
        for word, coeff in self.t.items():
            v = vec
            for sym in reversed(word):
                if sym[0] == "P":
                    v = v.project(sym[1])
                else:
                    v = v.apply_gen(sym_idx2(sym))
            v = v.scale(coeff.subs({"d": vec.module.central}))
            out = v if out is None else out + v
        if out is None:
            out = vec.module.vector({})
        if level2_cap is not None:
            out = out.level_cap(level2_cap)
        return out


def _reducible_spots(word):
    spots = []
    for i in range(len(word) - 1):
        a, b = word[i], word[i + 1]
        if a[0] == "P" and b[0] == "P":
            spots.append(i)
        elif a[0] == "P" and b[0] != "P":
            spots.append(i)
        elif a[0] != "P" and b[0] != "P":
            ia, ib = sym_idx2(a), sym_idx2(b)
            if ia > ib:
                spots.append(i)
            elif ia == ib and a[0] == "G":
                spots.append(i)
    return spots


def _reduce_at(word, i, width):
    a, b = word[i], word[i + 1]
    head, tail = word[:i], word[i + 2:]
    out = []
    if a[0] == "P" and b[0] == "P":
        if a[1] == b[1]:
            out.append((head + (a,) + tail, GE.one(width)))
        return out
    if a[0] == "P":
        # P_j X_n = X_n P_{j + shift}, shift = weight of the generator
        shift = sym_idx2(b)
        out.append((head + (b, ("P", a[1] + shift)) + tail, GE.one(width)))
        return out
    ia, ib = sym_idx2(a), sym_idx2(b)
    if ia == ib and a[0] == "G":
        out.append((head + (("L", ia),) + tail, GE.one(width)))
        return out
    sign = -1 if (sym_parity(a) and sym_parity(b)) else 1
    out.append((head + (b, a) + tail, GE.scalar(sign, width)))
    for sym, cf in ns_bracket_gens(ia, ib):
        if sym[0] == "d":
            out.append((head + tail, GE.evar("d", 1, width) * cf))
        else:
            out.append((head + (sym,) + tail, GE.scalar(cf, width)))
    return out


def ns_bracket(a, b):
    """Super-bracket [a, b] in the enveloping algebra, PBW-normalized."""
    pa = _element_parity(a)
    pb = _element_parity(b)
    sign = -1 if (pa and pb) else 1
    return (a * b - (b * a).scale(sign)).normal_form()


def _element_parity(el):
    ps = {sum(sym_parity(s) for s in w) % 2 for w in el.t}
    if len(ps) > 1:
        raise ValueError("inhomogeneous element has no parity")
    return ps.pop() if ps else 0
