"""Gaussian rationals: exact complex numbers a + b*i with rational a, b."""

from fractions import Fraction


class GQ:
    """A Gaussian rational, kept exact (no floats anywhere)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        if not isinstance(other, (GQ, int, Fraction)):
            return NotImplemented
        other = GQ.lift(other)
        return GQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def __sub__(self, other):
        if not isinstance(other, (GQ, int, Fraction)):
            return NotImplemented
        return self + (-GQ.lift(other))

    def __rsub__(self, other):
        if not isinstance(other, (GQ, int, Fraction)):
            return NotImplemented
        return GQ.lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, (GQ, int, Fraction)):
            return NotImplemented
        other = GQ.lift(other)
        return GQ(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def inv(self):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GQ.lift(other).inv()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GQ)):
            other = GQ.lift(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return "%s*i" % self.im
        return "(%s%s%s*i)" % (self.re, "+" if self.im > 0 else "-", abs(self.im))

    @staticmethod
    def lift(x):
        if isinstance(x, GQ):
            return x
        if isinstance(x, (int, Fraction)):
            return GQ(x)
        raise TypeError("cannot lift %r to a Gaussian rational" % (x,))


ZERO = GQ(0)
ONE = GQ(1)
I = GQ(0, 1)


def frac_str(q):
    return "%d/%d" % (q.numerator, q.denominator)
