"""Second-order forward-mode differentiation.

A :class:`Jet` carries a batch of values together with their gradients and
Hessians with respect to ``d`` independent variables.  Arithmetic and the
elementary functions in this module propagate all three exactly (up to
rounding), so any closed-form expression written against them yields an
exact 2-jet when fed :meth:`Jet.variables` and a plain value when fed arrays.

Shapes: ``val`` is ``(...,)``, ``grad`` is ``(..., d)``, ``hess`` is
``(..., d, d)``.
"""

import numpy as np

__all__ = ["Jet", "exp", "log", "sqrt", "sin", "cos", "pullback"]


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Jet:
    __slots__ = ("val", "grad", "hess")
    # make ndarray <op> Jet defer to the Jet reflected operators
    __array_ufunc__ = None

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, points):
        """Coordinate jets for points of shape ``(..., d)``."""
        points = np.asarray(points, dtype=float)
        d = points.shape[-1]
        out = []
        for i in range(d):
            grad = np.zeros(points.shape)
            grad[..., i] = 1.0
            out.append(cls(points[..., i].copy(), grad, np.zeros(points.shape + (d,))))
        return out

    @property
    def dim(self):
        return self.grad.shape[-1]

    def _const(self, c):
        c = np.broadcast_to(np.asarray(c, dtype=float), self.val.shape)
        return Jet(c.copy(), np.zeros_like(self.grad), np.zeros_like(self.hess))

    def _lift(self, other):
        return other if isinstance(other, Jet) else self._const(other)

    def _chain(self, f0, f1, f2):
        """Apply a scalar function with value/first/second derivative arrays."""
        return Jet(
            f0,
            f1[..., None] * self.grad,
            f1[..., None, None] * self.hess + f2[..., None, None] * _outer(self.grad, self.grad),
        )

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.grad, self.hess)
        return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        return Jet(
            a.val * b.val,
            a.val[..., None] * b.grad + b.val[..., None] * a.grad,
            a.val[..., None, None] * b.hess
            + b.val[..., None, None] * a.hess
            + _outer(a.grad, b.grad)
            + _outer(b.grad, a.grad),
        )

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.val
        return self._chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, other):
        if isinstance(other, Jet):
            return exp(other * log(self))
        p = float(other)
        if p == 0.0:
            return self._const(1.0)
        if p == 1.0:
            return self
        v = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            f2 = p * (p - 1.0) * v ** (p - 2.0) if p != 2.0 else np.full_like(v, 2.0)
            return self._chain(v**p, p * v ** (p - 1.0), f2)

    def __rpow__(self, other):
        return exp(self * np.log(np.asarray(other, dtype=float)))

    def __repr__(self):
        return f"Jet(val={self.val!r}, dim={self.dim})"


def exp(a):
    if isinstance(a, Jet):
        e = np.exp(a.val)
        return a._chain(e, e, e)
    return np.exp(a)


def log(a):
    if isinstance(a, Jet):
        v = a.val
        return a._chain(np.log(v), 1.0 / v, -1.0 / v**2)
    return np.log(a)


def sqrt(a):
    if isinstance(a, Jet):
        s = np.sqrt(a.val)
        return a._chain(s, 0.5 / s, -0.25 / (s * a.val))
    return np.sqrt(a)


def sin(a):
    if isinstance(a, Jet):
        s, c = np.sin(a.val), np.cos(a.val)
        return a._chain(s, c, -s)
    return np.sin(a)


def cos(a):
    if isinstance(a, Jet):
        s, c = np.sin(a.val), np.cos(a.val)
        return a._chain(c, -s, -c)
    return np.cos(a)


def pullback(val, grad, hess, maps):
    """Compose an outer 2-jet with an inner map given as jets.

    ``val``, ``grad`` (..., D), ``hess`` (..., D, D) describe a function of
    D variables at the points ``maps[k].val``; ``maps`` is a list of D jets
    in the inner variables.  Returns the jet of the composite.
    """
    dX = np.stack([m.grad for m in maps], axis=-2)  # (..., D, d)
    ddX = np.stack([m.hess for m in maps], axis=-3)  # (..., D, d, d)
    g = np.einsum("...k,...ka->...a", grad, dX)
    h = np.einsum("...kl,...ka,...lb->...ab", hess, dX, dX) + np.einsum("...k,...kab->...ab", grad, ddX)
    return Jet(np.asarray(val, dtype=float), g, h)
