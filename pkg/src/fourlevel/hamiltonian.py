"""Nine-coefficient two-qubit Hamiltonian family.

The model is ``H(t) = sum_i J_i(t) s_i(x)s_i + h1_i(t) s_i(x)1 +
h2_i(t) 1(x)s_i`` (hbar = 1, all coefficients real angular frequencies).
Identity terms are dropped: they commute with everything and never enter the
coefficient flow.  Coefficients may be numbers, Python callables of t, or
strings in the :mod:`fourlevel.expr` language.

Named constructors cover the recurring coupling patterns: ``ising`` (one XX
coupling plus a field on the second qubit), ``case2``/``case3`` (the other
two blockable patterns), and ``so5`` (the most general pattern with a
ten-plus-five sector split).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .generators import spinor_basis

__all__ = ["Coefficient", "as_coefficient", "HamiltonianSpec", "COEFF_NAMES", "EvalError"]

EvalError = expr.EvalError

#: Coefficient names in canonical order, paired with their spinor labels.
COEFF_NAMES = ("J_x", "J_y", "J_z", "h1_x", "h1_y", "h1_z", "h2_x", "h2_y", "h2_z")
COEFF_LABELS = ("XX", "YY", "ZZ", "X1", "Y1", "Z1", "1X", "1Y", "1Z")

_DEFAULT_SAMPLES = np.linspace(0.0, 1.0, 13)


class Coefficient:
    """A real-valued coefficient function of time.

    Wraps a constant, a callable, or a parsed expression; evaluation returns
    a finite float or raises :class:`EvalError`.
    """

    __slots__ = ("fn", "source", "constant")

    def __init__(self, fn, source=None, constant=None):
        self.fn = fn
        self.source = source
        self.constant = constant  # float when known to be time-independent

    def __call__(self, t):
        if self.constant is not None:
            return self.constant
        value = self.fn(t)
        if isinstance(value, complex):
            if abs(value.imag) > 1e-14 * max(1.0, abs(value.real)):
                raise EvalError(f"coefficient evaluated to complex {value!r}", t)
            value = value.real
        value = float(value)
        if not np.isfinite(value):
            raise EvalError(f"coefficient evaluated to non-finite {value!r}", t)
        return value

    @property
    def is_constant(self):
        return self.constant is not None

    def __repr__(self):
        if self.constant is not None:
            return f"Coefficient({self.constant!r})"
        return f"Coefficient({self.source or self.fn!r})"


def as_coefficient(value):
    """Normalize a number / string expression / callable to a Coefficient."""
    if isinstance(value, Coefficient):
        return value
    if isinstance(value, str):
        fn = expr.parse(value)
        # constant-fold expressions without the time variable
        def has_t(node):
            return node[0] == "t" or any(has_t(c) for c in node[1:] if isinstance(c, tuple))
        if not has_t(fn.ast):
            return Coefficient(fn, source=value, constant=fn(0.0))
        return Coefficient(fn, source=value)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return Coefficient(None, constant=float(value))
    if callable(value):
        return Coefficient(value)
    raise TypeError(f"cannot interpret {value!r} as a coefficient")


@dataclass(frozen=True)
class HamiltonianSpec:
    """The nine coefficient functions of the two-qubit family.

    ``j``, ``h1``, ``h2`` are (x, y, z) triples of :class:`Coefficient`.
    Instances are immutable and safe to share.
    """

    j: tuple
    h1: tuple
    h2: tuple

    @staticmethod
    def from_coefficients(j=(0, 0, 0), h1=(0, 0, 0), h2=(0, 0, 0)):
        return HamiltonianSpec(
            tuple(as_coefficient(v) for v in j),
            tuple(as_coefficient(v) for v in h1),
            tuple(as_coefficient(v) for v in h2),
        )

    @staticmethod
    def from_dict(values):
        """Build from a {coefficient name: value} mapping (missing -> 0)."""
        unknown = set(values) - set(COEFF_NAMES)
        if unknown:
            raise KeyError(f"unknown coefficient names {sorted(unknown)}")
        get = lambda name: values.get(name, 0.0)
        return HamiltonianSpec.from_coefficients(
            j=(get("J_x"), get("J_y"), get("J_z")),
            h1=(get("h1_x"), get("h1_y"), get("h1_z")),
            h2=(get("h2_x"), get("h2_y"), get("h2_z")),
        )

    # -- named coupling patterns -------------------------------------------

    @staticmethod
    def ising(j, hx=0.0, hy=0.0, hz=0.0):
        """Single-qubit-control pattern: J XX + field on the second qubit."""
        return HamiltonianSpec.from_coefficients(j=(j, 0, 0), h2=(hx, hy, hz))

    @staticmethod
    def case2(j, h1y, h2z):
        """Pattern J XX + h1_y Y1 + h2_z 1Z."""
        return HamiltonianSpec.from_coefficients(j=(j, 0, 0), h1=(0, h1y, 0), h2=(0, 0, h2z))

    @staticmethod
    def case3(jx, jy, h1z, h2z):
        """Pattern J_x XX + J_y YY + h1_z Z1 + h2_z 1Z."""
        return HamiltonianSpec.from_coefficients(j=(jx, jy, 0), h1=(0, 0, h1z), h2=(0, 0, h2z))

    @staticmethod
    def so5(jx, jy, h2x, h2y, h2z, h1z):
        """The general blockable pattern with full field on the second qubit."""
        return HamiltonianSpec.from_coefficients(
            j=(jx, jy, 0), h1=(0, 0, h1z), h2=(h2x, h2y, h2z))

    # -- evaluation ---------------------------------------------------------

    @property
    def coefficients(self):
        """The nine coefficients in canonical (COEFF_NAMES) order."""
        return self.j + self.h1 + self.h2

    def coefficient_map(self):
        """Mapping spinor label -> coefficient function, canonical order."""
        return dict(zip(COEFF_LABELS, self.coefficients))

    def coefficient_vector(self, t):
        """The nine coefficient values at time t (COEFF_NAMES order)."""
        return np.array([c(t) for c in self.coefficients])

    def matrix(self, t):
        """Dense 4x4 Hermitian H(t)."""
        basis = spinor_basis()
        out = np.zeros((4, 4), dtype=complex)
        for label, c in self.coefficient_map().items():
            v = c(t)
            if v != 0.0:
                out += v * basis.matrix(label)
        return out

    def spinor_vector(self, t):
        """Coefficients of H(t) over the 15-generator canonical spinor basis."""
        basis = spinor_basis()
        out = np.zeros(15)
        for label, c in self.coefficient_map().items():
            out[basis.index(label)] = c(t)
        return out

    # -- structure queries ----------------------------------------------------

    def active_names(self, times=None, tol=1e-12):
        """Coefficient names that are not identically zero on sample times."""
        times = _DEFAULT_SAMPLES if times is None else np.asarray(times, dtype=float)
        active = []
        for name, c in zip(COEFF_NAMES, self.coefficients):
            if c.is_constant:
                if abs(c.constant) > tol:
                    active.append(name)
            elif any(abs(c(t)) > tol for t in times):
                active.append(name)
        return tuple(active)

    def active_labels(self, times=None, tol=1e-12):
        """Spinor labels of the generator set of H (the active terms)."""
        lookup = dict(zip(COEFF_NAMES, COEFF_LABELS))
        return tuple(lookup[n] for n in self.active_names(times, tol))

    def has_coupling(self, times=None):
        """True when at least one J_i is not identically zero."""
        return any(n.startswith("J") for n in self.active_names(times))

    def __repr__(self):
        parts = ", ".join(
            f"{n}={c!r}" for n, c in zip(COEFF_NAMES, self.coefficients)
            if not (c.is_constant and c.constant == 0.0))
        return f"HamiltonianSpec({parts or '0'})"
