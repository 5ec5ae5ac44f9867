"""Closed-form invariant of the rotating-frame NMR drive.

For the single-qubit-control pattern with a constant longitudinal field and
a circularly polarized transverse drive,

    H(t) = J XX + h_x 1X + B cos(w t) 1Y + B sin(w t) 1Z,

the paired coefficient flow has the exact solution

    g+-(t) = (+-J + h_x - w/2,  B cos(w t),  B sin(w t)),

constant in norm and periodic with T = 2 pi / w.  The superset-type
invariant assembled from both signs is

    I_S(t) = 2J XX + (2 h_x - w) 1X + 2B cos(w t) 1Y + 2B sin(w t) 1Z,

whose eigenvalues are +-2|g+| and +-2|g-|; the half-normalized form
``I_S / 2`` (coefficients g+- over the projector triples (1 +- X) s_i / 2)
has eigenvalues exactly +-|g+-|, and those are the values reported by
:func:`nmr_eigensystem`.

Everything here rotates rigidly: H(t) = R(t) H(0) R(t)+ with
R(t) = exp(-i w t (1X) / 2), so the Lewis-Riesenfeld phases are linear in t
and the propagator has the closed form used by :func:`nmr_propagator`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generators import spinor_basis
from .hamiltonian import HamiltonianSpec
from .invariants import DynamicalInvariant
from .solve import EvolutionOperator

__all__ = ["DegenerateError", "NMREigensystem", "NMRSolution", "nmr_exact",
           "nmr_eigensystem", "nmr_propagator"]


class DegenerateError(ValueError):
    """A paired coefficient vector vanished; the eigenframe is undefined."""


def _spin_eigenvector(g, lam):
    """Eigenvector of g . sigma for eigenvalue lam in {+|g|, -|g|}.

    Uses whichever of the two standard component forms is better conditioned,
    so the construction stays valid when g is (anti)parallel to the z axis.
    """
    g1, g2, g3 = g
    a = np.array([lam + g3, g1 + 1j * g2])
    b = np.array([g1 - 1j * g2, lam - g3])
    v = a if np.linalg.norm(a) >= np.linalg.norm(b) else b
    return v / np.linalg.norm(v)


# plus sector lives on (|00>+|10>, |01>+|11>)/sqrt2, minus on the X = -1 pair
_EP = np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=complex) / np.sqrt(2.0)
_EM = np.array([[-1, 0], [0, -1], [1, 0], [0, 1]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class NMREigensystem:
    """Instantaneous eigenframe of the half-normalized invariant I_S / 2.

    ``eigenvalues`` are (+|g+|, -|g+|, +|g-|, -|g-|) and ``eigenvectors``
    the matching unit columns.  ``degenerate`` flags |g+| = |g-| (the J -> 0
    limit), where the +- sectors touch and the combined frame is no longer
    unique (each sector's frame individually still is).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degenerate: bool


def nmr_eigensystem(g_plus, g_minus, tol=1e-12):
    """Eigenframe of I_S/2 from the two paired coefficient vectors."""
    g_plus = np.asarray(g_plus, dtype=float)
    g_minus = np.asarray(g_minus, dtype=float)
    gp = np.linalg.norm(g_plus)
    gm = np.linalg.norm(g_minus)
    if gp < tol or gm < tol:
        raise DegenerateError("a paired coefficient vector vanished")

    vals = np.array([gp, -gp, gm, -gm])
    cols = [
        _EP @ _spin_eigenvector(g_plus, +gp),
        _EP @ _spin_eigenvector(g_plus, -gp),
        _EM @ _spin_eigenvector(g_minus, +gm),
        _EM @ _spin_eigenvector(g_minus, -gm),
    ]
    return NMREigensystem(vals, np.stack(cols, axis=1),
                          degenerate=bool(abs(gp - gm) < 1e-9 * max(gp, gm)))


@dataclass(frozen=True)
class NMRSolution:
    """Closed-form drive, coefficient solution and invariant."""

    j: float
    hx: float
    b: float
    omega: float

    @property
    def period(self):
        return 2.0 * np.pi / self.omega

    @property
    def hamiltonian(self):
        w, b = self.omega, self.b
        return HamiltonianSpec.ising(
            self.j, hx=self.hx,
            hy=lambda t, b=b, w=w: b * np.cos(w * t),
            hz=lambda t, b=b, w=w: b * np.sin(w * t))

    def g_plus(self, t):
        return self._g(+1.0, t)

    def g_minus(self, t):
        return self._g(-1.0, t)

    def _g(self, sign, t):
        t = np.asarray(t, dtype=float)
        const = np.broadcast_to(sign * self.j + self.hx - self.omega / 2.0, t.shape)
        return np.stack([const, self.b * np.cos(self.omega * t),
                         self.b * np.sin(self.omega * t)], axis=-1)

    def spinor_coefficients(self, t):
        """g over the canonical spinor basis for the printed invariant I_S."""
        basis = spinor_basis()
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (15,))
        out[..., basis.index("XX")] = 2.0 * self.j
        out[..., basis.index("1X")] = 2.0 * self.hx - self.omega
        out[..., basis.index("1Y")] = 2.0 * self.b * np.cos(self.omega * t)
        out[..., basis.index("1Z")] = 2.0 * self.b * np.sin(self.omega * t)
        return out

    def invariant_matrix(self, t):
        return spinor_basis().assemble(self.spinor_coefficients(t))

    def invariant_derivative(self, t):
        basis = spinor_basis()
        w = self.omega
        return 2.0 * self.b * w * (-np.sin(w * t) * basis.matrix("1Y")
                                   + np.cos(w * t) * basis.matrix("1Z"))

    def invariant(self, times=None):
        """The printed I_S as a closed-form invariant (eigenvalues +-2|g+-|)."""
        mats = None
        if times is not None:
            times = np.asarray(times, dtype=float)
            mats = np.stack([self.invariant_matrix(t) for t in times])
        return DynamicalInvariant(
            times=times, matrices=mats,
            matrix_fn=self.invariant_matrix,
            derivative_fn=self.invariant_derivative,
            basis=spinor_basis(), kind="S")

    def eigensystem(self, t):
        return nmr_eigensystem(self.g_plus(t), self.g_minus(t))

    def lr_phase_rates(self):
        """Rates kappa_n with alpha_n(t) = kappa_n t, in eigensystem order.

        In the co-rotating gauge phi_n(t) = R(t) phi_n(0) the integrand of
        the Lewis-Riesenfeld phase is constant:
        kappa_n = <phi_n(0)| (w/2) 1X - H(0) |phi_n(0)>.
        """
        basis = spinor_basis()
        eig = self.eigensystem(0.0)
        op = 0.5 * self.omega * basis.matrix("1X") - self.hamiltonian.matrix(0.0)
        return np.einsum("in,ij,jn->n", eig.eigenvectors.conj(), op,
                         eig.eigenvectors).real


def nmr_exact(j, hx, b, omega):
    """Closed-form solution for constant (J, h_x) and circular drive (B, w)."""
    if omega == 0.0:
        raise ValueError("omega must be nonzero (finite period)")
    return NMRSolution(float(j), float(hx), float(b), float(omega))


def _rotation(omega, t):
    # exp(-i w t (1X)/2); (1X)^2 = 1 gives the two-term closed form
    basis = spinor_basis()
    half = 0.5 * omega * t
    return np.cos(half) * np.eye(4) - 1j * np.sin(half) * basis.matrix("1X")


def nmr_propagator(sol, times):
    """Analytic U(t; 0) assembled from the invariant eigenframe.

    U(t) = sum_n e^{i kappa_n t} R(t) |phi_n(0)><phi_n(0)| with
    R(t) = exp(-i w t (1X)/2).
    """
    times = np.asarray(times, dtype=float)
    eig = sol.eigensystem(0.0)
    kappas = sol.lr_phase_rates()
    projs = np.einsum("in,jn->nij", eig.eigenvectors, eig.eigenvectors.conj())
    mats = np.empty((len(times), 4, 4), dtype=complex)
    for k, t in enumerate(times):
        core = np.tensordot(np.exp(1j * kappas * t), projs, axes=(0, 0))
        mats[k] = _rotation(sol.omega, t) @ core
    return EvolutionOperator(times, mats)
