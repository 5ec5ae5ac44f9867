"""Assembly and verification of dynamical invariants.

A dynamical invariant is a Hermitian I(t) with ``dI/dt + i[H, I] = 0``, so
``<psi(t)|I(t)|psi(t)>`` is constant along Schrodinger evolution.  Here an
invariant is either sampled on a grid (assembled from an integrated
coefficient trajectory) or closed-form (a callable with an optional analytic
derivative).  ``verify_invariant`` measures how well a candidate satisfies
the defining equation, differentiating analytically when a closed form is
available and by fourth-order finite differences otherwise, so that
differentiation error is not mistaken for invariance violation.

The affine freedom (any ``c1 I + c2 1 + c3 L`` with constant ``[H, L] = 0``
is again an invariant) is exposed as :func:`affine_combine`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solve import EvolutionOperator, schrodinger_oracle

__all__ = [
    "DynamicalInvariant",
    "assemble_invariant",
    "affine_combine",
    "verify_invariant",
    "InvarianceReport",
    "traceless_part",
]


class DynamicalInvariant:
    """A candidate invariant, sampled on a grid and/or closed-form.

    Attributes:
        times: sample grid (None for purely closed-form invariants).
        kind: "S", "D" or None; which sector the coefficients live in.
        matrix_fn / derivative_fn: closed forms, when available.
    """

    def __init__(self, times=None, matrices=None, matrix_fn=None,
                 derivative_fn=None, basis=None, labels=None, kind=None):
        if matrices is None and matrix_fn is None:
            raise ValueError("need grid samples or a closed form")
        self.times = None if times is None else np.asarray(times, dtype=float)
        self._matrices = None if matrices is None else np.asarray(matrices, dtype=complex)
        self.matrix_fn = matrix_fn
        self.derivative_fn = derivative_fn
        self.basis = basis
        self.labels = tuple(labels) if labels is not None else None
        self.kind = kind

    def at(self, t):
        """I(t); exact for closed forms, grid lookup otherwise."""
        if self.matrix_fn is not None:
            return np.asarray(self.matrix_fn(t), dtype=complex)
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t!r} is not on the sample grid")
        return self._matrices[k]

    def sample(self, times=None):
        """Matrices on a grid: stored samples or evaluated closed form."""
        if times is None:
            if self._matrices is None:
                raise ValueError("no grid attached; pass times explicitly")
            return self.times, self._matrices
        times = np.asarray(times, dtype=float)
        if self.matrix_fn is not None:
            return times, np.stack([self.matrix_fn(t) for t in times])
        if self.times is not None and len(times) == len(self.times) \
                and np.allclose(times, self.times):
            return self.times, self._matrices
        raise ValueError("grid-sampled invariant evaluated off its grid")

    def hermiticity_defect(self):
        _, mats = self.sample()
        return float(max(np.abs(m - m.conj().T).max() for m in mats))

    def __repr__(self):
        form = "closed-form" if self.matrix_fn is not None else "sampled"
        return f"DynamicalInvariant({form}, kind={self.kind!r})"


def assemble_invariant(traj, basis=None, kind=None):
    """Build I(t_k) = sum_i g_i(t_k) T_i from a coefficient trajectory.

    Block trajectories are embedded by zero padding into the parent basis.
    """
    basis = basis or traj.basis
    if basis is not traj.basis and basis.dim != traj.basis.dim:
        raise ValueError("trajectory and basis dimensions are inconsistent")
    full = traj.full_vectors()
    mats = np.einsum("kn,nij->kij", full, basis.matrices)
    return DynamicalInvariant(times=traj.times, matrices=mats, basis=basis,
                              labels=traj.labels, kind=kind)


def affine_combine(inv, c1=1.0, c2=0.0, c3=0.0, commuting=None):
    """The invariant ``c1 I + c2 1 + c3 L`` for constant c_i and [H, L] = 0.

    ``commuting`` must itself be constant; its commutation with H is the
    caller's responsibility (verify with :func:`verify_invariant`).
    """
    times, mats = inv.sample()
    d = mats.shape[1]
    extra = np.zeros((d, d), dtype=complex)
    if c3 != 0.0:
        if commuting is None:
            raise ValueError("c3 != 0 requires a commuting operator")
        extra = c3 * np.asarray(commuting, dtype=complex)
    out = c1 * mats + c2 * np.eye(d) + extra
    fn = None
    dfn = None
    if inv.matrix_fn is not None:
        fn = lambda t: c1 * inv.matrix_fn(t) + c2 * np.eye(d) + extra
        if inv.derivative_fn is not None:
            dfn = lambda t: c1 * inv.derivative_fn(t)
    return DynamicalInvariant(times=times, matrices=out, matrix_fn=fn,
                              derivative_fn=dfn, basis=inv.basis, kind=inv.kind)


def traceless_part(m):
    m = np.asarray(m, dtype=complex)
    d = m.shape[-1]
    tr = np.trace(m, axis1=-2, axis2=-1)
    out = m.copy()
    idx = np.arange(d)
    out[..., idx, idx] -= (tr / d)[..., None]
    return out


def _fd_derivative(times, mats):
    """Fourth-order finite-difference d/dt of matrix samples (uniform grid)."""
    h = times[1] - times[0]
    if np.abs(np.diff(times) - h).max() > 1e-9 * abs(h):
        raise ValueError("finite differences require a uniform grid")
    n = len(times)
    if n < 6:
        raise ValueError("need at least 6 grid points")
    d = np.empty_like(mats)
    # interior: five-point central stencil
    d[2:-2] = (mats[:-4] - 8 * mats[1:-3] + 8 * mats[3:-1] - mats[4:]) / (12 * h)
    # one-sided fourth-order stencils at the edges
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    d[0] = sum(ci * mats[i] for i, ci in enumerate(c))
    d[1] = sum(ci * mats[1 + i] for i, ci in enumerate(c))
    d[-1] = -sum(ci * mats[-1 - i] for i, ci in enumerate(c))
    d[-2] = -sum(ci * mats[-2 - i] for i, ci in enumerate(c))
    return d


@dataclass(frozen=True)
class InvarianceReport:
    """Residual diagnostics for a candidate invariant.

    ``max_residual`` is the worst Frobenius norm of dI/dt + i[H, I] on the
    grid; ``expectation_drift`` the worst wander of <psi|I|psi> along
    oracle-evolved states (None when no states were requested).  ``flagged``
    is set when the residual exceeds ``threshold``.
    """

    max_residual: float
    residuals: np.ndarray
    expectation_drift: float
    norm_drift: float
    threshold: float

    @property
    def flagged(self):
        return self.max_residual > self.threshold

    @property
    def passed(self):
        return not self.flagged


def verify_invariant(inv, h, times=None, states=None, oracle=None,
                     threshold=1e-8):
    """Residual report for ``dI/dt + i[H, I] = 0`` plus expectation drift.

    The derivative is the attached analytic one when present, otherwise
    fourth-order finite differences on the grid.  When ``states`` (initial
    vectors) are given, each is evolved with the Schrodinger oracle (or the
    supplied ``oracle``) and the drift of <psi|I|psi> is reported.
    """
    times, mats = inv.sample(times)
    if inv.derivative_fn is not None:
        derivs = np.stack([inv.derivative_fn(t) for t in times])
    else:
        derivs = _fd_derivative(times, mats)

    residuals = np.empty(len(times))
    for k, t in enumerate(times):
        hm = h.matrix(t)
        r = derivs[k] + 1j * (hm @ mats[k] - mats[k] @ hm)
        residuals[k] = np.linalg.norm(r)

    drift = None
    if states is not None:
        if oracle is None:
            oracle = schrodinger_oracle(h, times)
        drift = 0.0
        for psi0 in np.atleast_2d(np.asarray(states, dtype=complex)):
            path = oracle.evolve(psi0)
            expect = np.einsum("ki,kij,kj->k", path.conj(), mats, path).real
            drift = max(drift, float(np.abs(expect - expect[0]).max()))

    norms = np.linalg.norm(mats.reshape(len(times), -1), axis=1)
    return InvarianceReport(
        max_residual=float(residuals.max()),
        residuals=residuals,
        expectation_drift=drift,
        norm_drift=float(np.abs(norms - norms[0]).max()),
        threshold=threshold,
    )
