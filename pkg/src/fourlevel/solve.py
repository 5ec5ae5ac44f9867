"""Numerical integration of the coefficient flow and the Schrodinger oracle.

The coefficient flow ``0 = g' + i A g`` is integrated as the real rotation
``g' = -W g`` with ``W = iA`` real antisymmetric, so the exact flow conserves
|g| and the reported norm drift measures integrator error only.  The default
integrator is fixed-step classical Runge-Kutta (RK4): it keeps every solve on
the same grid as the propagator oracle and is bit-deterministic.  An adaptive
RK45 path (scipy) is available via ``method="rk45"``.

``schrodinger_oracle`` integrates ``dU/dt = -i H(t) U`` on the full 4x4
propagator and is the ground truth against which invariant-based
constructions are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generators import adjoint_rep, spinor_basis

__all__ = [
    "IntegrationError",
    "CaseMismatchError",
    "time_grid",
    "default_steps",
    "rk4_path",
    "solve_adjoint",
    "CoefficientTrajectory",
    "EvolutionOperator",
    "schrodinger_oracle",
    "so5_dtype_solve",
    "So5Report",
    "SO5_D_LABELS",
]

SO5_D_LABELS = ("ZX", "ZY", "ZZ", "X1", "Y1")


class IntegrationError(RuntimeError):
    """Integration produced a non-finite value; carries the offending time."""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} at t={t!r}")


class CaseMismatchError(ValueError):
    """Hamiltonian coefficients do not match the required coupling pattern."""


def time_grid(t0, tf, steps):
    """Uniform grid of ``steps`` intervals (steps+1 points) from t0 to tf."""
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not tf > t0:
        raise ValueError("tf must exceed t0")
    return np.linspace(float(t0), float(tf), steps + 1)


def default_steps(h, t0, tf, per_period=2000, extra_rates=()):
    """Step count giving ``per_period`` steps per fastest characteristic period.

    The characteristic rate is the largest coefficient magnitude (sampled)
    together with any caller-supplied rates such as a drive frequency.
    """
    ts = np.linspace(t0, tf, 17)
    rate = max((abs(c(t)) for c in h.coefficients for t in ts), default=0.0)
    rate = max([rate, *map(abs, extra_rates), 1e-30])
    periods = (tf - t0) * rate / (2.0 * np.pi)
    return max(int(np.ceil(per_period * periods)), per_period // 4)


def rk4_path(f, y0, times):
    """Fixed-step RK4 for dy/dt = f(t, y); returns y at every grid point."""
    times = np.asarray(times, dtype=float)
    y = np.array(y0)
    out = np.empty((len(times),) + y.shape, dtype=y.dtype)
    out[0] = y
    for k in range(len(times) - 1):
        t = times[k]
        h = times[k + 1] - t
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", times[k + 1])
        out[k + 1] = y
    return out


@dataclass(frozen=True)
class CoefficientTrajectory:
    """Sampled solution g(t_k) of the coefficient flow on one sector.

    ``labels``/``indices`` locate the components inside the parent basis;
    ``norm_drift`` is the worst deviation of |g| from |g(0)| and should sit
    at integrator tolerance (the exact flow is norm-preserving).
    """

    times: np.ndarray
    vectors: np.ndarray          # (len(times), dim), real
    basis: object
    labels: tuple
    indices: tuple

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def norm_drift(self):
        norms = np.linalg.norm(self.vectors, axis=1)
        return float(np.abs(norms - norms[0]).max())

    def full_vectors(self):
        """Zero-padded coefficient vectors over the whole parent basis."""
        out = np.zeros((len(self.times), self.basis.dim))
        out[:, list(self.indices)] = self.vectors
        return out


def _real_generator(a, t):
    w = 1j * a.at(t)
    mx = np.abs(w.real).max()
    if np.abs(w.imag).max() > 1e-9 * max(1.0, mx):
        raise ValueError("iA(t) is not real antisymmetric")
    return w.real


def solve_adjoint(a, g0, times, method="rk4", tol=1e-10):
    """Integrate ``0 = g' + i A g`` for a (sector of the) adjoint matrix.

    Args:
        a: AdjointMatrix, already restricted to the sector of interest.
        g0: real initial coefficients, |g0| > 0.
        times: monotonically increasing grid.
        method: "rk4" (fixed step, default) or "rk45" (scipy, rtol=tol).

    Returns a :class:`CoefficientTrajectory`.
    """
    g0 = np.asarray(g0, dtype=float)
    if g0.shape != (a.dim,):
        raise ValueError(f"g0 has shape {g0.shape}, expected ({a.dim},)")
    if np.linalg.norm(g0) == 0.0:
        raise ValueError("|g0| must be positive")
    times = np.asarray(times, dtype=float)
    if len(times) < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing with >= 2 points")

    def f(t, g):
        return -_real_generator(a, t) @ g

    if method == "rk4":
        vectors = rk4_path(f, g0, times)
    elif method == "rk45":
        from scipy.integrate import solve_ivp

        sol = solve_ivp(f, (times[0], times[-1]), g0, method="RK45",
                        t_eval=times, rtol=tol, atol=tol * 1e-2, max_step=np.inf)
        if not sol.success:
            raise IntegrationError(sol.message, sol.t[-1] if len(sol.t) else times[0])
        vectors = sol.y.T
        if not np.all(np.isfinite(vectors)):
            raise IntegrationError("non-finite state", times[-1])
    else:
        raise ValueError(f"unknown method {method!r}")

    return CoefficientTrajectory(times, vectors, a.basis, a.labels, a.indices)


@dataclass(frozen=True)
class EvolutionOperator:
    """Propagator samples U(t_k; t_0) on a grid, U(t_0) = identity."""

    times: np.ndarray
    matrices: np.ndarray         # (len(times), d, d) complex

    @property
    def dim(self):
        return self.matrices.shape[1]

    def unitarity_drift(self):
        eye = np.eye(self.dim)
        errs = [np.linalg.norm(u.conj().T @ u - eye) for u in self.matrices]
        return float(max(errs))

    def evolve(self, psi0):
        """States U(t_k) psi0 for all grid points, shape (len(times), d)."""
        psi0 = np.asarray(psi0, dtype=complex)
        return np.einsum("kij,j->ki", self.matrices, psi0)


def schrodinger_oracle(h, times, method="rk4", tol=1e-10):
    """Integrate dU/dt = -i H(t) U on the grid (the ground-truth propagator).

    No unitarity renormalization is applied; use ``unitarity_drift`` on the
    result to see the accumulated integrator error.
    """
    times = np.asarray(times, dtype=float)
    d = h.matrix(times[0]).shape[0]
    u0 = np.eye(d, dtype=complex)

    def f(t, u):
        return -1j * (h.matrix(t) @ u)

    if method == "rk4":
        mats = rk4_path(f, u0, times)
    elif method == "rk45":
        from scipy.integrate import solve_ivp

        sol = solve_ivp(lambda t, y: f(t, y.reshape(d, d)).ravel(),
                        (times[0], times[-1]), u0.ravel(), method="RK45",
                        t_eval=times, rtol=tol, atol=tol * 1e-2)
        if not sol.success:
            raise IntegrationError(sol.message, sol.t[-1] if len(sol.t) else times[0])
        mats = sol.y.T.reshape(len(times), d, d)
        if not np.all(np.isfinite(mats)):
            raise IntegrationError("non-finite propagator", times[-1])
    else:
        raise ValueError(f"unknown method {method!r}")
    return EvolutionOperator(times, mats)


@dataclass(frozen=True)
class So5Report:
    """Conservation diagnostics of the five-dimensional disjoint sector.

    ``xy_drift`` tracks g_X1^2 + g_Y1^2, which is exactly conserved when the
    couplings vanish (the sector splits into a 3-block and a 2-block) and
    drifts at first order in the couplings otherwise.  ``frequency`` is the
    measured angular rate of the decoupled (X1, Y1) rotation, estimated from
    zero crossings; analytically it equals |h1_z| for constant h1_z.
    """

    xy_drift: float
    xy_values: np.ndarray
    frequency: float


def _zero_crossing_frequency(times, signal):
    s = np.asarray(signal)
    sign = np.sign(s)
    sign[sign == 0] = 1
    flips = np.flatnonzero(np.diff(sign) != 0)
    if len(flips) < 2:
        return float("nan")
    # linear interpolation of each crossing time
    crossings = []
    for k in flips:
        t0, t1 = times[k], times[k + 1]
        y0, y1 = s[k], s[k + 1]
        crossings.append(t0 - y0 * (t1 - t0) / (y1 - y0))
    gaps = np.diff(crossings)
    return float(np.pi / np.mean(gaps))


def so5_dtype_solve(h, g0, times, method="rk4", tol=1e-10):
    """Integrate the 5-dimensional disjoint sector {ZX, ZY, ZZ, X1, Y1}.

    Requires the general blockable pattern (J_x, J_y, full second-qubit
    field, h1_z; everything else identically zero); raises
    :class:`CaseMismatchError` otherwise.  Couplings may be zero here even
    though the family normally requires one: the decoupled limit is the
    reference point for the conservation diagnostics.
    """
    allowed = {"J_x", "J_y", "h1_z", "h2_x", "h2_y", "h2_z"}
    extra = set(h.active_names(times)) - allowed
    if extra:
        raise CaseMismatchError(
            f"coefficients {sorted(extra)} are active; the 10+5 split needs"
            f" the pattern {sorted(allowed)}")

    basis = spinor_basis()
    a = adjoint_rep(h, basis)
    block = a.restrict([basis.index(l) for l in SO5_D_LABELS])
    traj = solve_adjoint(block, g0, times, method=method, tol=tol)

    ix = SO5_D_LABELS.index("X1")
    iy = SO5_D_LABELS.index("Y1")
    xy = traj.vectors[:, ix] ** 2 + traj.vectors[:, iy] ** 2
    report = So5Report(
        xy_drift=float(np.abs(xy - xy[0]).max()),
        xy_values=xy,
        frequency=_zero_crossing_frequency(traj.times, traj.vectors[:, ix]),
    )
    return traj, report
