"""Shared numerical infrastructure.

Adaptive Dormand-Prince 5(4) integration of small complex ODE systems with
interior jump conditions, Hermite-based quadrature over trajectories, a damped
Newton root search with finite-difference Jacobian, and scalar bisection.

The integrator works on plain Python lists of complex scalars: the systems in
this package have 2-6 components, where attribute access and tiny-array
overhead of ndarray-based steppers dominates the actual arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class NumericsError(Exception):
    """Base class for numerical failures in this package."""


class IntegrationError(NumericsError):
    """Step size underflow; carries the last x that was reached."""

    def __init__(self, message, last_x):
        super().__init__(message)
        self.last_x = last_x


class InvalidStateError(NumericsError):
    """NaN produced by the right-hand side."""


class NewtonError(NumericsError):
    """Newton did not reach the residual tolerance; carries the best iterate."""

    def __init__(self, message, best, residual_norm, iterations):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm
        self.iterations = iterations


class SingularJacobianError(NumericsError):
    """Finite-difference Jacobian is rank deficient."""


class BracketError(NumericsError):
    """Bisection endpoints do not bracket a sign change."""


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_step: float = 0.5
    initial_step: float = 0.05

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_step", "initial_step"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-10
    max_iterations: int = 40
    fd_step: float = 1e-7
    damping: float = 0.5  # backtracking factor per halving

    def __post_init__(self):
        if self.residual_tol <= 0.0 or self.fd_step <= 0.0:
            raise ValueError("residual_tol and fd_step must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class JumpCondition:
    """Linear transform applied to the state when the integration crosses
    ``position``.

    The transform is applied exactly as given; a caller integrating in the
    negative direction passes the inverted map (see :meth:`inverted`).
    """

    position: float
    transform: np.ndarray

    def apply(self, y: list) -> list:
        t = self.transform
        n = len(y)
        # plain-complex output keeps numpy scalars out of the stepper hot loop
        return [complex(sum(t[i, j] * y[j] for j in range(n))) for i in range(n)]

    def inverted(self) -> "JumpCondition":
        return JumpCondition(self.position, np.linalg.inv(self.transform))


@dataclass
class Trajectory:
    """Samples (x_i, y_i, y'_i) of one piecewise integration.

    Jump positions appear twice, once with the pre-jump and once with the
    post-jump state.  Derivatives are stored so that interval-wise cubic
    Hermite reconstruction (used by :func:`quadrature`) keeps the accuracy
    of the underlying fifth-order scheme.
    """

    xs: np.ndarray
    ys: np.ndarray
    fs: np.ndarray

    @property
    def final_state(self) -> list:
        return list(self.ys[-1])

    def __len__(self):
        return len(self.xs)


# Dormand-Prince 5(4) tableau (FSAL).
_DP_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.2, 0.3, 0.8, 8 / 9, 1.0, 1.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

RHS = Callable[[float, list], Sequence[complex]]


def _step_core(rhs: RHS, x0: float, x1: float, y0: list, cfg: IntegratorConfig,
               record, sample_spacing: float | None):
    """Adaptive DP45 over one smooth segment [x0, x1] (either direction).

    ``record`` is None or a list of (x, y, f) triples appended in place.
    ``sample_spacing`` caps |h| so recorded samples are at least that dense.
    """
    n = len(y0)
    rng = range(n)
    sgn = 1.0 if x1 >= x0 else -1.0
    span = abs(x1 - x0)
    if span == 0.0:
        return y0
    hmax = min(cfg.max_step, sample_spacing) if sample_spacing else cfg.max_step
    h = sgn * min(cfg.initial_step, span, hmax)
    x, y = x0, list(y0)
    f = list(rhs(x, y))
    if any(v != v for v in f):
        raise InvalidStateError(f"NaN in right-hand side at x={x}")
    if record is not None:
        record.append((x, list(y), list(f)))
    ks = [f, None, None, None, None, None, None]
    atol, rtol = cfg.abs_tol, cfg.rel_tol
    rejected_in_row = 0
    accepted = 0
    while sgn * (x1 - x) > 1e-14 * max(1.0, abs(x1)):
        if sgn * h > sgn * (x1 - x):
            h = x1 - x
        ytmp = y
        for s in range(6):
            a = _DP_A[s]
            ytmp = [0j] * n
            for i in rng:
                acc = a[0] * ks[0][i]
                for j in range(1, s + 1):
                    acc += a[j] * ks[j][i]
                ytmp[i] = y[i] + h * acc
            ks[s + 1] = list(rhs(x + _DP_C[s] * h, ytmp))
        ynew = ytmp  # stage 6 abscissa is 1 and its row equals the b-row
        k7 = ks[6]
        enorm = 0.0
        for i in rng:
            err = h * (_DP_E[0] * ks[0][i] + _DP_E[2] * ks[2][i] + _DP_E[3] * ks[3][i]
                       + _DP_E[4] * ks[4][i] + _DP_E[5] * ks[5][i] + _DP_E[6] * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            q = abs(err) / sc
            enorm += q * q
        enorm = math.sqrt(enorm / n)
        if enorm != enorm:  # NaN
            if any(v != v for v in k7) or any(v != v for v in ynew):
                raise InvalidStateError(f"NaN in right-hand side near x={x}")
            enorm = math.inf
        if enorm <= 1.0:
            x += h
            y = ynew
            ks[0] = k7
            rejected_in_row = 0
            accepted += 1
            for v in y:
                if abs(v.real) + abs(v.imag) > 1e12:
                    raise IntegrationError(f"state blow-up at x={x}", last_x=x)
            if record is not None:
                record.append((x, list(y), list(k7)))
        else:
            rejected_in_row += 1
        fac = 5.0 if enorm == 0.0 else 0.9 * enorm ** -0.2
        h *= min(5.0, max(0.1, fac))
        if sgn * h > hmax:
            h = sgn * hmax
        if abs(h) < 5e-15 * max(1.0, abs(x)) or rejected_in_row > 60:
            raise IntegrationError(f"step size underflow at x={x}", last_x=x)
        if accepted > 20_000:
            raise IntegrationError(f"step budget exhausted at x={x}", last_x=x)
    return y


def _split_segments(jumps: Sequence[JumpCondition], x_start: float, x_end: float):
    sgn = 1.0 if x_end >= x_start else -1.0
    prev = x_start
    for jc in jumps:
        if not (sgn * (jc.position - x_start) > 0 and sgn * (x_end - jc.position) > 0):
            raise ValueError(f"jump at {jc.position} not strictly inside "
                             f"({x_start}, {x_end})")
        if sgn * (jc.position - prev) <= 0:
            raise ValueError("jumps must be sorted along the integration direction")
        prev = jc.position


def integrate_piecewise(rhs: RHS, jumps: Sequence[JumpCondition], x_start: float,
                        x_end: float, y0: Sequence[complex], cfg: IntegratorConfig,
                        sample_spacing: float | None = None) -> Trajectory:
    """Integrate y' = rhs(x, y) from x_start to x_end applying each jump
    transform where the path crosses its position.

    Returns the full trajectory, with samples on both sides of every jump and
    at ``x_end``.  ``sample_spacing`` optionally caps the step size to force
    denser output.
    """
    if x_start == x_end:
        raise ValueError("x_start and x_end must differ")
    _split_segments(jumps, x_start, x_end)
    record: list = []
    y = [complex(v) for v in y0]
    xa = x_start
    for jc in jumps:
        y = _step_core(rhs, xa, jc.position, y, cfg, record, sample_spacing)
        y = jc.apply(y)
        f = list(rhs(jc.position, y))
        record.append((jc.position, list(y), f))
        xa = jc.position
    _step_core(rhs, xa, x_end, y, cfg, record, sample_spacing)
    xs = np.array([r[0] for r in record])
    ys = np.array([r[1] for r in record], dtype=complex)
    fs = np.array([r[2] for r in record], dtype=complex)
    return Trajectory(xs, ys, fs)


def integrate_final(rhs: RHS, jumps: Sequence[JumpCondition], x_start: float,
                    x_end: float, y0: Sequence[complex],
                    cfg: IntegratorConfig) -> list:
    """Like :func:`integrate_piecewise` but returns only the final state.

    This is the hot path of the shooting residuals; skipping trajectory
    recording saves roughly a quarter of the run time.
    """
    if x_start == x_end:
        raise ValueError("x_start and x_end must differ")
    _split_segments(jumps, x_start, x_end)
    y = [complex(v) for v in y0]
    xa = x_start
    for jc in jumps:
        y = _step_core(rhs, xa, jc.position, y, cfg, None, None)
        y = jc.apply(y)
        xa = jc.position
    return _step_core(rhs, xa, x_end, y, cfg, None, None)


# 4-point Gauss-Legendre on [0, 1].
_GL_T = (0.5 - 0.8611363115940526 / 2, 0.5 - 0.3399810435848563 / 2,
         0.5 + 0.3399810435848563 / 2, 0.5 + 0.8611363115940526 / 2)
_GL_W = (0.3478548451374538 / 2, 0.6521451548625461 / 2,
         0.6521451548625461 / 2, 0.3478548451374538 / 2)


def quadrature(trajectory: Trajectory,
               integrand: Callable[[float, np.ndarray], complex]) -> complex:
    """Integrate ``integrand(x, y(x))`` along a trajectory.

    Each interval is reconstructed by cubic Hermite interpolation from the
    stored states and derivatives and integrated with 4-point Gauss-Legendre,
    which keeps the quadrature error at the order of the integration error.
    """
    if len(trajectory) < 2:
        raise ValueError("trajectory needs at least 2 samples")
    xs, ys, fs = trajectory.xs, trajectory.ys, trajectory.fs
    total = 0.0 + 0.0j
    for i in range(len(xs) - 1):
        h = xs[i + 1] - xs[i]
        if h == 0.0:  # duplicate sample straddling a jump
            continue
        y0, y1 = ys[i], ys[i + 1]
        f0, f1 = fs[i], fs[i + 1]
        acc = 0.0 + 0.0j
        for t, w in zip(_GL_T, _GL_W):
            t2 = t * t
            t3 = t2 * t
            yv = ((1 - 3 * t2 + 2 * t3) * y0 + (3 * t2 - 2 * t3) * y1
                  + h * ((t - 2 * t2 + t3) * f0 + (t3 - t2) * f1))
            acc += w * integrand(xs[i] + t * h, yv)
        total += h * acc
    return total


def sample_trajectory(trajectory: Trajectory, xq, component: int = 0) -> np.ndarray:
    """Cubic-Hermite samples of one state component at query points xq.

    xs of the trajectory may run in either direction; queries must lie inside
    the covered range.  At a jump position the sample on the earlier side is
    used.
    """
    xs, ys, fs = trajectory.xs, trajectory.ys[:, component], trajectory.fs[:, component]
    sgn = 1.0 if xs[-1] >= xs[0] else -1.0
    u = sgn * xs
    xq = np.asarray(xq, dtype=float)
    uq = sgn * xq
    idx = np.searchsorted(u, uq, side="left")
    idx = np.clip(idx, 1, len(u) - 1)
    out = np.empty(len(uq), dtype=complex)
    for m, (q, i) in enumerate(zip(xq, idx)):
        x0, x1 = xs[i - 1], xs[i]
        h = x1 - x0
        if h == 0.0:
            out[m] = ys[i - 1]
            continue
        t = (q - x0) / h
        t2, t3 = t * t, t * t * t
        out[m] = ((1 - 3 * t2 + 2 * t3) * ys[i - 1] + (3 * t2 - 2 * t3) * ys[i]
                  + h * ((t - 2 * t2 + t3) * fs[i - 1] + (t3 - t2) * fs[i]))
    return out


class SegmentedCubicInterpolant:
    """Piecewise-cubic interpolation of complex samples on a few uniform
    segments joined at kink positions.

    Each segment keeps its own uniform grid so that derivative kinks at the
    joints never sit inside an interpolation stencil.  Evaluation is a plain
    4-point Lagrange formula, cheap enough for use inside integrator
    right-hand sides.
    """

    def __init__(self, segments):
        # segments: list of (x0, h, values ndarray) with ascending x0
        self.segments = []
        for x0, h, vals in segments:
            re = np.ascontiguousarray(vals.real)
            im = np.ascontiguousarray(vals.imag)
            self.segments.append((x0, h, 1.0 / h, re, im, len(vals)))
        self.x_min = self.segments[0][0]
        last = self.segments[-1]
        self.x_max = last[0] + last[1] * (last[5] - 1)

    def value(self, x: float) -> complex:
        seg = None
        for s in self.segments:
            x_end = s[0] + s[1] * (s[5] - 1)
            if x <= x_end or s is self.segments[-1]:
                seg = s
                break
        x0, h, inv_h, re, im, n = seg
        u = (x - x0) * inv_h
        i = int(u)
        if i < 1:
            i = 1
        elif i > n - 3:
            i = n - 3
        t = u - i
        # 4-point Lagrange weights on nodes {-1, 0, 1, 2} around node i
        tm = t - 1.0
        tp = t + 1.0
        t2m = t - 2.0
        w0 = -t * tm * t2m / 6.0
        w1 = tp * tm * t2m / 2.0
        w2 = -t * tp * t2m / 2.0
        w3 = t * tp * tm / 6.0
        j = i - 1
        return complex(w0 * re[j] + w1 * re[j + 1] + w2 * re[j + 2] + w3 * re[j + 3],
                       w0 * im[j] + w1 * im[j + 1] + w2 * im[j + 2] + w3 * im[j + 3])

    def values(self, xs) -> np.ndarray:
        return np.array([self.value(float(x)) for x in np.asarray(xs, dtype=float)],
                        dtype=complex)


@dataclass
class NewtonDiagnostics:
    iterations: int = 0
    residual_norm: float = math.inf
    jacobian_condition: float = 0.0
    residual_evaluations: int = 0


def _fd_jacobian(residual, x, r0, fd_step):
    n = len(x)
    jac = np.empty((len(r0), n))
    for i in range(n):
        xp = x.copy()
        xp[i] += fd_step
        jac[:, i] = (residual(xp) - r0) / fd_step
    return jac


def newton_solve(residual: Callable[[np.ndarray], np.ndarray], guess: Sequence[float],
                 cfg: NewtonConfig = NewtonConfig()) -> tuple[np.ndarray, NewtonDiagnostics]:
    """Damped Newton iteration with a forward-difference Jacobian.

    The Jacobian is rebuilt every iteration.  When the full step does not
    decrease the max-norm of the residual the step is shortened by repeated
    multiplication with ``cfg.damping`` (at most 8 times) and the best trial
    is taken.  Raises :class:`SingularJacobianError` for a rank-deficient
    Jacobian and :class:`NewtonError` when ``max_iterations`` is exhausted.
    """
    x = np.asarray(guess, dtype=float).copy()
    r = np.asarray(residual(x), dtype=float)
    if r.shape != x.shape:
        raise ValueError("residual dimension must equal guess dimension")
    diag = NewtonDiagnostics(residual_evaluations=1)
    norm = float(np.max(np.abs(r)))
    best_x, best_norm = x.copy(), norm
    stalls = 0
    for it in range(cfg.max_iterations):
        diag.iterations = it
        diag.residual_norm = norm
        if norm <= cfg.residual_tol:
            return x, diag
        try:
            jac = _fd_jacobian(residual, x, r, cfg.fd_step)
        except NumericsError as exc:
            raise NewtonError(f"Jacobian evaluation failed: {exc}", best_x,
                              best_norm, it) from exc
        diag.residual_evaluations += len(x)
        svals = np.linalg.svd(jac, compute_uv=False)
        diag.jacobian_condition = float(svals[0] / max(svals[-1], 1e-300))
        if svals[-1] <= 1e-12 * svals[0]:
            raise SingularJacobianError(
                f"Jacobian rank deficient (condition {diag.jacobian_condition:.2e})")
        if diag.jacobian_condition > 1e8:
            step = -np.linalg.lstsq(jac, r, rcond=1e-12)[0]
        else:
            step = -np.linalg.solve(jac, r)
        scale = 1.0
        trial_best = None
        for _ in range(9):  # full step plus at most 8 halvings
            xt = x + scale * step
            try:
                rt = np.asarray(residual(xt), dtype=float)
                nt = float(np.max(np.abs(rt)))
                if not math.isfinite(nt):
                    nt = math.inf
            except NumericsError:  # blow-up on a wild trial: keep backtracking
                rt, nt = None, math.inf
            diag.residual_evaluations += 1
            if trial_best is None or nt < trial_best[2]:
                trial_best = (xt, rt, nt)
            if nt < norm:
                break
            scale *= cfg.damping
        if trial_best[1] is None:
            raise NewtonError("all damped trial steps failed to evaluate",
                              best_x, best_norm, it + 1)
        if trial_best[2] >= norm:
            # mild uphill moves are tolerated twice in a row; a persistent
            # stall means the basin was missed
            stalls += 1
            if stalls > 2 or trial_best[2] > 4.0 * norm:
                raise NewtonError(f"stalled at residual {norm:.3e}",
                                  best_x, best_norm, it + 1)
        else:
            stalls = 0
        x, r, norm = trial_best
        if norm < best_norm:
            best_x, best_norm = x.copy(), norm
    diag.iterations = cfg.max_iterations
    diag.residual_norm = norm
    if norm <= cfg.residual_tol:
        return x, diag
    raise NewtonError(f"no convergence after {cfg.max_iterations} iterations "
                      f"(residual {best_norm:.3e})", best_x, best_norm,
                      cfg.max_iterations)


def bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Scalar bisection; returns the midpoint of the final bracket of width <= tol."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(f"no sign change on [{a}, {b}]")
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)
