"""Linear stability of stationary states.

Fluctuations (u, v) around a stationary state obey a coupled second-order
system with the same delta wells (conjugated for v) and an eigenvalue omega;
real omega means stable oscillation, a positive imaginary part exponential
growth.  The functions u and v are integrated outward from x = 0 like the
stationary states; u(0), Re v(0) (the fluctuation phase is fixed by making
Im v(0) = 0), u'(0), v'(0) and omega form a nine-dimensional root search
closed by decaying tails and the normalization of u + v*.

The norm-independent variant of the nonlinearity adds rank-one source terms
proportional to the overlap integral S of (u, v) with the stationary state;
S is guessed, compared with its quadrature and carried as two extra unknowns
(eleven-dimensional search).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import oracle
from .numerics import (JumpCondition, NewtonError, Trajectory, bisect,
                       integrate_final, integrate_piecewise, newton_solve,
                       sample_trajectory)
from .stationary import (Branch, BranchCurve, BranchTracker, NoSolutionError,
                         NotFoundError, Side, StationaryState, TrapParams,
                         delta_coefficient, delta_jump)


class BdgVariant(Enum):
    STANDARD = "standard"
    MODIFIED = "modified"   # norm-independent nonlinearity


class Classification(Enum):
    OSCILLATORY = "oscillatory"   # omega real
    UNSTABLE = "unstable"         # Im omega > 0

IM_OMEGA_TOL = 1e-8   # classification threshold; also excludes zero modes
ZERO_MODE_TOL = 1e-8


@dataclass(frozen=True)
class BdgUnknowns:
    """Root-search unknowns; s is carried only by the modified variant."""

    u0: complex
    v0_re: float
    du0: complex
    dv0: complex
    omega: complex
    s: complex | None = None

    def to_vector(self) -> np.ndarray:
        head = [self.u0.real, self.u0.imag, self.v0_re,
                self.du0.real, self.du0.imag, self.dv0.real, self.dv0.imag,
                self.omega.real, self.omega.imag]
        if self.s is not None:
            head += [self.s.real, self.s.imag]
        return np.array(head)

    @classmethod
    def from_vector(cls, v) -> "BdgUnknowns":
        s = complex(v[9], v[10]) if len(v) == 11 else None
        return cls(u0=complex(v[0], v[1]), v0_re=float(v[2]),
                   du0=complex(v[3], v[4]), dv0=complex(v[5], v[6]),
                   omega=complex(v[7], v[8]), s=s)

    def with_omega(self, omega: complex) -> "BdgUnknowns":
        return replace(self, omega=omega)


def bdg_jumps(side: Side, gamma: float, b: float, which: str) -> JumpCondition:
    """Jump condition for u ('u': same wells as the stationary equation) or
    v ('v': complex-conjugated well coefficients)."""
    c = delta_coefficient(side, gamma)
    if which == "v":
        c = np.conj(c)
    elif which != "u":
        raise ValueError("which must be 'u' or 'v'")
    m = np.array([[1.0, 0.0], [c, 1.0]], dtype=complex)
    return JumpCondition(position=side.value * b, transform=m)


def bdg_rhs(x: float, u: complex, v: complex, state: StationaryState,
            omega: complex, s: complex | None = None) -> tuple[complex, complex]:
    """(u'', v'') away from the wells, with the optional norm-feedback source
    terms -g |psi0|^2 psi0 S and -g |psi0|^2 psi0* S of the norm-independent
    variant."""
    p = state.dense_field().value(float(x))
    g = state.params.g
    k2 = state.kappa * state.kappa
    ap = p.real * p.real + p.imag * p.imag
    uu = (k2 - omega + 2.0 * g * ap) * u + g * p * p * v
    vv = (np.conj(k2) + omega + 2.0 * g * ap) * v + g * np.conj(p) * np.conj(p) * u
    if s is not None:
        uu -= g * ap * p * s
        vv -= g * ap * np.conj(p) * s
    return uu, vv


def _bdg_jump_matrix(side: Side, gamma: float, dim: int) -> np.ndarray:
    cu = delta_coefficient(side, gamma)
    m = np.eye(dim, dtype=complex)
    m[1, 0] = cu
    m[3, 2] = np.conj(cu)
    return m


def _bdg_setup(state: StationaryState, omega: complex, s: complex | None):
    """rhs over (u, u', v, v', z[, sq]) with z' = |u + v*|^2 and, in the
    modified variant, sq' = v psi0 + u psi0*."""
    fld = state.dense_field()
    g = state.params.g
    k2 = state.kappa * state.kappa
    k2c = np.conj(k2)
    cu = k2 - omega
    cv = k2c + omega
    gamma, b = state.params.gamma, state.params.b
    modified = s is not None
    dim = 6 if modified else 5

    if modified:
        def rhs(x, y):
            u, du, v, dv = y[0], y[1], y[2], y[3]
            p = fld.value(x)
            ap = p.real * p.real + p.imag * p.imag
            pc = p.conjugate()
            gap = g * ap
            upv = u + v.conjugate()
            return (du, (cu + 2.0 * gap) * u + g * p * p * v - gap * p * s,
                    dv, (cv + 2.0 * gap) * v + g * pc * pc * u - gap * pc * s,
                    upv.real * upv.real + upv.imag * upv.imag,
                    v * p + u * pc)
    else:
        def rhs(x, y):
            u, du, v, dv = y[0], y[1], y[2], y[3]
            p = fld.value(x)
            ap = p.real * p.real + p.imag * p.imag
            pc = p.conjugate()
            gap = g * ap
            upv = u + v.conjugate()
            return (du, (cu + 2.0 * gap) * u + g * p * p * v,
                    dv, (cv + 2.0 * gap) * v + g * pc * pc * u,
                    upv.real * upv.real + upv.imag * upv.imag)

    jr = [JumpCondition(b, _bdg_jump_matrix(Side.RIGHT, gamma, dim))]
    jl = [JumpCondition(-b, np.linalg.inv(_bdg_jump_matrix(Side.LEFT, gamma, dim)))]
    return rhs, jr, jl, dim


def decay_exponents(state: StationaryState, omega: complex) -> tuple[complex, complex]:
    """Tail decay rates of u and v: sqrt(kappa^2 - omega) and
    sqrt((kappa^2)* + omega), principal branch (Re >= 0)."""
    k2 = state.kappa * state.kappa
    return np.sqrt(complex(k2 - omega)), np.sqrt(complex(np.conj(k2) + omega))


def bdg_residual(unknowns: BdgUnknowns, state: StationaryState) -> np.ndarray:
    """Nine (eleven with S) real defects: logarithmic-derivative decay of u
    and v at both ends (each damped by its own tail growth factor, as in the
    stationary residual), the normalization of u + v*, and in the modified
    variant the mismatch between the guessed and the integrated S."""
    rhs, jr, jl, dim = _bdg_setup(state, unknowns.omega, unknowns.s)
    y0 = [unknowns.u0, unknowns.du0, complex(unknowns.v0_re), unknowns.dv0, 0.0j]
    if dim == 6:
        y0.append(0.0j)
    cfg = state.params.integrator
    yr = integrate_final(rhs, jr, 0.0, state.params.x_max, y0, cfg)
    yl = integrate_final(rhs, jl, 0.0, -state.params.x_max, y0, cfg)
    qu, qv = decay_exponents(state, unknowns.omega)
    width = state.params.x_max - state.params.b
    su = math.exp(-max(qu.real, 0.0) * width)
    sv = math.exp(-max(qv.real, 0.0) * width)
    dup_raw = yr[1] + qu * yr[0]
    dum_raw = yl[1] - qu * yl[0]
    dvp_raw = yr[3] + qv * yr[2]
    dvm_raw = yl[3] - qv * yl[2]
    # same root-preserving conditioning as the stationary residual: the
    # normalization row blows up quadratically with tail contamination
    ku = max(qu.real, 0.05)
    kv = max(qv.real, 0.05)
    blowup = 1.0 + 32.0 * ((abs(dup_raw) ** 2 + abs(dum_raw) ** 2) / (8.0 * ku ** 3)
                           + (abs(dvp_raw) ** 2 + abs(dvm_raw) ** 2) / (8.0 * kv ** 3))
    out = [(dup_raw * su).real, (dup_raw * su).imag,
           (dum_raw * su).real, (dum_raw * su).imag,
           (dvp_raw * sv).real, (dvp_raw * sv).imag,
           (dvm_raw * sv).real, (dvm_raw * sv).imag,
           ((yr[4] - yl[4]).real - 1.0) / blowup]
    if unknowns.s is not None:
        s_quad = yr[5] - yl[5]
        ds = unknowns.s - s_quad
        out += [ds.real, ds.imag]
    return np.array(out)


@dataclass
class BdgSolution:
    """One converged fluctuation eigenmode."""

    state: StationaryState
    variant: BdgVariant
    omega: complex
    unknowns: BdgUnknowns
    xs: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    normalization: float
    s_integral: complex | None
    residual_norm: float
    newton_iterations: int
    _traj_right: Trajectory = field(repr=False)
    _traj_left: Trajectory = field(repr=False)

    @property
    def classification(self) -> Classification:
        return (Classification.UNSTABLE if self.omega.imag > IM_OMEGA_TOL
                else Classification.OSCILLATORY)

    def quadruplet(self) -> tuple[complex, complex, complex, complex]:
        """The full eigenvalue family implied by the two symmetries."""
        w = self.omega
        return (w, -np.conj(w), np.conj(w), -w)

    def sample(self, xq) -> np.ndarray:
        """u + v* at arbitrary points, with exponential tails beyond x_max."""
        xq = np.asarray(xq, dtype=float)
        xm = self.state.params.x_max
        qu, qv = decay_exponents(self.state, self.omega)
        inside = np.abs(xq) <= xm
        out = np.empty(len(xq), dtype=complex)
        xin = xq[inside]
        ur = sample_trajectory(self._traj_right, xin[xin >= 0.0])
        vr = sample_trajectory(self._traj_right, xin[xin >= 0.0], component=2)
        ul = sample_trajectory(self._traj_left, xin[xin < 0.0])
        vl = sample_trajectory(self._traj_left, xin[xin < 0.0], component=2)
        val = np.empty(len(xin), dtype=complex)
        val[xin >= 0.0] = ur + np.conj(vr)
        val[xin < 0.0] = ul + np.conj(vl)
        out[inside] = val
        uR = self._traj_right.ys[-1, 0]
        vR = self._traj_right.ys[-1, 2]
        uL = self._traj_left.ys[-1, 0]
        vL = self._traj_left.ys[-1, 2]
        for i in np.where(~inside)[0]:
            x = xq[i]
            if x > xm:
                out[i] = (uR * np.exp(-qu * (x - xm))
                          + np.conj(vR * np.exp(-qv * (x - xm))))
            else:
                out[i] = (uL * np.exp(qu * (x + xm))
                          + np.conj(vL * np.exp(qv * (x + xm))))
        return out


def solve_bdg(state: StationaryState, guess: BdgUnknowns,
              variant: BdgVariant = BdgVariant.STANDARD) -> BdgSolution:
    """Newton-solve the fluctuation problem around a converged state."""
    if variant is BdgVariant.MODIFIED and guess.s is None:
        guess = replace(guess, s=0.0j)
    if variant is BdgVariant.STANDARD and guess.s is not None:
        guess = replace(guess, s=None)
    try:
        vec, diag = newton_solve(lambda v: bdg_residual(
            BdgUnknowns.from_vector(v), state), guess.to_vector(), state.params.newton)
    except NewtonError as exc:
        raise NoSolutionError(f"fluctuation solve failed: {exc}") from exc
    u = BdgUnknowns.from_vector(vec)
    rhs, jr, jl, dim = _bdg_setup(state, u.omega, u.s)
    y0 = [u.u0, u.du0, complex(u.v0_re), u.dv0, 0.0j]
    if dim == 6:
        y0.append(0.0j)
    cfg = state.params.integrator
    tr = integrate_piecewise(rhs, jr, 0.0, state.params.x_max, y0, cfg,
                             sample_spacing=0.25)
    tl = integrate_piecewise(rhs, jl, 0.0, -state.params.x_max, y0, cfg,
                             sample_spacing=0.25)
    xs = np.concatenate([tl.xs[::-1], tr.xs[1:]])
    uu = np.concatenate([tl.ys[::-1, 0], tr.ys[1:, 0]])
    vv = np.concatenate([tl.ys[::-1, 2], tr.ys[1:, 2]])
    norm = float((tr.ys[-1, 4] - tl.ys[-1, 4]).real)
    s_int = complex(tr.ys[-1, 5] - tl.ys[-1, 5]) if dim == 6 else None
    return BdgSolution(state=state, variant=variant, omega=u.omega, unknowns=u,
                       xs=xs, u=uu, v=vv, normalization=norm, s_integral=s_int,
                       residual_norm=diag.residual_norm,
                       newton_iterations=diag.iterations,
                       _traj_right=tr, _traj_left=tl)


def swap_partner_unknowns(sol: BdgSolution) -> BdgUnknowns:
    """Unknowns of the partner mode (v*, u*, -omega*), re-phased so the
    fluctuation gauge Im v(0) = 0 holds again."""
    u = sol.unknowns
    u0n = complex(u.v0_re)            # conj of v(0), v(0) real by gauge
    v0n = np.conj(u.u0)
    du0n = np.conj(u.dv0)
    dv0n = np.conj(u.du0)
    phase = 1.0 + 0.0j
    if abs(v0n) > 1e-14:
        phase = abs(v0n) / v0n
    sn = None if u.s is None else np.conj(u.s) * phase
    return BdgUnknowns(u0=u0n * phase, v0_re=(v0n * phase).real,
                       du0=du0n * phase, dv0=dv0n * phase,
                       omega=-np.conj(u.omega), s=sn)


def pt_partner_unknowns(sol: BdgSolution) -> BdgUnknowns:
    """Unknowns of the parity-time image (u*(-x), v*(-x), omega*); a valid
    solution whenever the underlying stationary state is PT symmetric."""
    u = sol.unknowns
    return BdgUnknowns(u0=np.conj(u.u0), v0_re=u.v0_re,
                       du0=-np.conj(u.du0), dv0=-np.conj(u.dv0),
                       omega=np.conj(u.omega),
                       s=None if u.s is None else np.conj(u.s))


def effective_nonlinearity(norm: float, g: float) -> float:
    """Interaction strength a wavefunction of squared norm N mimics: N g."""
    if norm <= 0.0:
        raise ValueError("norm must be positive")
    return norm * g


# ---------------------------------------------------------------------------
# Seeding and tracking along gamma
# ---------------------------------------------------------------------------

def linear_bdg_guess(state: StationaryState) -> BdgUnknowns:
    """Decoupled g = 0 guess around a symmetric state: u is the other linear
    eigenfunction, v = 0, omega the difference of squared decay constants."""
    p = state.params
    roots = oracle.linear_spectrum(p.gamma, p.b)
    if len(roots) < 2:
        raise NoSolutionError("linear double-well has no second bound state here")
    k0 = min(roots, key=lambda r: abs(r - state.kappa))
    others = [r for r in roots if abs(r - k0) > 1e-9]
    q = max(others, key=lambda r: r.real)
    omega = state.kappa * state.kappa - q * q
    lin = oracle.linear_eigenfunction(p.gamma, p.b, q, x_max=p.x_max)
    return BdgUnknowns(u0=complex(lin.psi(0.0)), v0_re=0.0,
                       du0=complex(lin.dpsi(0.0)), dv0=0.0j, omega=omega)


def solve_bdg_linear(state: StationaryState,
                     variant: BdgVariant = BdgVariant.STANDARD) -> BdgSolution:
    """Fluctuation mode of a g = 0 state, built from the matched linear
    eigenfunctions instead of a root search (the search gauge degenerates
    when the coupling vanishes)."""
    guess = linear_bdg_guess(state)
    if variant is BdgVariant.MODIFIED:
        guess = replace(guess, s=0.0j)
    rhs, jr, jl, dim = _bdg_setup(state, guess.omega, guess.s)
    y0 = [guess.u0, guess.du0, complex(guess.v0_re), guess.dv0, 0.0j]
    if dim == 6:
        y0.append(0.0j)
    cfg = state.params.integrator
    tr = integrate_piecewise(rhs, jr, 0.0, state.params.x_max, y0, cfg,
                             sample_spacing=0.25)
    tl = integrate_piecewise(rhs, jl, 0.0, -state.params.x_max, y0, cfg,
                             sample_spacing=0.25)
    s_int = None
    if dim == 6:
        # the sources carry a factor g = 0, so S is free; set it to its own
        # quadrature to close the two extra conditions
        s_int = complex(tr.ys[-1, 5] - tl.ys[-1, 5])
        guess = replace(guess, s=s_int)
    res = bdg_residual(guess, state)
    xs = np.concatenate([tl.xs[::-1], tr.xs[1:]])
    return BdgSolution(state=state, variant=variant, omega=guess.omega,
                       unknowns=guess, xs=xs,
                       u=np.concatenate([tl.ys[::-1, 0], tr.ys[1:, 0]]),
                       v=np.concatenate([tl.ys[::-1, 2], tr.ys[1:, 2]]),
                       normalization=float((tr.ys[-1, 4] - tl.ys[-1, 4]).real),
                       s_integral=s_int,
                       residual_norm=float(np.max(np.abs(res))),
                       newton_iterations=0, _traj_right=tr, _traj_left=tl)


class StabilityTracker:
    """Cached fluctuation eigenvalues along the ground branch of one family.

    The gamma = 0 mode is reached by continuation in g along the cached
    bootstrap curve of the branch tracker, starting from the analytic
    decoupled guess at weak coupling; gamma tracking then reuses the nearest
    converged mode as the Newton seed, trying real and imaginary omega
    variants near the corner where the eigenvalue changes character.
    """

    GAMMA_STEP = 0.025

    def __init__(self, tracker: BranchTracker, variant: BdgVariant):
        self.tracker = tracker
        self.variant = variant
        self._sols: dict[float, BdgSolution] = {}

    def _seed_gamma0(self) -> BdgSolution:
        params = self.tracker.params
        if params.g == 0.0:
            sol = solve_bdg_linear(self.tracker.ground(0.0), self.variant)
            self._sols[0.0] = sol
            return sol
        # subsample the bootstrap curve to ~0.1 spacing in g, skipping the
        # weakest couplings where the fluctuation gauge is ill conditioned
        curve = [(gv, st) for gv, st in self.tracker.ground_g_curve()
                 if abs(gv) >= 0.045]
        if not curve:
            curve = [self.tracker.ground_g_curve()[-1]]
        chain = [curve[0]]
        for gv, st in curve[1:]:
            if abs(gv - chain[-1][0]) >= 0.0999 or gv == curve[-1][0]:
                chain.append((gv, st))
        guess = linear_bdg_guess(chain[0][1])
        sol = None
        for _gv, st in chain:
            sol = solve_bdg(st, guess, self.variant)
            guess = sol.unknowns
        self._sols[0.0] = sol
        return sol

    def _nearest(self, gamma: float) -> BdgSolution | None:
        if not self._sols:
            return None
        key = min(self._sols, key=lambda g: abs(g - gamma))
        return self._sols[key]

    def solution_at(self, gamma: float) -> BdgSolution:
        if gamma in self._sols:
            return self._sols[gamma]
        if self.tracker.params.g == 0.0:
            # decoupled case: built from the matched linear eigenfunctions
            sol = solve_bdg_linear(self.tracker.ground(gamma), self.variant)
            self._sols[gamma] = sol
            return sol
        near = self._nearest(gamma)
        if near is None:
            near = self._seed_gamma0()
            if gamma == 0.0:
                return near
        g0 = near.state.params.gamma
        sol = near
        # walk toward the requested gamma in bounded steps
        remaining = gamma - g0
        while abs(remaining) > 1e-13:
            step = math.copysign(min(self.GAMMA_STEP, abs(remaining)), remaining)
            gv = g0 + step if abs(remaining) > self.GAMMA_STEP else gamma
            state = self.tracker.ground(gv)
            sol = self._solve_with_ladder(state, sol)
            self._sols[gv] = sol
            g0, remaining = gv, gamma - gv
        return sol

    def _solve_with_ladder(self, state: StationaryState, near: BdgSolution) -> BdgSolution:
        """Try the previous unknowns and, near the eigenvalue corner, real and
        imaginary omega variants; reject the trivial zero mode."""
        w = near.omega
        ladder = [w]
        if abs(w) < 0.12:
            aw = max(abs(w), 1e-3)
            ladder += [complex(aw, 0.0), complex(0.0, aw),
                       complex(0.6 * aw, 0.0), complex(0.0, 1.6 * aw)]
        best = None
        for wtry in ladder:
            try:
                sol = solve_bdg(state, near.unknowns.with_omega(wtry), self.variant)
            except NoSolutionError:
                continue
            if abs(sol.omega) <= ZERO_MODE_TOL:
                continue  # scaling/phase zero mode, not the tracked eigenvalue
            sol = self._canonical(sol)
            if best is None or sol.residual_norm < best.residual_norm:
                best = sol
        if best is None:
            raise NoSolutionError(
                f"no nonzero fluctuation eigenvalue found at gamma = "
                f"{state.params.gamma:.6f}")
        return best

    def _canonical(self, sol: BdgSolution) -> BdgSolution:
        """First-quadrant representative via the two symmetries."""
        w = sol.omega
        if w.real < -1e-12:
            sol = solve_bdg(sol.state, swap_partner_unknowns(sol), self.variant)
            w = sol.omega
        if w.imag < -IM_OMEGA_TOL and sol.state.pt_symmetric:
            sol = solve_bdg(sol.state, pt_partner_unknowns(sol), self.variant)
        return sol


@dataclass
class StabilityCurve:
    """omega along a branch; solver failures leave gaps (omega None)."""

    variant: BdgVariant
    points: list  # [(gamma, omega | None, Classification | None)]

    def rows(self):
        for gv, w, cl in self.points:
            if w is None:
                yield (gv, math.nan, math.nan, "gap")
            else:
                yield (gv, w.real, w.imag, cl.value)

    def flips(self) -> int:
        kinds = [cl for _, w, cl in self.points if w is not None]
        return sum(1 for a, b in zip(kinds, kinds[1:]) if a is not b)


def track_stability(branch: BranchCurve, tracker: BranchTracker | None = None,
                    variant: BdgVariant = BdgVariant.STANDARD) -> StabilityCurve:
    """Fluctuation eigenvalue at every point of a stationary branch curve."""
    if not branch.points:
        raise ValueError("branch curve is empty")
    first_state = branch.points[0][1]
    tracker = tracker or BranchTracker(first_state.params)
    stab = StabilityTracker(tracker, variant)
    out = StabilityCurve(variant, [])
    for gv, _state in branch.points:
        try:
            sol = stab.solution_at(gv)
            out.points.append((gv, sol.omega, sol.classification))
        except (NoSolutionError, NotFoundError):
            out.points.append((gv, None, None))
    return out


def locate_stability_change(params: TrapParams,
                            variant: BdgVariant = BdgVariant.STANDARD,
                            tracker: BranchTracker | None = None,
                            bracket_tol: float = 1e-6) -> float:
    """Gamma at which Im omega of the tracked ground-branch mode first
    exceeds the classification threshold, refined by bisection."""
    tracker = tracker or BranchTracker(params)
    stab = StabilityTracker(tracker, variant)
    end = tracker.branch_end(Branch.GROUND)
    gamma = 0.0
    prev = None
    while gamma < end - 1e-9:
        sol = stab.solution_at(gamma)
        if sol.omega.imag > IM_OMEGA_TOL:
            break
        prev = gamma
        gamma = min(gamma + StabilityTracker.GAMMA_STEP, end - 2e-4)
        if prev == gamma:
            break
    else:
        raise NotFoundError("no stability change below the end of the ground branch")
    if prev is None:
        raise NotFoundError("ground state already unstable at gamma = 0")
    if stab.solution_at(gamma).omega.imag <= IM_OMEGA_TOL:
        raise NotFoundError("no stability change below the end of the ground branch")

    def f(gv: float) -> float:
        return stab.solution_at(gv).omega.imag - IM_OMEGA_TOL

    return bisect(f, prev, gamma, bracket_tol)


@dataclass
class DeltaGammaResult:
    g: float
    variant: BdgVariant
    gamma_kappa: float
    gamma_omega: float

    @property
    def delta_gamma(self) -> float:
        return self.gamma_kappa - self.gamma_omega


def delta_gamma(params: TrapParams,
                variant: BdgVariant = BdgVariant.STANDARD) -> DeltaGammaResult:
    """Both bifurcation markers and their gap for one configuration."""
    from .stationary import locate_pitchfork
    tracker = BranchTracker(params)
    gk = locate_pitchfork(params, tracker=tracker)
    gw = locate_stability_change(params, variant=variant, tracker=tracker)
    return DeltaGammaResult(g=params.g, variant=variant,
                            gamma_kappa=gk, gamma_omega=gw)
