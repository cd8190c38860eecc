"""Stationary states of the gain/loss double-delta condensate.

The wavefunction is integrated outward from x = 0 in both directions;
psi(0) (real by choice of the global phase), the complex psi'(0) and the
complex decay constant kappa form a five-dimensional root search closed by
decaying tails on both sides and unit norm.  On top of the single solve sit
branch continuation in gamma or g and the locators for the symmetry-breaking
bifurcation and the tangent bifurcation of the symmetric pair.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import oracle
from .numerics import (IntegratorConfig, JumpCondition, NewtonConfig, NewtonError,
                       NumericsError, SegmentedCubicInterpolant, Trajectory,
                       integrate_final, integrate_piecewise, newton_solve,
                       quadrature, sample_trajectory)


class NoSolutionError(NumericsError):
    """Newton did not converge to a stationary state from the given guess."""


class NotFoundError(NumericsError):
    """A requested bifurcation does not exist in the scanned range."""


class NonlinearityMode(Enum):
    NORM_DEPENDENT = "norm_dependent"
    NORM_INDEPENDENT = "norm_independent"


class Branch(Enum):
    GROUND = "ground"
    EXCITED = "excited"
    BROKEN_PLUS = "broken_plus"
    BROKEN_MINUS = "broken_minus"


class Side(Enum):
    LEFT = -1    # well at -b (loss)
    RIGHT = +1   # well at +b (gain)


PT_TOL = 1e-7         # max |psi(-x) - psi*(x)| for a symmetric state
IM_KAPPA_TOL = 1e-7   # |Im kappa| below this counts as a real eigenvalue


@dataclass(frozen=True)
class TrapParams:
    """Physical and numerical configuration of one solve."""

    gamma: float
    g: float
    b: float = 1.1
    nonlinearity_mode: NonlinearityMode = NonlinearityMode.NORM_DEPENDENT
    x_max: float | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError("gamma must be >= 0; a negative gamma is equivalent "
                             "to +gamma with x -> -x")
        if self.b <= 0.0:
            raise ValueError("b must be positive")
        if self.x_max is None:
            object.__setattr__(self, "x_max", self.b + 14.0)
        if self.x_max <= self.b + 5.0:
            raise ValueError("x_max must exceed b + 5 for reliable tail matching")

    def key(self):
        """Identity of the gamma-parametrized family this configuration belongs to."""
        return (self.g, self.b, self.nonlinearity_mode, self.x_max,
                self.integrator, self.newton)


def delta_coefficient(side: Side, gamma: float) -> complex:
    """Derivative-jump coefficient c in psi'(x+) - psi'(x-) = c psi(x)."""
    if side is Side.RIGHT:
        return -(1.0 - 1j * gamma)
    return -(1.0 + 1j * gamma)


def delta_jump(side: Side, gamma: float, b: float) -> JumpCondition:
    """Jump condition on (psi, psi') at the well position, oriented for
    integration in the +x direction."""
    c = delta_coefficient(side, gamma)
    m = np.array([[1.0, 0.0], [c, 1.0]], dtype=complex)
    return JumpCondition(position=side.value * b, transform=m)


def _embed_jump(jump: JumpCondition, dim: int, offset: int = 0) -> JumpCondition:
    m = np.eye(dim, dtype=complex)
    k = jump.transform.shape[0]
    m[offset:offset + k, offset:offset + k] = jump.transform
    return JumpCondition(jump.position, m)


def effective_g(params: TrapParams, norm_estimate: float = 1.0) -> float:
    if params.nonlinearity_mode is NonlinearityMode.NORM_INDEPENDENT:
        return params.g / norm_estimate
    return params.g


def gpe_rhs(x: float, psi: complex, dpsi: complex, kappa: complex,
            params: TrapParams, norm_estimate: float = 1.0) -> complex:
    """Second derivative of psi away from the wells:
    psi'' = (kappa^2 + g_eff |psi|^2) psi."""
    g = effective_g(params, norm_estimate)
    return (kappa * kappa + g * (psi.real ** 2 + psi.imag ** 2)) * psi


@dataclass(frozen=True)
class ShootingUnknowns:
    """The five real shooting parameters (psi(0) made real by the global phase)."""

    psi0: float
    dpsi0: complex
    kappa: complex

    def to_vector(self) -> np.ndarray:
        return np.array([self.psi0, self.dpsi0.real, self.dpsi0.imag,
                         self.kappa.real, self.kappa.imag])

    @classmethod
    def from_vector(cls, v) -> "ShootingUnknowns":
        return cls(psi0=float(v[0]), dpsi0=complex(v[1], v[2]), kappa=complex(v[3], v[4]))


def _shooting_setup(u: ShootingUnknowns, params: TrapParams):
    """rhs over (psi, psi', z) with z' = |psi|^2, and the two jump lists."""
    k2 = u.kappa * u.kappa
    g = effective_g(params)

    def rhs(x, y):
        p = y[0]
        d = p.real * p.real + p.imag * p.imag
        return (y[1], (k2 + g * d) * p, d)

    jr = [_embed_jump(delta_jump(Side.RIGHT, params.gamma, params.b), 3)]
    jl = [_embed_jump(delta_jump(Side.LEFT, params.gamma, params.b), 3).inverted()]
    return rhs, jr, jl


def _decay_scale(kappa: complex, params: TrapParams) -> float:
    """Absorbs the growth factor the integration applies to tail
    contamination, so the residual tolerance is meaningful at x_max."""
    return math.exp(-max(kappa.real, 0.0) * (params.x_max - params.b))


def shooting_residual(u: ShootingUnknowns, params: TrapParams) -> np.ndarray:
    """(Re, Im) of the decay defects psi' +/- kappa psi at +/-x_max plus the
    norm defect.

    Two root-preserving rescalings keep the system Newton-friendly without
    moving any root or changing the Jacobian there: the decay defects are
    damped by e^{-Re kappa (x_max - b)}, the factor by which growing-mode
    contamination (including integration round-off) is amplified over the
    tail; and the norm defect is divided by 1 + the quadratic norm blow-up
    that a given amount of growing-mode contamination produces, which
    otherwise dwarfs every other row away from a solution."""
    rhs, jr, jl = _shooting_setup(u, params)
    y0 = [complex(u.psi0), u.dpsi0, 0.0j]
    yr = integrate_final(rhs, jr, 0.0, params.x_max, y0, params.integrator)
    yl = integrate_final(rhs, jl, 0.0, -params.x_max, y0, params.integrator)
    s = _decay_scale(u.kappa, params)
    dp_raw = yr[1] + u.kappa * yr[0]
    dm_raw = yl[1] - u.kappa * yl[0]
    dp = dp_raw * s
    dm = dm_raw * s
    norm = (yr[2] - yl[2]).real
    # |A e^{kx}| contamination gives |d_raw|^2 = 4 k^2 |A|^2 e^{2k x_max} and
    # adds |d_raw|^2 / (8 k^3) to the norm integral; the extra factor 32
    # fades the (then uninformative) norm row below the decay rows while the
    # tails are unresolved
    k = max(u.kappa.real, 0.05)
    blowup = 1.0 + 32.0 * (abs(dp_raw) ** 2 + abs(dm_raw) ** 2) / (8.0 * k ** 3)
    return np.array([dp.real, dp.imag, dm.real, dm.imag, (norm - 1.0) / blowup])


@dataclass
class StationaryState:
    """One converged stationary solution."""

    params: TrapParams
    kappa: complex
    unknowns: ShootingUnknowns
    xs: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    branch: Branch
    pt_symmetric: bool
    pt_defect: float
    norm: float
    residual_norm: float
    newton_iterations: int
    _traj_right: Trajectory = field(repr=False)
    _traj_left: Trajectory = field(repr=False)
    _field: SegmentedCubicInterpolant | None = field(default=None, repr=False)

    @property
    def mu(self) -> complex:
        return -self.kappa * self.kappa

    def dense_field(self, spacing: float = 0.01) -> SegmentedCubicInterpolant:
        """Cubic interpolant of psi on uniform segments split at the wells.

        Built lazily from the stored trajectories; the segment split keeps the
        derivative kink at +/-b out of every interpolation stencil.
        """
        if self._field is None:
            b, xm = self.params.b, self.params.x_max
            segs = []
            for lo, hi in ((-xm, -b), (-b, b), (b, xm)):
                n = max(int(round((hi - lo) / spacing)), 8)
                xs = np.linspace(lo, hi, n + 1)
                traj = self._traj_left if hi <= 0 else self._traj_right
                if lo < 0.0 < hi:
                    vals = np.concatenate([
                        sample_trajectory(self._traj_left, xs[xs <= 0.0]),
                        sample_trajectory(self._traj_right, xs[xs > 0.0])])
                else:
                    vals = sample_trajectory(traj, xs)
                segs.append((lo, (hi - lo) / n, vals))
            self._field = SegmentedCubicInterpolant(segs)
        return self._field

    def sample(self, xq) -> np.ndarray:
        """psi at arbitrary points, continued by its decaying tails beyond x_max."""
        xq = np.asarray(xq, dtype=float)
        out = np.empty(len(xq), dtype=complex)
        fld = self.dense_field()
        xm = self.params.x_max
        pr = fld.value(xm)
        pl = fld.value(-xm)
        for i, x in enumerate(xq):
            if x > xm:
                out[i] = pr * np.exp(-self.kappa * (x - xm))
            elif x < -xm:
                out[i] = pl * np.exp(self.kappa * (x + xm))
            else:
                out[i] = fld.value(float(x))
        return out

    def wavefunction_rows(self):
        for x, p in zip(self.xs, self.psi):
            yield (x, p.real, p.imag)


def _pt_defect(traj_right: Trajectory, traj_left: Trajectory, x_max: float) -> float:
    xq = np.linspace(0.0, x_max, 401)
    right = sample_trajectory(traj_right, xq)
    left = sample_trajectory(traj_left, -xq)
    return float(np.max(np.abs(left - np.conj(right))))


def solve_stationary(params: TrapParams, guess: ShootingUnknowns,
                     branch: Branch | None = None) -> StationaryState:
    """Newton-solve the shooting problem from ``guess``.

    Raises NoSolutionError when Newton does not converge; converging onto a
    different branch than intended is left to the caller to detect.
    """
    try:
        vec, diag = newton_solve(lambda v: shooting_residual(
            ShootingUnknowns.from_vector(v), params), guess.to_vector(), params.newton)
    except NewtonError as exc:
        raise NoSolutionError(f"stationary solve failed: {exc}") from exc
    u = ShootingUnknowns.from_vector(vec)
    rhs, jr, jl = _shooting_setup(u, params)
    y0 = [complex(u.psi0), u.dpsi0, 0.0j]
    tr = integrate_piecewise(rhs, jr, 0.0, params.x_max, y0, params.integrator,
                             sample_spacing=0.25)
    tl = integrate_piecewise(rhs, jl, 0.0, -params.x_max, y0, params.integrator,
                             sample_spacing=0.25)
    norm = float((tr.ys[-1, 2] - tl.ys[-1, 2]).real)
    defect = _pt_defect(tr, tl, params.x_max)
    pt = defect < PT_TOL
    if branch is None:
        branch = (Branch.GROUND if pt else
                  Branch.BROKEN_PLUS if u.kappa.imag > 0 else Branch.BROKEN_MINUS)
    xs = np.concatenate([tl.xs[::-1], tr.xs[1:]])
    psi = np.concatenate([tl.ys[::-1, 0], tr.ys[1:, 0]])
    return StationaryState(params=params, kappa=u.kappa, unknowns=u, xs=xs, psi=psi,
                           branch=branch, pt_symmetric=pt, pt_defect=defect, norm=norm,
                           residual_norm=diag.residual_norm,
                           newton_iterations=diag.iterations,
                           _traj_right=tr, _traj_left=tl)


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------

def _normalize_unknowns(u: ShootingUnknowns, params: TrapParams) -> ShootingUnknowns:
    """Rescale amplitude so the finite-interval norm is 1 (exact at g = 0)."""
    rhs, jr, jl = _shooting_setup(u, params)
    y0 = [complex(u.psi0), u.dpsi0, 0.0j]
    yr = integrate_final(rhs, jr, 0.0, params.x_max, y0, params.integrator)
    yl = integrate_final(rhs, jl, 0.0, -params.x_max, y0, params.integrator)
    s = 1.0 / math.sqrt((yr[2] - yl[2]).real)
    return ShootingUnknowns(u.psi0 * s, u.dpsi0 * s, u.kappa)


def hermitian_linear_seeds(params: TrapParams) -> list[ShootingUnknowns]:
    """Analytic even/odd seeds of the g = 0, gamma = 0 problem (unit norm)."""
    base = replace(params, gamma=0.0, g=0.0)
    ke = oracle.linear_kappa_even(params.b)
    seeds = [_normalize_unknowns(ShootingUnknowns(1.0, 0.0j, complex(ke)), base)]
    ko = oracle.linear_kappa_odd(params.b)
    if ko > 0.0:
        seeds.append(_normalize_unknowns(ShootingUnknowns(0.0, complex(ko), complex(ko)),
                                         base))
    return seeds


def broken_seeds_from_ground(ground: StationaryState) -> list[ShootingUnknowns]:
    """Symmetry-broken guesses: the ground state with kappa pushed off the real
    axis by +/-0.01 i and psi multiplied by (1 +/- 0.05 i tanh(x/b))."""
    u = ground.unknowns
    b = ground.params.b
    out = []
    for s in (+1.0, -1.0):
        # d/dx [psi (1 + s 0.05 i tanh(x/b))] at 0 adds s 0.05 i psi(0)/b
        out.append(ShootingUnknowns(u.psi0,
                                    u.dpsi0 + s * 0.05j * u.psi0 / b,
                                    u.kappa + s * 0.01j))
    return out


def seed_states(params: TrapParams) -> list[ShootingUnknowns]:
    """Guesses for all states at ``params``: symmetric pair continued from the
    analytic linear limit (g first, steps <= 0.1, then gamma, steps <= 0.01),
    plus two symmetry-broken perturbations of the ground state when g < 0 and
    gamma > 0."""
    tracker = BranchTracker(params)
    seeds = [tracker.ground(params.gamma).unknowns]
    try:
        seeds.append(tracker.excited(params.gamma).unknowns)
    except (NoSolutionError, NotFoundError):
        pass
    if params.g < 0.0 and params.gamma > 0.0:
        seeds.extend(broken_seeds_from_ground(tracker.ground(params.gamma)))
    return seeds


# ---------------------------------------------------------------------------
# Continuation
# ---------------------------------------------------------------------------

@dataclass
class BranchCurve:
    """States of one branch along gamma or g."""

    parameter: str                      # "gamma" or "g"
    points: list                        # [(value, StationaryState)]
    terminated_at: float | None = None  # last attempted value after step underflow

    def values(self):
        return np.array([p[0] for p in self.points])

    def states(self):
        return [p[1] for p in self.points]

    def rows(self):
        for val, st in self.points:
            yield (val, st.kappa.real, st.kappa.imag, st.mu.real, st.mu.imag,
                   st.branch.value)


def _with_parameter(params: TrapParams, name: str, value: float) -> TrapParams:
    return replace(params, **{name: value})


def _unknown_distance(a: ShootingUnknowns, b: ShootingUnknowns) -> float:
    return float(np.max(np.abs(a.to_vector() - b.to_vector())))


def continue_branch(params: TrapParams, start: StationaryState, parameter: str,
                    to: float, step: float,
                    accept: Callable[[StationaryState], bool] | None = None) -> BranchCurve:
    """Natural-parameter continuation from ``start`` toward ``to``.

    Marches with the previous solution as the Newton guess, halving the step
    on failure down to step/64; the branch terminates (recording the value)
    when no further progress is possible.  ``accept`` may reject a converged
    state (used to detect falling onto a different branch), which is treated
    like a failed step.
    """
    if parameter not in ("gamma", "g"):
        raise ValueError("parameter must be 'gamma' or 'g'")
    if start.residual_norm > params.newton.residual_tol * 10.0:
        raise ValueError("continuation start is not converged")
    value = getattr(start.params, parameter)
    curve = BranchCurve(parameter, [(value, start)])
    if to == value:
        return curve
    direction = 1.0 if to > value else -1.0
    h = abs(step)
    state = start
    while direction * (to - value) > 1e-12:
        h = min(h, abs(to - value))
        trial = value + direction * h
        p = _with_parameter(params, parameter, trial)
        try:
            cand = solve_stationary(p, state.unknowns, branch=state.branch)
            ok = accept is None or accept(cand)
        except (NoSolutionError, NumericsError):
            ok = False
            cand = None
        if ok:
            value, state = trial, cand
            curve.points.append((value, state))
            h = min(h * 2.0, abs(step))
        else:
            h *= 0.5
            if h < abs(step) / 64.0:
                curve.terminated_at = trial
                break
    return curve


class BranchTracker:
    """Cached access to the branches of one gamma family.

    Ground and excited states are continued from the analytic linear limit
    (g steps <= 0.1 at gamma = 0, then gamma steps <= 0.01); broken states
    are seeded from the perturbed ground state.  All converged states are
    memoized so locators and sweeps can probe arbitrary gamma cheaply.
    """

    G_STEP = 0.05
    GAMMA_STEP = 0.01

    def __init__(self, params: TrapParams):
        self.params = replace(params, gamma=0.0)
        self._cache: dict[Branch, tuple[list[float], list[StationaryState]]] = {
            br: ([], []) for br in Branch}
        self._ends: dict[Branch, float] = {}
        self._g_curves: dict[Branch, list] = {}

    # -- cache plumbing ----------------------------------------------------

    def _remember(self, state: StationaryState):
        gammas, states = self._cache[state.branch]
        g = state.params.gamma
        i = _bisect.bisect_left(gammas, g)
        if i < len(gammas) and abs(gammas[i] - g) < 1e-13:
            states[i] = state
        else:
            gammas.insert(i, g)
            states.insert(i, state)

    def _nearest(self, branch: Branch, gamma: float):
        gammas, states = self._cache[branch]
        if not gammas:
            return None
        i = _bisect.bisect_left(gammas, gamma)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(gammas):
                if best is None or abs(gammas[j] - gamma) < abs(best.params.gamma - gamma):
                    best = states[j]
        return best

    def _params_at(self, gamma: float) -> TrapParams:
        return replace(self.params, gamma=gamma)

    # -- symmetric branches --------------------------------------------------

    def _bootstrap(self):
        if self._cache[Branch.GROUND][0]:
            return
        base = self._params_at(0.0)
        seeds = hermitian_linear_seeds(base)
        labels = [Branch.GROUND, Branch.EXCITED][:len(seeds)]
        lin = replace(base, g=0.0)
        states = [solve_stationary(lin, s, br) for s, br in zip(seeds, labels)]
        if self.params.g != 0.0:
            n = max(1, math.ceil(abs(self.params.g) / self.G_STEP))
            for state in states:
                curve = continue_branch(replace(state.params, g=self.params.g), state,
                                        "g", self.params.g, abs(self.params.g) / n)
                last = curve.points[-1][1]
                if abs(curve.points[-1][0] - self.params.g) > 1e-12:
                    raise NoSolutionError(
                        f"{state.branch.value} branch lost during g continuation "
                        f"at g = {curve.points[-1][0]:.4f}")
                self._g_curves[state.branch] = curve.points
                self._remember(last)
        else:
            for state in states:
                self._g_curves[state.branch] = [(0.0, state)]
                self._remember(state)

    def ground_g_curve(self) -> list:
        """(g, state) pairs of the gamma = 0 continuation from the linear
        limit to the configured g, used to seed fluctuation solves."""
        self._bootstrap()
        return self._g_curves[Branch.GROUND]

    def _symmetric(self, branch: Branch, gamma: float) -> StationaryState:
        self._bootstrap()
        end = self._ends.get(branch)
        if end is not None and gamma > end + 1e-12:
            raise NoSolutionError(f"{branch.value} branch ends near gamma = {end:.6f}")
        near = self._nearest(branch, gamma)
        if near is None:
            raise NoSolutionError(f"no {branch.value} branch data to continue from")
        if abs(near.params.gamma - gamma) < 1e-13:
            return near
        other = Branch.EXCITED if branch is Branch.GROUND else Branch.GROUND

        def accept(st: StationaryState) -> bool:
            if not st.pt_symmetric or abs(st.kappa.imag) > IM_KAPPA_TOL:
                return False
            twin = self._nearest(other, st.params.gamma)
            if twin is not None and abs(twin.params.gamma - st.params.gamma) < 2e-3 \
                    and abs(twin.kappa - st.kappa) < 1e-7:
                return False  # slid onto the other symmetric branch
            return True

        curve = continue_branch(self._params_at(gamma), near, "gamma", gamma,
                                self.GAMMA_STEP, accept=accept)
        for _, st in curve.points[1:]:
            self._remember(st)
        final = curve.points[-1]
        if abs(final[0] - gamma) > 1e-12:
            raise NoSolutionError(
                f"{branch.value} branch could not be continued past "
                f"gamma = {final[0]:.6f}")
        return final[1]

    def ground(self, gamma: float) -> StationaryState:
        return self._symmetric(Branch.GROUND, gamma)

    def excited(self, gamma: float) -> StationaryState:
        return self._symmetric(Branch.EXCITED, gamma)

    def branch_end(self, branch: Branch, gamma_cap: float = 1.2) -> float:
        """Largest gamma to which the branch could be continued."""
        if branch not in self._ends:
            self._bootstrap()
            near = self._nearest(branch, gamma_cap)
            try:
                self._symmetric(branch, gamma_cap)
                self._ends[branch] = gamma_cap
            except NoSolutionError:
                gammas, _ = self._cache[branch]
                self._ends[branch] = gammas[-1] if gammas else 0.0
        return self._ends[branch]

    # -- broken branch -------------------------------------------------------

    def broken(self, gamma: float, require_im: float = 1e-6) -> StationaryState:
        """Symmetry-broken state (Im kappa > 0 representative) at gamma."""
        near = self._nearest(Branch.BROKEN_PLUS, gamma)
        if near is not None and abs(near.params.gamma - gamma) < 1e-13:
            return near
        if near is None:
            state = self._seed_broken(gamma, require_im)
        else:
            def accept(st):
                return st.kappa.imag > require_im
            curve = continue_branch(self._params_at(gamma), near, "gamma", gamma,
                                    0.005, accept=accept)
            for _, st in curve.points[1:]:
                self._remember(st)
            final = curve.points[-1]
            if abs(final[0] - gamma) > 1e-12:
                raise NoSolutionError(f"broken branch lost at gamma = {final[0]:.6f}")
            state = final[1]
        return state

    def _seed_broken(self, gamma: float, require_im: float) -> StationaryState:
        ground = self.ground(gamma)
        p = self._params_at(gamma)
        quick = replace(p, newton=replace(p.newton, max_iterations=25))
        for guess in broken_seeds_from_ground(ground):
            try:
                st = solve_stationary(quick, guess, branch=Branch.BROKEN_PLUS)
            except NoSolutionError:
                continue
            if st.kappa.imag > require_im:
                self._remember(st)
                return st
            if st.kappa.imag < -require_im:
                mirror = StationaryState(
                    params=st.params, kappa=st.kappa, unknowns=st.unknowns, xs=st.xs,
                    psi=st.psi, branch=Branch.BROKEN_MINUS, pt_symmetric=st.pt_symmetric,
                    pt_defect=st.pt_defect, norm=st.norm,
                    residual_norm=st.residual_norm,
                    newton_iterations=st.newton_iterations,
                    _traj_right=st._traj_right, _traj_left=st._traj_left)
                self._remember(mirror)
                plus = _conjugate_state(st)
                self._remember(plus)
                return plus
        raise NoSolutionError(f"no broken state found at gamma = {gamma:.6f}")

    def find_broken_onset(self, step: float = 0.01) -> StationaryState:
        """First broken state found scanning downward from the end of the
        ground branch."""
        end = self.branch_end(Branch.GROUND)
        gamma = end - 0.5 * step
        attempts = 0
        while gamma > 0.0 and attempts < 80:
            try:
                return self.broken(gamma)
            except NoSolutionError:
                attempts += 1
                gamma -= step * (1 + attempts // 4)
        raise NotFoundError("no symmetry-broken branch found below the ground-branch end")


def _conjugate_state(st: StationaryState) -> StationaryState:
    """The mirror solution psi*(-x) with kappa*, mapping one broken state
    onto its partner."""
    u = ShootingUnknowns(st.unknowns.psi0, -np.conj(st.unknowns.dpsi0),
                         np.conj(st.unknowns.kappa))
    branch = (Branch.BROKEN_PLUS if st.branch is Branch.BROKEN_MINUS else
              Branch.BROKEN_MINUS if st.branch is Branch.BROKEN_PLUS else st.branch)
    return solve_stationary(st.params, u, branch=branch)


# ---------------------------------------------------------------------------
# Bifurcation locators
# ---------------------------------------------------------------------------

def _sqrt_intercept(values: np.ndarray, squares: np.ndarray) -> float:
    """Intercept of a linear fit squares = a (value - intercept)."""
    a, c = np.polyfit(values, squares, 1)
    return -c / a


def locate_pitchfork(params: TrapParams, tracker: BranchTracker | None = None,
                     bracket_tol: float = 1e-6) -> float:
    """Gamma of the symmetry-breaking bifurcation on the ground branch.

    Continues the broken branch downward, extrapolates the square-root
    scaling of Im kappa to zero and cross-checks against bisection on
    broken-state existence; the extrapolated value is returned.
    """
    if params.g >= 0.0:
        raise NotFoundError("broken states bifurcate from the ground state only "
                            "for attractive g < 0")
    tracker = tracker or BranchTracker(params)
    onset = tracker.find_broken_onset()

    # March the broken branch down in gamma, letting the step shrink so the
    # last points cluster against the bifurcation.
    gamma = onset.params.gamma
    state = onset
    h = 0.005
    points = [(gamma, state.kappa.imag)]
    while h > 2e-7:
        trial = gamma - h
        if trial <= 0.0:
            break
        try:
            cand = solve_stationary(tracker._params_at(trial), state.unknowns,
                                    branch=Branch.BROKEN_PLUS)
            ok = cand.kappa.imag > 1e-7
        except NoSolutionError:
            ok = False
        if ok:
            gamma, state = trial, cand
            tracker._remember(state)
            points.append((gamma, state.kappa.imag))
            if state.kappa.imag > 0.02:
                h *= 1.5
        else:
            h *= 0.5

    tail = [(gv, im) for gv, im in points if im < 0.08]
    tail = sorted(tail)[:12]
    if len(tail) < 3:
        tail = sorted(points)[:4]
    vals = np.array([t[0] for t in tail])
    sqs = np.array([t[1] ** 2 for t in tail])
    gamma_fit = _sqrt_intercept(vals, sqs)

    # Existence bisection: the last marched point is inside the broken
    # region; gamma_fit minus a small margin must be outside.
    hi = points[-1][0]
    lo = gamma_fit - max(4.0 * (hi - gamma_fit), 1e-4)

    def exists(gv: float) -> bool:
        if gv <= 0.0:
            return False
        try:
            st = solve_stationary(tracker._params_at(gv), state.unknowns,
                                  branch=Branch.BROKEN_PLUS)
        except NoSolutionError:
            return False
        if st.kappa.imag > 1e-7:
            tracker._remember(st)
            return True
        return False

    for _ in range(6):
        if not exists(lo):
            break
        lo -= 4.0 * (hi - lo)
    else:
        raise NotFoundError("could not bracket the broken-branch onset from below")
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            hi = mid
        else:
            lo = mid
    gamma_bisect = 0.5 * (lo + hi)

    if abs(gamma_fit - gamma_bisect) > 1e-4:
        raise NotFoundError(
            f"pitchfork locator inconsistent: extrapolation {gamma_fit:.8f} vs "
            f"existence bisection {gamma_bisect:.8f}")
    return gamma_fit


def locate_tangent(params: TrapParams, tracker: BranchTracker | None = None,
                   bracket_tol: float = 1e-6) -> float:
    """Gamma where the two symmetric states merge and vanish.

    Bisection on the existence of a distinct ground/excited pair; probes are
    seeded by continuation from the nearest cached states.
    """
    tracker = tracker or BranchTracker(params)
    end_g = tracker.branch_end(Branch.GROUND)
    end_e = tracker.branch_end(Branch.EXCITED)
    lo = min(end_g, end_e)
    if lo <= 0.0:
        raise NotFoundError("symmetric pair does not exist at gamma = 0")

    def exists(gv: float) -> bool:
        try:
            a = tracker.ground(gv)
            c = tracker.excited(gv)
        except NoSolutionError:
            return False
        return abs(a.kappa - c.kappa) > 1e-9

    hi = max(end_g, end_e) + 5e-3
    for _ in range(8):
        if not exists(hi):
            break
        hi += 5e-3
    else:
        raise NotFoundError("symmetric pair never merges in the scanned range")
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
