"""The built-in model zoo: validated specs and PdmpModel constructors.

Every model ships a closed-form flow (exponential decay, linear drift,
2x2 matrix exponential, or affine-exponential voltage relaxation), so
no integrator bias enters the statistical tests. Specs are frozen
dataclasses whose constructors enforce the parameter constraints; the
builders attach drift fields and exact jump expectations so the
generator of each model can be validated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .engine import (FlowSpec, HybridState, KernelSpec, PdmpModel, RateSpec)
from .quadrature import adaptive_quad

# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class StorageSpec:
    """Stock decays at rate beta, jumps up by Exp(1) amounts at rate alpha."""

    alpha: float
    beta: float

    tag = "storage"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("storage requires alpha > 0")
        if not self.beta > 0:
            raise ValueError("storage requires beta > 0")


@dataclass(frozen=True)
class BanditSpec:
    """Drift 1-p-p*y toward (1-p)/p, jumps of +g at rate q*y/g."""

    p: float
    q: float
    g: float

    tag = "bandit"

    def __post_init__(self):
        if not (0 < self.q < self.p < 1):
            raise ValueError("bandit requires 0 < q < p < 1")
        if not self.g > 0:
            raise ValueError("bandit requires g > 0")


@dataclass(frozen=True)
class TcpSpec:
    """Unit linear growth, halved at the points of a rate-lam Poisson clock.

    lam = 0 is allowed as the degenerate jump-free case; the invariant-law
    oracles separately require lam > 0.
    """

    lam: float

    tag = "tcp"

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("tcp requires lambda >= 0")


@dataclass(frozen=True)
class AimdSpec:
    """Additive increase, multiplicative decrease by a draw from nu on [0,1].

    Either declarative (rate_kind/rate_value, nu_kind/nu_value, which the
    config format can serialize) or callable-based: rate_fn(x) with
    rate_bound_fn(x, dt) bounding the rate along x+s for s in [0, dt],
    and nu_quantile_fn(u) the quantile function of nu.
    """

    rate_kind: Optional[str] = None   # "constant" | "linear" (rate = value * x)
    rate_value: Optional[float] = None
    nu_kind: Optional[str] = None     # "fixed" (atom at nu_value) | "uniform"
    nu_value: Optional[float] = None
    rate_fn: Optional[Callable] = None
    rate_bound_fn: Optional[Callable] = None
    nu_quantile_fn: Optional[Callable] = None

    tag = "aimd"

    def __post_init__(self):
        if self.rate_fn is not None:
            if self.rate_bound_fn is None:
                raise ValueError("aimd rate_fn requires rate_bound_fn")
        else:
            if self.rate_kind not in ("constant", "linear"):
                raise ValueError("aimd requires rate_kind 'constant' or 'linear'")
            if self.rate_value is None or not self.rate_value >= 0:
                raise ValueError("aimd requires rate_value >= 0")
        if self.nu_quantile_fn is None:
            if self.nu_kind not in ("fixed", "uniform"):
                raise ValueError("aimd requires nu_kind 'fixed' or 'uniform'")
            if self.nu_kind == "fixed":
                if self.nu_value is None or not 0 <= self.nu_value <= 1:
                    raise ValueError("aimd fixed nu requires nu_value in [0, 1]")

    def quantile(self, u):
        if self.nu_quantile_fn is not None:
            return self.nu_quantile_fn(u)
        if self.nu_kind == "fixed":
            return self.nu_value
        return u


@dataclass(frozen=True)
class SwitchedLinearSpec:
    """Two Hurwitz shear matrices with damping alpha, mode flips at rate r."""

    alpha: float
    r: float

    tag = "switched-linear"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("switched-linear requires alpha > 0")
        if not self.r > 0:
            raise ValueError("switched-linear requires r > 0")

    def matrices(self):
        a = self.alpha
        return (np.array([[-a, 1.0], [0.0, -a]]),
                np.array([[-a, 0.0], [-1.0, -a]]))


@dataclass(frozen=True)
class Dim1Spec:
    """Mode i pulls x toward i at rate alpha_i; modes flip at rate lambda_i."""

    alpha0: float
    alpha1: float
    lambda0: float
    lambda1: float

    tag = "dim1"

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "lambda0", "lambda1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"dim1 requires {name} > 0")


PLANAR_ROTATION_MATRIX = np.array([[-1.0, -1.0], [1.0, -1.0]])
PLANAR_ROTATION_SHIFT = np.array([1.0, 0.0])


@dataclass(frozen=True)
class PlanarRotationSpec:
    """Spiral fields A x and A (x - a) with constant per-mode flip rates."""

    lambda0: float
    lambda1: float

    tag = "planar-rotation"

    def __post_init__(self):
        if not (self.lambda0 > 0 and self.lambda1 > 0):
            raise ValueError("planar-rotation requires lambda0, lambda1 > 0")


@dataclass(frozen=True)
class TelegraphSpec:
    """Velocity +-1 flipping at rate b when moving away from 0, a toward it."""

    a: float
    b: float

    tag = "telegraph"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("telegraph requires a > 0")
        if not self.a < self.b:
            raise ValueError("telegraph requires a < b")


@dataclass(frozen=True)
class MorrisLecarSpec:
    """Voltage relaxation driven by two discretized ion-channel proportions.

    K is the channel count per type; the proportions live on
    {0, 1/K, ..., 1} and move in steps of 1/K with total birth rate
    K*(1-u_i)*alpha_i(V) and death rate K*u_i*beta_i(V).
    """

    C: float
    I: float
    g1: float
    g2: float
    g3: float
    V1: float
    V2: float
    V3: float
    c1: float
    c2: float
    Vp1: float
    Vp2: float
    Vpp1: float
    Vpp2: float
    K: int

    tag = "morris-lecar"

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("morris-lecar requires C > 0")
        for name in ("g1", "g2", "g3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"morris-lecar requires {name} > 0")
        for name in ("Vpp1", "Vpp2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"morris-lecar requires {name} > 0")
        for name in ("c1", "c2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"morris-lecar requires {name} > 0")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("morris-lecar requires integer channel count K >= 1")
        object.__setattr__(self, "K", int(self.K))

    def channels(self, mode):
        """mode index -> channel counts (n1, n2), row-major over (K+1)^2."""
        n1, n2 = divmod(int(mode), self.K + 1)
        return n1, n2

    def mode_of(self, n1, n2):
        return n1 * (self.K + 1) + n2


SPEC_TYPES = {cls.tag: cls for cls in (
    StorageSpec, BanditSpec, TcpSpec, AimdSpec, SwitchedLinearSpec,
    Dim1Spec, PlanarRotationSpec, TelegraphSpec, MorrisLecarSpec)}



# ---------------------------------------------------------------------------
# Morris-Lecar rate functions and voltage trapping segment


def morris_lecar_rates(V: float, i: int, spec: MorrisLecarSpec):
    """Per-channel opening/closing rates (alpha_i(V), beta_i(V)), i in {1, 2}.

    alpha + beta = 2 c_i cosh((V - Vp_i)/(2 Vpp_i)); both are strictly
    positive for every real V.
    """
    if i not in (1, 2):
        raise ValueError("channel type i must be 1 or 2")
    c = spec.c1 if i == 1 else spec.c2
    vp = spec.Vp1 if i == 1 else spec.Vp2
    vpp = spec.Vpp1 if i == 1 else spec.Vpp2
    z = (V - vp) / vpp
    base = c * math.cosh(0.5 * z)
    th = math.tanh(z)
    return base * (1.0 + th), base * (1.0 - th)


def voltage_segment(spec: MorrisLecarSpec):
    """Invariant voltage interval [0, Vmax]: every mode's field points inward.

    Vmax = max(V1, V2, V3 + (I+1)/g3) with the leak channel always open.
    Inwardness at both endpoints is asserted for all channel modes.
    """
    vmax = max(spec.V1, spec.V2, spec.V3 + (spec.I + 1.0) / spec.g3)
    K = spec.K
    for n1 in range(K + 1):
        for n2 in range(K + 1):
            lo = _ml_voltage_drift(spec, 0.0, n1 / K, n2 / K)
            hi = _ml_voltage_drift(spec, vmax, n1 / K, n2 / K)
            if not (lo > 0.0 and hi < 0.0):
                raise ValueError(
                    f"voltage fields do not point into [0, {vmax}] for mode "
                    f"({n1}, {n2}): dV at 0 = {lo}, at Vmax = {hi}")
    return 0.0, vmax


def _ml_voltage_drift(spec, V, u1, u2):
    s = (spec.g1 * u1 * (V - spec.V1) + spec.g2 * u2 * (V - spec.V2)
         + spec.g3 * (V - spec.V3))
    return (spec.I - s) / spec.C


# ---------------------------------------------------------------------------
# builders


def _build_storage(spec: StorageSpec) -> PdmpModel:
    alpha, beta = spec.alpha, spec.beta

    def flow(mode, x, dt):
        return (x[0] * math.exp(-beta * dt),)

    def kernel(state, rng):
        return HybridState((state.x[0] + rng.exponential(),), 0)

    def jump_expectation(f, state):
        x0 = state.x[0]

        def integrand(ys):
            return np.array([f(HybridState((x0 + y,), 0)) * math.exp(-y) for y in ys])

        val, _ = adaptive_quad(integrand, 0.0, 60.0, rel_tol=1e-10, abs_tol=1e-12)
        return val

    return PdmpModel(
        name="storage", dim=1, n_modes=1,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("constant", rate=lambda s: alpha),
        kernel=KernelSpec(kernel),
        drift=lambda s: (-beta * s.x[0],),
        jump_expectation=jump_expectation,
        sample_domain=((0.0,), (8.0,)),
        spec=spec)


def _build_bandit(spec: BanditSpec) -> PdmpModel:
    p, q, g = spec.p, spec.q, spec.g
    y_star = (1.0 - p) / p

    def flow(mode, x, dt):
        return (y_star + (x[0] - y_star) * math.exp(-p * dt),)

    def rate(state):
        return q * state.x[0] / g

    def segment_bound(state, dt):
        # the drift pushes y toward y*, so the rate along a jump-free
        # segment is bounded by the larger of the endpoints' envelopes
        return (q / g) * max(state.x[0], y_star)

    def kernel(state, rng):
        return HybridState((state.x[0] + g,), 0)

    return PdmpModel(
        name="bandit", dim=1, n_modes=1,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("general", rate=rate, segment_bound=segment_bound),
        kernel=KernelSpec(kernel),
        drift=lambda s: (1.0 - p - p * s.x[0],),
        jump_expectation=lambda f, s: f(HybridState((s.x[0] + g,), 0)),
        sample_domain=((0.0,), (4.0 * (1 + y_star),)),
        spec=spec)


def _build_tcp(spec: TcpSpec) -> PdmpModel:
    lam = spec.lam

    def flow(mode, x, dt):
        return (x[0] + dt,)

    def kernel(state, rng):
        return HybridState((0.5 * state.x[0],), 0)

    return PdmpModel(
        name="tcp", dim=1, n_modes=1,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("constant", rate=lambda s: lam),
        kernel=KernelSpec(kernel),
        drift=lambda s: (1.0,),
        jump_expectation=lambda f, s: f(HybridState((0.5 * s.x[0],), 0)),
        sample_domain=((0.0,), (8.0,)),
        spec=spec)


def _build_aimd(spec: AimdSpec) -> PdmpModel:
    def flow(mode, x, dt):
        return (x[0] + dt,)

    def kernel(state, rng):
        return HybridState((state.x[0] * spec.quantile(rng.uniform()),), 0)

    if spec.rate_fn is not None:
        rate_spec = RateSpec(
            "general",
            rate=lambda s: spec.rate_fn(s.x[0]),
            segment_bound=lambda s, dt: spec.rate_bound_fn(s.x[0], dt))
    elif spec.rate_kind == "constant":
        val = spec.rate_value
        rate_spec = RateSpec("constant", rate=lambda s: val)
    else:
        slope = spec.rate_value
        rate_spec = RateSpec(
            "general",
            rate=lambda s: slope * s.x[0],
            # rate is increasing along the linear growth x + s
            segment_bound=lambda s, dt: slope * (s.x[0] + dt))

    def jump_expectation(f, state):
        x0 = state.x[0]

        def integrand(us):
            return np.array([f(HybridState((x0 * spec.quantile(u),), 0)) for u in us])

        val, _ = adaptive_quad(integrand, 0.0, 1.0, rel_tol=1e-10, abs_tol=1e-12)
        return val

    return PdmpModel(
        name="aimd", dim=1, n_modes=1,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=rate_spec,
        kernel=KernelSpec(kernel),
        drift=lambda s: (1.0,),
        jump_expectation=jump_expectation,
        sample_domain=((0.0,), (8.0,)),
        spec=spec)


def _flip_kernel(state, rng):
    return HybridState(state.x, 1 - state.mode)


def _build_switched_linear(spec: SwitchedLinearSpec) -> PdmpModel:
    a, r = spec.alpha, spec.r
    A0, A1 = spec.matrices()
    mats = (A0, A1)

    def flow(mode, x, dt):
        decay = math.exp(-a * dt)
        if mode == 0:
            return (decay * (x[0] + dt * x[1]), decay * x[1])
        return (decay * x[0], decay * (x[1] - dt * x[0]))

    def drift(state):
        v = mats[state.mode] @ state.array()
        return (v[0], v[1])

    return PdmpModel(
        name="switched-linear", dim=2, n_modes=2,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("constant", rate=lambda s: r),
        kernel=KernelSpec(_flip_kernel),
        drift=drift,
        jump_expectation=lambda f, s: f(HybridState(s.x, 1 - s.mode)),
        sample_domain=((-2.0, -2.0), (2.0, 2.0)),
        spec=spec)


def _build_dim1(spec: Dim1Spec) -> PdmpModel:
    alphas = (spec.alpha0, spec.alpha1)
    lams = (spec.lambda0, spec.lambda1)

    def flow(mode, x, dt):
        return (mode + (x[0] - mode) * math.exp(-alphas[mode] * dt),)

    return PdmpModel(
        name="dim1", dim=1, n_modes=2,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("constant", rate=lambda s: lams[s.mode]),
        kernel=KernelSpec(_flip_kernel),
        drift=lambda s: (-alphas[s.mode] * (s.x[0] - s.mode),),
        jump_expectation=lambda f, s: f(HybridState(s.x, 1 - s.mode)),
        sample_domain=((-0.5,), (1.5,)),
        spec=spec)


def _build_planar_rotation(spec: PlanarRotationSpec) -> PdmpModel:
    lams = (spec.lambda0, spec.lambda1)
    ax, ay = PLANAR_ROTATION_SHIFT

    def flow(mode, x, dt):
        # e^{At} = e^{-t} R(t) for A = [[-1,-1],[1,-1]]
        cx = x[0] - ax * mode
        cy = x[1] - ay * mode
        decay = math.exp(-dt)
        c, s = math.cos(dt), math.sin(dt)
        return (ax * mode + decay * (c * cx - s * cy),
                ay * mode + decay * (s * cx + c * cy))

    def drift(state):
        v = PLANAR_ROTATION_MATRIX @ (state.array() - state.mode * PLANAR_ROTATION_SHIFT)
        return (v[0], v[1])

    return PdmpModel(
        name="planar-rotation", dim=2, n_modes=2,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("constant", rate=lambda s: lams[s.mode]),
        kernel=KernelSpec(_flip_kernel),
        drift=drift,
        jump_expectation=lambda f, s: f(HybridState(s.x, 1 - s.mode)),
        sample_domain=((-2.0, -2.0), (2.0, 2.0)),
        spec=spec)


def _build_telegraph(spec: TelegraphSpec) -> PdmpModel:
    a, b = spec.a, spec.b

    def velocity(mode):
        return 2 * mode - 1  # mode 0 -> v = -1, mode 1 -> v = +1

    def flow(mode, x, dt):
        return (x[0] + velocity(mode) * dt,)

    def rate(state):
        # indicator evaluated with the strict inequality; the single
        # point x = 0 is a null set for the waiting-time integral
        return b if state.x[0] * velocity(state.mode) > 0 else a

    def segments(state, max_dt):
        x0 = state.x[0]
        v = velocity(state.mode)
        if x0 * v >= 0:
            return ((math.inf, b),)
        return ((abs(x0), a), (math.inf, b))

    return PdmpModel(
        name="telegraph", dim=1, n_modes=2,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("piecewise-constant", rate=rate, segments=segments),
        kernel=KernelSpec(_flip_kernel),
        drift=lambda s: (float(velocity(s.mode)),),
        jump_expectation=lambda f, s: f(HybridState(s.x, 1 - s.mode)),
        sample_domain=((-5.0,), (5.0,)),
        spec=spec)


def _build_morris_lecar(spec: MorrisLecarSpec) -> PdmpModel:
    K = spec.K
    n_modes = (K + 1) ** 2
    # per-mode affine voltage relaxation V(t) = Vinf + (V - Vinf) e^{-B t}
    g_tot = np.empty(n_modes)
    v_inf = np.empty(n_modes)
    for m in range(n_modes):
        n1, n2 = spec.channels(m)
        u1, u2 = n1 / K, n2 / K
        g = spec.g1 * u1 + spec.g2 * u2 + spec.g3
        g_tot[m] = g
        v_inf[m] = (spec.I + spec.g1 * u1 * spec.V1 + spec.g2 * u2 * spec.V2
                    + spec.g3 * spec.V3) / g

    def flow(mode, x, dt):
        vinf = v_inf[mode]
        return (vinf + (x[0] - vinf) * math.exp(-(g_tot[mode] / spec.C) * dt),)

    def move_rates(V, mode):
        """(target_mode, rate) for the four channel moves, ascending target."""
        n1, n2 = spec.channels(mode)
        u1, u2 = n1 / K, n2 / K
        a1, b1 = morris_lecar_rates(V, 1, spec)
        a2, b2 = morris_lecar_rates(V, 2, spec)
        moves = []
        if n1 > 0:
            moves.append((mode - (K + 1), K * u1 * b1))
        if n2 > 0:
            moves.append((mode - 1, K * u2 * b2))
        if n2 < K:
            moves.append((mode + 1, K * (1.0 - u2) * a2))
        if n1 < K:
            moves.append((mode + (K + 1), K * (1.0 - u1) * a1))
        moves.sort()
        return moves

    def rate(state):
        return sum(r for _, r in move_rates(state.x[0], state.mode))

    def segment_bound(state, dt):
        v0 = state.x[0]
        v1 = flow(state.mode, state.x, dt)[0]
        lo, hi = (v0, v1) if v0 <= v1 else (v1, v0)
        # (1-u) alpha + u beta <= alpha + beta = 2 c cosh(.), and cosh is
        # convex, so the interval max sits at an endpoint
        bound = 0.0
        for c, vp, vpp in ((spec.c1, spec.Vp1, spec.Vpp1),
                           (spec.c2, spec.Vp2, spec.Vpp2)):
            m = max(math.cosh((lo - vp) / (2.0 * vpp)),
                    math.cosh((hi - vp) / (2.0 * vpp)))
            bound += 2.0 * K * c * m
        return bound

    def kernel(state, rng):
        moves = move_rates(state.x[0], state.mode)
        total = sum(r for _, r in moves)
        u = rng.uniform() * total
        acc = 0.0
        for target, r in moves:
            acc += r
            if u < acc:
                return HybridState(state.x, target)
        return HybridState(state.x, moves[-1][0])

    def jump_expectation(f, state):
        moves = move_rates(state.x[0], state.mode)
        total = sum(r for _, r in moves)
        return sum(r * f(HybridState(state.x, tgt)) for tgt, r in moves) / total

    lo, hi = voltage_segment(spec)

    def drift(state):
        n1, n2 = spec.channels(state.mode)
        return (_ml_voltage_drift(spec, state.x[0], n1 / K, n2 / K),)

    return PdmpModel(
        name="morris-lecar", dim=1, n_modes=n_modes,
        flow=FlowSpec("closed-form", evaluator=flow),
        rate=RateSpec("general", rate=rate, segment_bound=segment_bound),
        kernel=KernelSpec(kernel),
        drift=drift,
        jump_expectation=jump_expectation,
        sample_domain=((lo,), (hi,)),
        spec=spec)


_BUILDERS = {
    StorageSpec: _build_storage,
    BanditSpec: _build_bandit,
    TcpSpec: _build_tcp,
    AimdSpec: _build_aimd,
    SwitchedLinearSpec: _build_switched_linear,
    Dim1Spec: _build_dim1,
    PlanarRotationSpec: _build_planar_rotation,
    TelegraphSpec: _build_telegraph,
    MorrisLecarSpec: _build_morris_lecar,
}


def build_model(spec) -> PdmpModel:
    """PdmpModel for a validated spec from the model zoo."""
    builder = _BUILDERS.get(type(spec))
    if builder is None:
        raise ValueError(f"unknown model spec {type(spec).__name__}")
    return builder(spec)


# ---------------------------------------------------------------------------
# generator action and the deterministic worst-case cycle


def generator_apply(model: PdmpModel, f, state: HybridState, h: float = 1e-6):
    """Generator action L f(state) = drift . grad f + rate * (E[f(post)] - f).

    The gradient is taken by central differences with step h; the jump
    expectation is the model's exact one.
    """
    if model.drift is None or model.jump_expectation is None:
        raise ValueError(f"model {model.name!r} lacks generator hooks")
    drift = model.drift(state)
    grad_term = 0.0
    for j in range(model.dim):
        up = list(state.x)
        dn = list(state.x)
        up[j] += h
        dn[j] -= h
        diff = (f(HybridState(tuple(up), state.mode))
                - f(HybridState(tuple(dn), state.mode))) / (2.0 * h)
        grad_term += drift[j] * diff
    lam = model.rate.rate(state)
    jump_term = 0.0
    if lam > 0.0:
        jump_term = lam * (model.jump_expectation(f, state) - f(state))
    return grad_term + jump_term


class WorstCycle(NamedTuple):
    t1: float
    t2: float
    t3: float
    terminal: tuple
    growth: float


def worst_trajectory_cycle(alpha: float) -> WorstCycle:
    """One cycle of the destabilizing mode schedule for the switched pair.

    Starting from (0, 1) in mode 0, switch at the collinearity lines
    y = gamma+- z: after times t1 = gamma+, t2 = t1 + gamma+ - gamma-,
    t3 = t2 - gamma- the state returns to the vertical axis with norm
    growth = (gamma+)^2 exp(-2 alpha (gamma+ - gamma-)), which equals the
    stability function R(alpha^2). growth > 1 means the switched system
    can be driven to infinity.
    """
    if not alpha > 0:
        raise ValueError("worst_trajectory_cycle requires alpha > 0")
    root = math.sqrt(1.0 + 4.0 * alpha * alpha)
    gamma_p = (1.0 + root) / (2.0 * alpha)
    gamma_m = (1.0 - root) / (2.0 * alpha)
    t1 = gamma_p
    t2 = t1 + gamma_p - gamma_m
    t3 = t2 - gamma_m
    growth = gamma_p * gamma_p * math.exp(-2.0 * alpha * (gamma_p - gamma_m))
    terminal = (0.0, -growth)
    return WorstCycle(t1, t2, t3, terminal, growth)
