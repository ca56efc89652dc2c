"""Deterministic switching between two stable spirals can blow up.

Both shear matrices are Hurwitz for any damping alpha > 0, yet the
worst-case switching schedule multiplies the norm by R(alpha^2) per
cycle. R crosses 1 near alpha = 0.3314: below it an adversarial
switcher wins, above it the system is safe (and for 2 alpha > 1 a
common quadratic Lyapunov function exists).
"""

import math

from pdmplab import (HybridState, RandomSource, SwitchedLinearSpec, advance_flow,
                     build_model, simulate, stability_R, stability_threshold,
                     worst_trajectory_cycle)

print("alpha     R(alpha^2)   classification")
for alpha in (0.1, 0.2, 0.3, 0.32, 0.3314, 0.34, 0.4, 0.5, 0.6):
    r_val, cls = stability_R(alpha)
    print(f"{alpha:5.4f}   {r_val:10.6f}   {cls}")

root = stability_threshold()
print(f"\nR(alpha^2) = 1 at alpha* = {root:.6f}")

# --- drive the worst trajectory through the engine's flow ------------------
print("\nworst-trajectory cycle from (0, 1), clockwise:")
for alpha in (0.32, 0.3314, 0.34):
    cyc = worst_trajectory_cycle(alpha)
    model = build_model(SwitchedLinearSpec(alpha=alpha, r=1.0))
    state = model.initial_state((0.0, 1.0), 0)
    state = advance_flow(model, state, cyc.t1)
    state = HybridState(state.x, 1)
    state = advance_flow(model, state, cyc.t2 - cyc.t1)
    state = HybridState(state.x, 0)
    state = advance_flow(model, state, cyc.t3 - cyc.t2)
    grown = math.hypot(*state.x)
    verdict = "grows" if grown > 1 else "shrinks"
    print(f"   alpha={alpha:6.4f}: back on the axis at |x| = {grown:.6f} "
          f"({verdict}; formula R = {cyc.growth:.6f})")

# --- random switching at the same damping ----------------------------------
# the random flip process explores all schedules; with small damping and
# a flip rate near the top of the G curve the norm still explodes
rng = RandomSource(seed=515)
for alpha, r in ((0.05, 0.25), (0.05, 5.0)):
    model = build_model(SwitchedLinearSpec(alpha=alpha, r=r))
    traj = simulate(model, model.initial_state((0.0, 1.0)), 2000.0, rng.split(int(r * 100)))
    if traj.exploded_at is not None:
        print(f"random switching alpha={alpha:g}, r={r:g}: "
              f"norm passed 1e12 at t = {traj.exploded_at:.0f} (unstable)")
    else:
        growth = math.log(math.hypot(*traj.terminal.x)) / traj.horizon
        print(f"random switching alpha={alpha:g}, r={r:g}: "
              f"(1/t) log|X_t| = {growth:+.4f} (stable)")
