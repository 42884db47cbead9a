# Convergence rates from relative distances
#
# If mu(x, t) ~ exp(-delta t), two snapshots give delta = ln(mu1/mu2)/(t2 - t1).
# The estimates grow with time, and the small and large sizes end up with
# similar rates.

# %%
import numpy as np

from coagfrag import Grid, StepPolicy, evolve, rate_table, uniform_init

grid = Grid(0.05, 100.0)
times = [float(t) for t in range(20, 30)]
run = evolve(uniform_init(1.0, grid), 30.0, StepPolicy.fixed(1.0), times)

# %%
# The state at t = 30 serves as the reference equilibrium.

table = rate_table(run, run.at(30.0), [5.0, 95.0], times)
print("t1   delta(x=5)  delta(x=95)")
for k, t1 in enumerate(times[:-1]):
    print(f"{t1:<4g} {table.delta[0, k]:10.4f}  {table.delta[1, k]:10.4f}")
print("base-10 rates at t1=28:", np.round(table.delta[:, -1] * np.log10(np.e), 4))
