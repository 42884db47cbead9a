# Equilibrium of the truncated model by Newton iteration
#
# On a finite grid the stationary problem is a quadratic system. Newton's
# method from an exponential guess converges in a handful of steps; one row
# of each linear system is swapped for the mass constraint.

# %%
import numpy as np

from coagfrag import AsymptoteKind, AsymptoteModel, Grid, equilibrium_for_mass, log10_asymptote, solve_equilibrium

grid = Grid(0.05, 100.0)
rep = solve_equilibrium(1.0, grid, max_iter=8)
for k, (r, d) in enumerate(zip(rep.residual_history, rep.increment_history), 1):
    print(f"iteration {k}: residual {r:.2e}  increment {d:.2e}")
print(f"mass {rep.solution.mass():.14f}")

# %%
# Same equilibrium from the recursion: scale the Newton density by h and
# compare term by term.

f = rep.solution
seq = equilibrium_for_mass(1.0, grid.h, 10 * grid.N)
gap = np.abs(grid.h * f.values - seq.values[: grid.N])
print(f"max |h f_newton - f_recursive| = {gap.max():.2e}")

# %%
# Against the large-size law of the continuous model. The deviation shrinks
# with x until the truncation at L bends the curve up in a thin layer.

c_large = AsymptoteModel(AsymptoteKind.C_LARGE)
for x in (10, 20, 50, 80, 95, 99.5, 100):
    i = grid.index_of(x)
    print(f"x={x:6g}  log10 f = {np.log10(f.values[i - 1]):8.4f}  "
          f"deviation {np.log10(f.values[i - 1]) - log10_asymptote(c_large, x):+.4f}")
