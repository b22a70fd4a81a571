"""How far a reversible system is from detailed balance.

A random reversible system A is compared with two systems that do satisfy
detailed balance: its symmetrization and the version with trivial dynamics.
The distance between A and its time reversal is at most twice the distance
from A to either of them.
"""

import numpy as np

from fermiwasser.detailed_balance import (check_fdb, fdb_deviation, identity_dynamics, random_reversible_system,
                                          symmetrized_dynamics)

rng = np.random.default_rng(12)
a = random_reversible_system(2, rng, d=2, name="A")
print(f"FDB residual of A: {check_fdb(a).residual:.3e}")

for label, b in [("symmetrized", symmetrized_dynamics(a)), ("identity", identity_dynamics(a))]:
    print(f"comparison system: {label} (FDB residual {check_fdb(b).residual:.1e})")
    rep = fdb_deviation(a, b)
    for name, bound in rep.bounds.items():
        print(f"  {name:<15} {bound['lhs']:.6f} <= {bound['rhs']:.6f}  {'ok' if bound['holds'] else 'VIOLATED'}")
