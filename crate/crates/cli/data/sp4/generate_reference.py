"""Regenerate the standard problem #4 reference curves with magnum.np.

Usage: python3 generate_reference.py [field ...]   (default: 1 2)

Discretization is the conventional 200 x 50 x 1 mesh (2.5 nm x 2.5 nm x 3 nm)
integrated with magnum.np's adaptive RKF45 solver. Output columns match the
trajectory files written by `grace`: t_ns mx my mz.
"""
import sys

import numpy as np
import torch
from magnumnp import (Mesh, State, DemagField, ExchangeField, ExternalField,
                      LLGSolver, constants)

torch.set_default_dtype(torch.float64)

FIELDS = {
    1: (-24.6e-3, 4.3e-3, 0.0),
    2: (-35.5e-3, -6.3e-3, 0.0),
}


def s_state():
    mesh = Mesh((200, 50, 1), (2.5e-9, 2.5e-9, 3e-9))
    state = State(mesh)
    state.material = {"Ms": 8e5, "A": 1.3e-11, "alpha": 1.0}
    state.m = state.Constant([1.0, 0.25, 0.1])
    state.m /= torch.linalg.norm(state.m, dim=-1, keepdim=True)
    demag = DemagField()
    exchange = ExchangeField()
    LLGSolver([demag, exchange]).relax(state)
    return state, demag, exchange


def reverse(field, state, demag, exchange):
    state.t = 0.0
    state.material["alpha"] = 0.02
    b = FIELDS[field]
    external = ExternalField([b[0] / constants.mu_0, b[1] / constants.mu_0, b[2]])
    llg = LLGSolver([demag, exchange, external])
    rows = [(0.0, *state.m.mean(dim=(0, 1, 2)).tolist())]
    for n in range(1, 1001):
        llg.step(state, 1e-12)
        rows.append((n * 1e-3, *state.m.mean(dim=(0, 1, 2)).tolist()))
    with open(f"field{field}_reference.txt", "w") as out:
        out.write("# standard problem #4 field %d, magnum.np 2.2.0, 200x50x1 cells "
                  "(2.5x2.5x3 nm), RKF45, alpha=0.02\n" % field)
        out.write("# t_ns mx my mz\n")
        for t, mx, my, mz in rows:
            out.write(f"{t:.6f} {mx:.9f} {my:.9f} {mz:.9f}\n")


def main():
    fields = [int(a) for a in sys.argv[1:]] or [1, 2]
    for f in fields:
        state, demag, exchange = s_state()
        print("S-state <m> =", state.m.mean(dim=(0, 1, 2)).tolist(), flush=True)
        reverse(f, state, demag, exchange)


if __name__ == "__main__":
    main()
