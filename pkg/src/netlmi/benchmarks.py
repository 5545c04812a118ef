"""Hand-authored benchmark networks used across the test suite and docs."""

from __future__ import annotations

import numpy as np

from .system import NetworkedSystem, system_from_blocks


def five_subsystem_network() -> NetworkedSystem:
    """A five-subsystem continuous-time network with unstable open-loop
    dynamics and a directed, non-symmetric interconnection.

    Subsystems 1 and 2 read each other's states, 3 listens to 1, 2 and 4,
    4 listens to 1, and 5 listens to 4.  Outputs and performance channels
    are local to each subsystem.
    """
    n = (2, 2, 2, 2, 2)
    p = (1, 1, 1, 1, 1)
    q = (1, 1, 1, 1, 1)
    m = (1, 1, 1, 1, 1)
    l = (1, 1, 1, 1, 1)
    blocks = {}

    def put(name, i, j, vals):
        blocks[(name, i - 1, j - 1)] = np.array(vals, dtype=float)

    # subsystem 1
    put("A", 1, 1, [[0.198, 3.412], [-3.412, 0.198]])
    put("A", 1, 2, [[-0.114, -0.038], [-0.038, -0.073]])
    put("A", 1, 4, [[-0.060, -1.032], [1.032, -0.060]])
    put("B", 1, 1, [[0.000], [0.905]])
    put("E", 1, 1, [[0.000], [-0.013]])
    put("E", 1, 2, [[0.000], [0.003]])
    put("E", 1, 4, [[-0.001], [0.006]])
    put("C", 1, 1, [[1.114, -2.429]])
    put("F", 1, 1, [[0.000]])

    # subsystem 2
    put("A", 2, 1, [[-0.000, -0.001], [-0.001, -0.194]])
    put("A", 2, 2, [[1.547, 3.164], [-3.164, 1.547]])
    put("A", 2, 4, [[-0.258, -0.008], [-0.008, -0.204]])
    put("B", 2, 2, [[-0.902], [0.000]])
    put("E", 2, 1, [[-0.004], [-0.010]])
    put("E", 2, 2, [[-0.000], [0.021]])
    put("E", 2, 4, [[0.003], [0.002]])
    put("C", 2, 2, [[0.000, 1.062]])
    put("F", 2, 2, [[0.002]])

    # subsystem 3
    put("A", 3, 1, [[-0.232, -0.070], [-0.070, -0.158]])
    put("A", 3, 2, [[-0.096, -0.062], [-0.062, -0.085]])
    put("A", 3, 3, [[10.791, 5.354], [5.354, 3.134]])
    put("A", 3, 4, [[-0.074, -0.384], [0.384, -0.074]])
    put("B", 3, 3, [[-0.324], [-1.406]])
    put("E", 3, 1, [[0.000], [-0.007]])
    put("E", 3, 2, [[-0.002], [-0.004]])
    put("E", 3, 3, [[0.000], [-0.008]])
    put("E", 3, 4, [[-0.003], [-0.001]])
    put("C", 3, 3, [[1.052, 0.759]])
    put("F", 3, 3, [[-0.011]])

    # subsystem 4
    put("A", 4, 1, [[-0.180, -0.066], [-0.066, -0.078]])
    put("A", 4, 4, [[1.669, 2.302], [2.302, 3.175]])
    put("B", 4, 4, [[0.000], [0.998]])
    put("E", 4, 1, [[-0.006], [0.003]])
    put("E", 4, 4, [[-0.018], [0.008]])
    put("C", 4, 4, [[0.629, 0.000]])
    put("F", 4, 4, [[0.000]])

    # subsystem 5
    put("A", 5, 4, [[-0.059, 0.033], [0.033, -0.057]])
    put("A", 5, 5, [[0.058, 0.250], [0.250, 1.074]])
    put("B", 5, 5, [[0.870], [-1.461]])
    put("E", 5, 4, [[-0.001], [-0.004]])
    put("E", 5, 5, [[-0.006], [-0.000]])
    put("C", 5, 5, [[-0.552, -0.750]])
    put("F", 5, 5, [[0.000]])

    # local performance channels z_i = [1 1] x_i + u_i + w_i
    for i in range(1, 6):
        put("G", i, i, [[1.0, 1.0]])
        put("H", i, i, [[1.0]])
        put("J", i, i, [[1.0]])

    dims = {"n": n, "p": p, "q": q, "m": m, "l": l}
    return system_from_blocks("ct", dims, blocks)
