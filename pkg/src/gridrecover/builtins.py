"""Shipped example networks and their data-generation scenarios.

These cover the reproducible experiment families: the 6-node DC network with
three bridges and a weight spread of two orders of magnitude, a 14-node DC
network on the Heawood topology with randomized conductances, the 3-node path
with a silent middle node (whose complete-graph fit is degenerate), and a
small AC ring with a degree-2 zero-injection node that admits an exact series
collapse.
"""

from __future__ import annotations

import numpy as np

from .network import Network
from .states import Scenario

TABLE1_EDGES = ((1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (4, 6))
TABLE1_CONDUCTANCES = (0.5799, 75.980, 75.979, 0.4698, 94.599, 79.909)

# Heawood graph: 14-cycle plus the chords of the [5, -5]^7 LCF code.
HEAWOOD_EDGES = tuple(
    [(i, i + 1) for i in range(1, 14)]
    + [(1, 14)]
    + [(1, 6), (3, 8), (5, 10), (7, 12), (9, 14), (2, 11), (4, 13)]
)

SMALL_AC_EDGES = ((1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6), (1, 4))
SMALL_AC_ZERO_NODE = 3  # degree 2, so its two edges admit a series collapse

BUILTIN_NAMES = ("table1_dc", "heawood_dc", "path3_dc", "small_ac")


def table1_dc() -> Network:
    """Six nodes: a weakly shorted triangle feeding three bridges."""
    return Network.dc(6, TABLE1_EDGES, TABLE1_CONDUCTANCES)


def heawood_dc(seed=0, conductance_range: tuple[float, float] = (0.5, 100.0)) -> Network:
    """Heawood topology (14 nodes, 21 edges) with uniform random conductances."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(*conductance_range, size=len(HEAWOOD_EDGES))
    return Network.dc(14, HEAWOOD_EDGES, c)


def path3_dc(c12: float = 2.0, c23: float = 3.0) -> Network:
    """Three-node path; with no injection at node 2 the complete-graph fit
    has a whole segment of exact solutions."""
    return Network.dc(3, ((1, 2), (2, 3)), (c12, c23))


def small_ac(seed=0, admittance_range: tuple[float, float] = (0.5, 100.0)) -> Network:
    """Six-node AC ring plus one chord, random conductances and susceptances."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(*admittance_range, size=len(SMALL_AC_EDGES))
    s = rng.uniform(*admittance_range, size=len(SMALL_AC_EDGES))
    return Network.ac(6, SMALL_AC_EDGES, c, s)


def builtin_network(name: str, seed=0) -> Network:
    if name == "table1_dc":
        return table1_dc()
    if name == "heawood_dc":
        return heawood_dc(seed)
    if name == "path3_dc":
        return path3_dc()
    if name == "small_ac":
        return small_ac(seed)
    raise ValueError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")


def builtin_scenario(name: str, sigma: float = 0.0) -> Scenario:
    """Data-sampling scenario matching each builtin network.

    Node 1 always feeds the network (slack); every other node draws a
    uniform load.  The load ranges are chosen to keep voltages within
    [0.9, 1.1] at the default parameters; they are documented here rather
    than taken from any external protocol.
    """
    if name == "table1_dc":
        # the 0.47-conductance bridge feeds three nodes; bigger loads than
        # this push its voltage drop past the 0.9 floor
        return Scenario.single_slack(6, p_range=(-0.015, 0.0), sigma=sigma)
    if name == "heawood_dc":
        return Scenario.single_slack(14, p_range=(-0.1, 0.0), sigma=sigma)
    if name == "path3_dc":
        return Scenario.single_slack(3, zero=(2,), p_range=(-0.1, -0.01), sigma=sigma)
    if name == "small_ac":
        return Scenario.single_slack(
            6,
            zero=(SMALL_AC_ZERO_NODE,),
            p_range=(-0.1, 0.0),
            q_range=(-0.05, 0.05),
            sigma=sigma,
        )
    raise ValueError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")
