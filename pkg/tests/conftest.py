"""Shared fixtures: the four-community benchmark instance used throughout
the suite, plus a couple of small hand-checkable games."""

import numpy as np
import pytest

from graphongames import (
    LQHomogeneous,
    LQSBM,
    ParameterBox,
    SBMGraphon,
    StrategySet,
)

# Four-community benchmark: strong diagonal blocks, weak nearest-neighbour
# coupling, equal community weights.
Q4 = np.array(
    [
        [0.9, 0.05, 0.0, 0.0],
        [0.05, 0.2, 0.05, 0.0],
        [0.0, 0.05, 0.2, 0.05],
        [0.0, 0.0, 0.05, 0.8],
    ]
)
PI4 = np.full(4, 0.25)
ETA4 = np.array([0.8, 0.6, 1.0, 0.8])

# Two-community instance small enough to solve by hand.
Q2 = np.array([[0.8, 0.2], [0.2, 0.4]])
PI2 = np.array([0.5, 0.5])


@pytest.fixture(scope="session")
def sbm4():
    return SBMGraphon(Q4, PI4)


@pytest.fixture(scope="session")
def sbm4_game():
    return LQSBM(
        theta1=1.0,
        strategy_set=StrategySet(0.0, 10.0),
        xi=ParameterBox(np.full(4, 0.01), np.full(4, 1.2)),
    )


@pytest.fixture(scope="session")
def sbm2():
    return SBMGraphon(Q2, PI2)


@pytest.fixture(scope="session")
def homogeneous_game():
    return LQHomogeneous(
        strategy_set=StrategySet(0.0, 50.0),
        xi=ParameterBox(np.array([0.0, 0.0]), np.array([2.5, 1.5])),
    )
