"""Small textbook models used in docs, tests and the CLI."""

from .bayesnet import BayesianNetwork, Cpt
from .markov import MarkovChain


def rain_network() -> BayesianNetwork:
    """Rain (R) -> Sprinkler (S), both -> WetGrass (W)."""
    return BayesianNetwork(
        ("R", "S", "W"),
        {"R": (), "S": ("R",), "W": ("S", "R")},
        {
            "R": Cpt.from_present((), [0.2]),
            "S": Cpt.from_present(("R",), [0.01, 0.4]),
            # rows: (S, R) = TT, TF, FT, FF
            "W": Cpt.from_present(("S", "R"), [0.99, 0.9, 0.8, 0.0]),
        },
    )


def three_state_chain() -> MarkovChain:
    return MarkovChain(
        ("A", "B", "C"),
        [
            [0.9, 0.075, 0.025],
            [0.15, 0.8, 0.05],
            [0.25, 0.25, 0.5],
        ],
    )
