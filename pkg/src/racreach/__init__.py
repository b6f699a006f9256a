"""Maximum reachability probabilities for rectangular automata with random clocks."""

__version__ = "0.1.0"
