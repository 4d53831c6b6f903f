"""Coactive trajectory preference learning over a simulated tabletop arm.

The package learns a user's trajectory preferences online from iterative
improvement feedback: a planner samples diverse candidate motions, a
linear scorer ranks them, the user (simulated or live over HTTP) improves
the prediction, and a preference perceptron absorbs the difference.
"""

__version__ = "0.1.0"
