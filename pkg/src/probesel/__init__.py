"""probesel: trajectory-based algorithm selection for continuous black-box problems.

Generates solver run data on a BBOB-style suite, derives probing-trajectory,
time-series-feature and landscape-feature inputs, trains selectors and
evaluates them under leave-one-instance-out cross-validation.
"""

__version__ = "0.1.0"
