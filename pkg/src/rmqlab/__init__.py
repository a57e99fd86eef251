"""rmqlab: instances, solvers and complexity estimates for the Regular MQ problem over GF(2)."""

__version__ = "0.1.0"
