"""Discrete causal structure, chain recurrence and time functions on 2-D spacetimes."""
