"""Thurston iteration for the two-asymptotic-value family."""
