"""Shared oracle helpers for the test suite."""
import numpy as np

from mallows_hitrun.oracle import chi_square_gof, counts_of, empirical, enumerate_model, tv_distance
from mallows_hitrun.rng import make_stream

ALPHA = 1e-3


def one_step_gof(model, n, step, draws, seed=0):
    """Draw from the exact law, apply ``step`` once, test against the exact law."""
    table = enumerate_model(model, n)
    rng = make_stream(seed)
    idx = table.sample(rng, draws)
    out = [step(table.states[k], rng) for k in idx]
    return chi_square_gof(counts_of(table, out), table.probabilities)


def one_step_law(table, start, step, draws, seed=0):
    """Empirical law of one ``step`` from ``start`` over ``table.states``."""
    rng = make_stream(seed)
    return empirical(table, [step(start, rng) for _ in range(draws)])


def tv_of_samples(table, a, b):
    return tv_distance(empirical(table, a), empirical(table, b))


def all_close(a, b, tol):
    return np.allclose(a, b, atol=tol, rtol=0)
