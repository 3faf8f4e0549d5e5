import numpy as np
import pytest

from cwvsmix.model import ExposureDataset, Priors
from cwvsmix.rng import RngStream
from cwvsmix.sampler import draw_prior_state


def make_dataset(n, m, q, p=2, seed=0, y=None):
    gen = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), gen.standard_normal((n, p - 1))]) if p > 1 else np.ones((n, 1))
    Z = gen.standard_normal((n, m, q))
    if y is None:
        y = (gen.random(n) < 0.5).astype(float)
    return ExposureDataset(y=np.asarray(y, dtype=float), X=X, Z=Z)


def random_state(data, seed, priors=None, disconnected=False):
    """A prior draw with randomized PG latents and a forced mix of active periods."""
    priors = priors or Priors(sigma2_beta=1.0)
    st = draw_prior_state(data, priors, RngStream(seed, 7), disconnected=disconnected)
    gen = np.random.default_rng(seed + 10_000)
    st.w = gen.uniform(0.05, 1.0, data.n)
    return st


@pytest.fixture
def tiny():
    return make_dataset(8, 3, 2, p=2, seed=11)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
