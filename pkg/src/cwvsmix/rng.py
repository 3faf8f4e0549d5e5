"""Random variate generators shared by the sampler and the simulation harness.

Every generator takes an :class:`RngStream`, a named ``(seed, stream_id)``
pair backed by a counter-based Philox bit generator. Equal pairs replay the
same sequence; distinct ``stream_id`` values (or child paths) give independent
streams through :class:`numpy.random.SeedSequence` spawn keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_ndtr, ndtr, ndtri

from .errors import InputError

# Truncation point of the alternating-series sampler (Devroye / Polson-Scott-Windle).
_PG_TRUNC = 0.64
_PI2 = math.pi**2

# Standardized bound beyond which the truncated normal switches to rejection.
_TN_TAIL = 4.0


@dataclass
class RngStream:
    """A reproducible random stream owned by one chain or replicate."""

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0 or any(p < 0 for p in self.path):
            raise InputError("seed and stream ids must be non-negative")

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per simulation replicate."""
        return RngStream(self.seed, self.stream_id, (*self.path, int(index)))

    def fresh(self) -> "RngStream":
        """Same identity, rewound to the start of the sequence."""
        return RngStream(self.seed, self.stream_id, self.path)


# --------------------------------------------------------------------------
# Polya-Gamma PG(1, c)
# --------------------------------------------------------------------------


def _pg_coef(n: int, x: np.ndarray) -> np.ndarray:
    """Coefficient a_n(x) of the alternating series for J*(1)."""
    k = n + 0.5
    out = np.empty_like(x)
    left = x <= _PG_TRUNC
    xl = x[left]
    out[left] = np.exp(
        math.log(math.pi * k) + 1.5 * np.log(2.0 / (math.pi * xl)) - 2.0 * k * k / xl
    )
    xr = x[~left]
    out[~left] = math.pi * k * np.exp(-0.5 * k * k * _PI2 * xr)
    return out


def _truncated_inverse_gaussian(z: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """IG(1/z, 1) restricted to (0, TRUNC); z = 0 is the Levy limit."""
    t = _PG_TRUNC
    x = np.empty_like(z)
    small = z < 1.0 / t

    # mean above the truncation: chi-square proposal with tilt rejection
    idx = np.flatnonzero(small)
    while idx.size:
        e1 = gen.standard_exponential(idx.size)
        e2 = gen.standard_exponential(idx.size)
        ok = e1 * e1 <= 2.0 * e2 / t
        cand = t / (1.0 + t * e1) ** 2
        u = gen.random(idx.size)
        ok &= u <= np.exp(-0.5 * z[idx] ** 2 * cand)
        x[idx[ok]] = cand[ok]
        idx = idx[~ok]

    idx = np.flatnonzero(~small)
    while idx.size:
        mu = 1.0 / z[idx]
        y = gen.standard_normal(idx.size) ** 2
        my = mu * y
        cand = mu + 0.5 * mu * my - 0.5 * mu * np.sqrt(4.0 * my + my * my)
        u = gen.random(idx.size)
        flip = u > mu / (mu + cand)
        cand[flip] = mu[flip] ** 2 / cand[flip]
        ok = cand < t
        x[idx[ok]] = cand[ok]
        idx = idx[~ok]
    return x


def draw_polya_gamma(c, rng: RngStream, b: int = 1):
    """Exact PG(1, c) draws via the alternating-series rejection sampler.

    ``c`` may be a scalar or an array; the result has the same shape.
    """
    if b != 1:
        raise InputError("only PG(1, c) is supported")
    c_arr = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c_arr)):
        raise InputError("invalid tilt")
    scalar = c_arr.ndim == 0
    z = 0.5 * np.abs(np.atleast_1d(c_arr)).ravel()
    gen = rng.gen
    t = _PG_TRUNC

    kk = _PI2 / 8.0 + 0.5 * z * z
    log_p = math.log(math.pi / 2.0) - np.log(kk) - kk * t
    sq = math.sqrt(t)
    log_q = math.log(2.0) + np.logaddexp(
        -z + log_ndtr((t * z - 1.0) / sq), z + log_ndtr(-(t * z + 1.0) / sq)
    )
    prob_exp = expit(log_p - log_q)

    out = np.empty_like(z)
    pending = np.arange(z.size)
    while pending.size:
        zp = z[pending]
        use_exp = gen.random(pending.size) < prob_exp[pending]
        x = np.empty_like(zp)
        x[use_exp] = t + gen.standard_exponential(int(use_exp.sum())) / kk[pending][use_exp]
        if (~use_exp).any():
            x[~use_exp] = _truncated_inverse_gaussian(zp[~use_exp], gen)

        s = _pg_coef(0, x)
        y = gen.random(pending.size) * s
        decided = np.zeros(pending.size, dtype=bool)
        accepted = np.zeros(pending.size, dtype=bool)
        n = 0
        while not decided.all():
            n += 1
            live = ~decided
            a_n = np.zeros_like(x)
            a_n[live] = _pg_coef(n, x[live])
            if n % 2 == 1:
                s = s - a_n
                hit = live & (y <= s)
                accepted |= hit
                decided |= hit
            else:
                s = s + a_n
                decided |= live & (y > s)
        out[pending[accepted]] = 0.25 * x[accepted]
        pending = pending[~accepted]

    if scalar:
        return float(out[0])
    return out.reshape(c_arr.shape)


def pg_mean(c) -> np.ndarray:
    """E[PG(1, c)] = tanh(c/2) / (2c), with the c -> 0 limit 1/4."""
    c = np.abs(np.asarray(c, dtype=float))
    safe = np.where(c < 1e-8, 1.0, c)
    return np.where(c < 1e-8, 0.25, np.tanh(safe / 2.0) / (2.0 * safe))


def pg_variance(c) -> np.ndarray:
    """Var[PG(1, c)]; limit 1/24 at c = 0."""
    c = np.abs(np.asarray(c, dtype=float))
    safe = np.where(c < 1e-4, 1.0, c)
    # (sinh(c) - c) / (4 c^3 cosh^2(c/2))
    v = (np.sinh(safe) - safe) / (4.0 * safe**3 * np.cosh(safe / 2.0) ** 2)
    return np.where(c < 1e-4, 1.0 / 24.0, v)


# --------------------------------------------------------------------------
# truncated normal
# --------------------------------------------------------------------------


def _std_normal_above(a: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Standard normal conditioned on x > a, elementwise."""
    out = np.empty_like(a)
    tail = a > _TN_TAIL
    mild = ~tail
    if mild.any():
        am = a[mild]
        # inverse CDF through the upper tail mass keeps precision for positive a
        u = gen.random(am.size)
        upper = ndtr(-am)
        out[mild] = -ndtri(u * upper)
    idx = np.flatnonzero(tail)
    while idx.size:
        at = a[idx]
        rate = 0.5 * (at + np.sqrt(at * at + 4.0))
        cand = at + gen.standard_exponential(idx.size) / rate
        ok = gen.random(idx.size) <= np.exp(-0.5 * (cand - rate) ** 2)
        out[idx[ok]] = cand[ok]
        idx = idx[~ok]
    # guard against rounding onto the bound
    bad = ~(out > a)
    while bad.any():
        out[bad] = -ndtri(gen.random(int(bad.sum())) * ndtr(-a[bad]))
        out[bad] = np.where(out[bad] > a[bad], out[bad], np.nextafter(a[bad], np.inf))
        bad = ~(out > a)
    return out


def draw_truncated_normal(mean, sd, above_zero, rng: RngStream):
    """N(mean, sd^2) restricted to (0, inf) where ``above_zero`` else (-inf, 0].

    Arguments broadcast; a scalar call returns a float.
    """
    mean, sd, above = np.broadcast_arrays(
        np.asarray(mean, dtype=float), np.asarray(sd, dtype=float), np.asarray(above_zero, dtype=bool)
    )
    if np.any(~(sd > 0)):
        raise InputError("truncated normal needs sd > 0")
    scalar = mean.ndim == 0
    mean, sd, above = (np.atleast_1d(v).ravel() for v in (mean, sd, above))
    # reflect the lower-truncated case: x <= 0  <=>  -x >= 0
    sign = np.where(above, 1.0, -1.0)
    m = sign * mean
    lower = -m / sd
    z = _std_normal_above(lower, rng.gen)
    out = sign * (m + sd * z)
    # enforce the side exactly under rounding
    out = np.where(above, np.where(out > 0, out, np.nextafter(0.0, 1.0)), np.minimum(out, 0.0))
    if scalar:
        return float(out[0])
    return out


# --------------------------------------------------------------------------
# multivariate normal, Dirichlet
# --------------------------------------------------------------------------


def draw_mvn(mean, chol_lower, rng: RngStream) -> np.ndarray:
    """mean + L z with z standard normal; ``chol_lower`` is the covariance factor."""
    mean = np.asarray(mean, dtype=float)
    chol = np.atleast_2d(np.asarray(chol_lower, dtype=float))
    k = mean.shape[0]
    if chol.shape != (k, k):
        raise InputError(f"dimension mismatch: mean {k}, factor {chol.shape}")
    d = np.diag(chol)
    if not np.all(d > 0):
        raise InputError("Cholesky factor needs a positive diagonal")
    return mean + chol @ rng.gen.standard_normal(k)


def draw_mvn_precision(linear, prec_chol, rng: RngStream) -> np.ndarray:
    """Draw from N(Q^-1 b, Q^-1) given b and the lower Cholesky factor of Q."""
    from scipy.linalg import solve_triangular

    b = np.asarray(linear, dtype=float)
    half = solve_triangular(prec_chol, b, lower=True)
    return solve_triangular(prec_chol, half + rng.gen.standard_normal(b.shape[0]), lower=True, trans="T")


def draw_dirichlet(alpha, rng: RngStream) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0 or np.any(~(alpha > 0)):
        raise InputError("Dirichlet needs positive concentration parameters")
    if alpha.size == 1:
        return np.ones(1)
    g = rng.gen.standard_gamma(alpha)
    return g / g.sum()
