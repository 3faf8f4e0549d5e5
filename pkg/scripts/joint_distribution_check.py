"""Stand-alone joint-distribution ("getting it right") check with a per-parameter table.

Compares prior-then-data draws with a chain that alternates one kernel sweep
and a fresh outcome vector; any wrong full conditional shows up as a large z.

    python scripts/joint_distribution_check.py --draws 5000 --thin 5
"""

import argparse
import math

import numpy as np

from cwvsmix.model import ExposureDataset, Priors
from cwvsmix.rng import RngStream
from cwvsmix.sampler import Sampler, SweepConfig, draw_prior_state, simulate_outcomes


def scalars(st):
    r = st.risk
    out = {f"beta[{j}]": st.beta[j] for j in range(st.beta.size)}
    out.update(A11=r.A11, A21=r.A21, A22=r.A22, phi_lambda=st.phi_lambda, phi1=r.phi1, phi2=r.phi2)
    for t in range(r.delta1.size):
        out[f"delta1[{t + 1}]"] = r.delta1[t]
        out[f"delta2[{t + 1}]"] = r.delta2[t]
        out[f"gamma[{t + 1}]"] = r.gamma[t]
    for (t, c), v in np.ndenumerate(st.lambda_star):
        out[f"lambda_star[{t + 1},{c + 1}]"] = v
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=30)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--draws", type=int, default=5000)
    ap.add_argument("--thin", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    gen = np.random.default_rng(args.seed)
    X = np.column_stack([np.ones(args.n), gen.standard_normal(args.n)])
    Z = gen.standard_normal((args.n, args.m, args.q))
    frame = ExposureDataset(y=np.zeros(args.n), X=X, Z=Z)
    priors = Priors(sigma2_beta=1.0)

    rng = RngStream(args.seed, 1)
    A = [scalars(draw_prior_state(frame, priors, rng)) for _ in range(args.draws)]
    rng = RngStream(args.seed, 2)
    st = draw_prior_state(frame, priors, rng)
    ker = Sampler(ExposureDataset(y=simulate_outcomes(st, rng), X=X, Z=Z), priors,
                  SweepConfig(n_burn=0, n_keep=0, adapt=False))
    B = []
    for _ in range(args.draws):
        for _ in range(args.thin):
            ker.sweep(st, rng)
            ker.set_data(ExposureDataset(y=simulate_outcomes(st, rng), X=X, Z=Z))
        B.append(scalars(st))

    names = list(A[0])
    a = np.array([[d[k] for k in names] for d in A])
    b = np.array([[d[k] for k in names] for d in B])
    nb = 50
    b_use = b[: len(b) // nb * nb]
    se_b = b_use.reshape(nb, -1, b.shape[1]).mean(axis=1).std(axis=0, ddof=1) / math.sqrt(nb)
    z = (a.mean(0) - b.mean(0)) / np.sqrt(a.var(0, ddof=1) / len(a) + se_b**2)
    print(f"{'parameter':22s} {'prior':>9s} {'chain':>9s} {'z':>7s}")
    for k, x, y, zz in zip(names, a.mean(0), b.mean(0), z):
        print(f"{k:22s} {x:9.4f} {y:9.4f} {zz:7.2f}")
    print(f"max |z| = {np.abs(z).max():.2f}")


if __name__ == "__main__":
    main()
