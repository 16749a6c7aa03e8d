"""Path simulation for the interval GARCH process.

The process is r_t = h_t * [eps_t - eta_t, eps_t + eta_t] with eps_t standard
normal, eta_t Gamma(k, 1), and the positive scale h_t following

    h_t = mu + sum_i alpha_i |lambda_{t-i}| + sum_i beta_i delta_{t-i}
             + sum_i gamma_i h_{t-i},

so the emitted center and radius are lambda_t = h_t eps_t, delta_t = h_t eta_t.

Randomness comes from numpy's PCG64 generator (np.random.default_rng); a
given seed and config reproduce the path bit-for-bit on the same build.

The innovation laws are fixed to the parametric pair above. The model itself
only needs E(eps)=0, E(eta)=k, eta>0, so alternative innovation samplers
would slot into the two rng draws in simulate(); that generalization is
deliberately not exposed as configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import ConfigError, Diverged
from .intervals import Interval, RangeSeries
from .moments import IntGarchParams, is_mean_stationary, mean_h, mean_r

__all__ = ["SimConfig", "SimOutput", "simulate", "simulate_ensemble", "derive_seed"]

H_OVERFLOW_GUARD = 1e12

H0Mode = Union[str, float]  # "stationary_mean" | "zero" | fixed value
R0Mode = Union[str, Interval]  # "stationary_mean" | fixed interval


@dataclass(frozen=True)
class SimConfig:
    params: IntGarchParams
    length: int
    seed: int
    burn_in: int = 1000
    h0_mode: H0Mode = "stationary_mean"
    r0_mode: R0Mode = "stationary_mean"

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError(f"length must be >= 1, got {self.length}")
        if self.burn_in < 0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if isinstance(self.h0_mode, str):
            if self.h0_mode not in ("stationary_mean", "zero"):
                raise ConfigError(f"unknown h0_mode {self.h0_mode!r}")
        elif not (isinstance(self.h0_mode, (int, float)) and self.h0_mode >= 0.0):
            raise ConfigError(f"fixed h0 must be a nonnegative number, got {self.h0_mode!r}")
        if isinstance(self.r0_mode, str):
            if self.r0_mode != "stationary_mean":
                raise ConfigError(f"unknown r0_mode {self.r0_mode!r}")
        elif not isinstance(self.r0_mode, Interval):
            raise ConfigError(f"fixed r0 must be an Interval, got {self.r0_mode!r}")
        needs_mean = self.h0_mode == "stationary_mean" or self.r0_mode == "stationary_mean"
        if needs_mean and not is_mean_stationary(self.params):
            raise ConfigError(
                "stationary_mean initialization requires mean-stationary parameters"
            )


@dataclass
class SimOutput:
    series: RangeSeries
    h_path: np.ndarray
    eps_path: np.ndarray
    eta_path: np.ndarray
    config: SimConfig = field(repr=False)


def _resolve_start(cfg: SimConfig) -> tuple:
    if cfg.h0_mode == "stationary_mean":
        h0 = mean_h(cfg.params)
    elif cfg.h0_mode == "zero":
        h0 = 0.0
    else:
        h0 = float(cfg.h0_mode)
    if cfg.r0_mode == "stationary_mean":
        r0 = mean_r(cfg.params)
    else:
        r0 = cfg.r0_mode
    return h0, r0


def simulate(cfg: SimConfig) -> SimOutput:
    """Generate one path; returns the post-burn-in steps.

    Pre-sample lags (t - i <= 0) are filled from the configured h0/r0. The
    recursion aborts with Diverged once h_t exceeds 1e12, to fail fast on
    explosive parameter sets.
    """
    params = cfg.params
    k, mu = params.k, params.mu
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    p, q, w = params.p, params.q, params.w
    h0, r0 = _resolve_start(cfg)

    total = cfg.burn_in + cfg.length
    rng = np.random.default_rng(cfg.seed)
    eps = rng.standard_normal(total)
    eta = rng.gamma(k, 1.0, total)
    eps_list = eps.tolist()
    eta_list = eta.tolist()

    m = max(p, q, w)
    abs_lam = [abs(r0.center)] * m
    delt = [r0.radius] * m
    hbuf = [h0] * m
    h_out = [0.0] * total
    lam_out = [0.0] * total
    del_out = [0.0] * total

    for t in range(total):
        u = mu
        for i in range(p):
            u = u + alpha[i] * abs_lam[-1 - i]
        for i in range(q):
            u = u + beta[i] * delt[-1 - i]
        ht = u
        for i in range(w):
            ht = ht + gamma[i] * hbuf[-1 - i]
        if ht > H_OVERFLOW_GUARD:
            raise Diverged(t, ht)
        lam = ht * eps_list[t]
        dl = ht * eta_list[t]
        h_out[t] = ht
        lam_out[t] = lam
        del_out[t] = dl
        abs_lam.append(lam if lam >= 0.0 else -lam)
        delt.append(dl)
        hbuf.append(ht)

    b = cfg.burn_in
    series = RangeSeries(range(cfg.length), lam_out[b:], del_out[b:])
    return SimOutput(
        series=series,
        h_path=np.asarray(h_out[b:]),
        eps_path=eps[b:],
        eta_path=eta[b:],
        config=cfg,
    )


def derive_seed(master_seed: int, index: int) -> int:
    """Deterministic per-replication seed from a master seed and an index."""
    ss = np.random.SeedSequence((int(master_seed), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def simulate_ensemble(cfg: SimConfig, replications: int) -> list[SimOutput]:
    """Independent paths with seeds derived from cfg.seed and the index.

    Replication i only depends on (cfg.seed, i), so it is identical whether
    produced here or by calling simulate with derive_seed(cfg.seed, i).
    """
    if replications < 1:
        raise ConfigError(f"replications must be >= 1, got {replications}")
    return [
        simulate(replace(cfg, seed=derive_seed(cfg.seed, i))) for i in range(replications)
    ]
