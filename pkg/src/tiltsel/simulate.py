"""Seeded generators for the benchmark simulation designs.

Design families:

* ``factor2`` / ``factor10`` / ``factor20``: each raw column is a random
  loading combination of q shared standard-normal factors plus its own
  standard-normal noise, which induces widespread cross-column correlation.
* ``fanD``: rows drawn from N(0, Sigma) with equicorrelation phi except
  that the fourth column correlates sqrt(phi) with everything; with the
  fixed coefficient pattern below, that column is marginally uncorrelated
  with the response at the population level while being relevant.
* ``fanE``: fanD plus a fifth column uncorrelated with all others and
  carrying only a small coefficient.
* ``external``: design ingested from CSV, columns rescaled to squared norm
  n (no dataset ships with this package).

Coefficients for the factor/external families put the support uniformly at
random and solve C_SS beta_S = g with g ~ N(0, I/n) on the normalized
design, so the strongest marginal correlation is not guaranteed to sit on
the support. fanD/fanE use the fixed patterns (b, b, b, -3b sqrt(phi)) and
(b, b, b, -3b sqrt(phi), 0.25 b) with b = 2.5, and default to unit
per-observation noise; everything else requires an explicit R^2 target
that calibrates the noise scale.

All randomness flows from ``replicate_seed`` through fixed spawn keys
(design 0, coefficients 1, noise 2), so a spec reproduces bit-identically.
``TrueModel.beta`` is stored in the raw-column basis (de-normalized), the
same basis in which fitted coefficients are reported.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .linalg import RANK_TOL, DesignMatrix, normalize_columns

FAN_BETA = 2.5
COEFFICIENT_RESAMPLE_LIMIT = 100

#: Spawn keys deriving independent per-purpose streams from replicate_seed.
STREAM_DESIGN = 0
STREAM_COEFFICIENTS = 1
STREAM_NOISE = 2
STREAM_THRESHOLD = 3

PRNG_NAME = "numpy default_rng (PCG64), SeedSequence spawn-key streams"


class NotPositiveDefinite(ValueError):
    """Requested population covariance admits no Cholesky factor."""


class SingularSupportGram(RuntimeError):
    """No sampled support produced a well-conditioned correlation submatrix."""


class ZeroSignal(ValueError):
    """The signal variance is too small to calibrate a noise level."""


class ModelKind(str, enum.Enum):
    FACTOR2 = "factor2"
    FACTOR10 = "factor10"
    FACTOR20 = "factor20"
    FAN_D = "fanD"
    FAN_E = "fanE"
    EXTERNAL = "external"


FACTOR_COUNTS = {ModelKind.FACTOR2: 2, ModelKind.FACTOR10: 10, ModelKind.FACTOR20: 20}


@dataclass(frozen=True)
class SimSpec:
    """One simulated data set: design family, shape, sparsity, noise target."""

    model: ModelKind
    n: int
    p: int
    sparsity: int = 10
    phi: float | None = None
    r_squared: float | None = None
    replicate_seed: int = 0
    external_path: str | Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", ModelKind(self.model))
        if self.n < 4:
            raise ValueError(f"need n >= 4, got {self.n}")
        if self.model is ModelKind.FAN_D:
            object.__setattr__(self, "sparsity", 4)
        elif self.model is ModelKind.FAN_E:
            object.__setattr__(self, "sparsity", 5)
        if self.p < self.sparsity:
            raise ValueError(f"need p >= sparsity, got p={self.p}, sparsity={self.sparsity}")
        if self.model in (ModelKind.FAN_D, ModelKind.FAN_E) and self.phi is None:
            raise ValueError("fanD/fanE require phi")
        if self.r_squared is not None and not 0.0 < self.r_squared < 1.0:
            raise ValueError(f"r_squared must be in (0, 1), got {self.r_squared}")


@dataclass(frozen=True, eq=False)
class TrueModel:
    """Ground truth for one replicate.

    ``beta`` lives in the raw-column basis. ``sigma`` is the noise scale in
    the per-observation-variance-sigma^2/n convention (nan until the noise
    has been fixed by ``generate_replicate``).
    """

    support: tuple[int, ...]
    beta: np.ndarray
    sigma: float
    r_squared_target: float | None
    seed: int


def _stream(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def fan_covariance(p: int, phi: float, zero_column: bool = False) -> np.ndarray:
    """Equicorrelation covariance with the special fourth (and fifth) column.

    Off-diagonals are phi except row/column 3 (0-based), which is
    sqrt(phi); with ``zero_column`` row/column 4 is zeroed (applied last,
    so it wins at the (3, 4) entry).
    """
    if phi < 0.0 or phi > 1.0:
        raise NotPositiveDefinite(f"phi={phi} outside [0, 1]")
    if p < 4 or (zero_column and p < 5):
        raise ValueError("fan designs need p >= 4 (fanE: p >= 5)")
    sigma = np.full((p, p), float(phi))
    sigma[3, :] = np.sqrt(phi)
    sigma[:, 3] = np.sqrt(phi)
    if zero_column:
        sigma[4, :] = 0.0
        sigma[:, 4] = 0.0
    np.fill_diagonal(sigma, 1.0)
    return sigma


def generate_design(spec: SimSpec) -> np.ndarray:
    """Raw (un-normalized) n x p design for the spec's model family."""
    rng = _stream(spec.replicate_seed, STREAM_DESIGN)
    if spec.model in FACTOR_COUNTS:
        q = FACTOR_COUNTS[spec.model]
        factors = rng.standard_normal((spec.n, q))
        loadings = rng.standard_normal((spec.p, q))
        noise = rng.standard_normal((spec.n, spec.p))
        return factors @ loadings.T + noise
    if spec.model in (ModelKind.FAN_D, ModelKind.FAN_E):
        sigma = fan_covariance(spec.p, spec.phi, zero_column=spec.model is ModelKind.FAN_E)
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"covariance for phi={spec.phi} is not positive definite") from exc
        return rng.standard_normal((spec.n, spec.p)) @ chol.T
    if spec.model is ModelKind.EXTERNAL:
        if spec.external_path is None:
            raise ValueError("external model requires external_path")
        raw = np.loadtxt(spec.external_path, delimiter=",", ndmin=2)
        if raw.shape[1] != spec.p or raw.shape[0] != spec.n:
            raise ValueError(
                f"external design is {raw.shape}, spec says ({spec.n}, {spec.p})"
            )
        norms = np.linalg.norm(raw, axis=0)
        if np.any(norms <= 0):
            raise ValueError("external design has a zero column")
        return raw * (np.sqrt(spec.n) / norms)
    raise ValueError(f"unknown model {spec.model}")


def _solve_support_gram(corr: np.ndarray, g: np.ndarray) -> np.ndarray | None:
    u, s, vt = np.linalg.svd(corr)
    if s[0] <= 0.0 or s[-1] <= RANK_TOL * s[0]:
        return None
    return vt.T @ ((u.T @ g) / s)


def generate_coefficients(X: DesignMatrix, spec: SimSpec) -> TrueModel:
    """Sparse ground-truth coefficients for the normalized design.

    The returned beta is already de-normalized. ``sigma`` is nan here; the
    noise scale is fixed by ``calibrate_noise`` / ``generate_replicate``.
    """
    p = X.n_vars
    if spec.model in (ModelKind.FAN_D, ModelKind.FAN_E):
        pattern = [FAN_BETA, FAN_BETA, FAN_BETA, -3.0 * FAN_BETA * np.sqrt(spec.phi)]
        if spec.model is ModelKind.FAN_E:
            pattern.append(0.25 * FAN_BETA)
        beta = np.zeros(p)
        beta[: len(pattern)] = pattern
        return TrueModel(
            support=tuple(range(len(pattern))),
            beta=beta,
            sigma=float("nan"),
            r_squared_target=spec.r_squared,
            seed=spec.replicate_seed,
        )
    rng = _stream(spec.replicate_seed, STREAM_COEFFICIENTS)
    n = X.n_obs
    for _ in range(COEFFICIENT_RESAMPLE_LIMIT):
        support = np.sort(rng.choice(p, size=spec.sparsity, replace=False))
        corr = X.values[:, support].T @ X.values[:, support]
        g = rng.standard_normal(spec.sparsity) / np.sqrt(n)
        beta_support = _solve_support_gram(corr, g)
        if beta_support is None:
            continue
        beta = np.zeros(p)
        beta[support] = beta_support / X.column_norms_original[support]
        return TrueModel(
            support=tuple(int(j) for j in support),
            beta=beta,
            sigma=float("nan"),
            r_squared_target=spec.r_squared,
            seed=spec.replicate_seed,
        )
    raise SingularSupportGram(
        f"no well-conditioned support found in {COEFFICIENT_RESAMPLE_LIMIT} attempts"
    )


def signal_vector(X: DesignMatrix, model: TrueModel) -> np.ndarray:
    """X beta in the shared observation space (basis-independent)."""
    beta_normalized = model.beta * X.column_norms_original
    return X.values @ beta_normalized


def calibrate_noise(X: DesignMatrix, model: TrueModel, r_squared: float) -> float:
    """Noise scale sigma with per-observation variance sigma^2/n hitting R^2.

    R^2 = v / (v + sigma^2/n) where v is the empirical variance of the
    signal over observations, so sigma^2 = n v (1 - R^2) / R^2.
    """
    if not 0.0 < r_squared < 1.0:
        raise ValueError(f"r_squared must be in (0, 1), got {r_squared}")
    v = float(np.var(signal_vector(X, model)))
    if v < 1e-12:
        raise ZeroSignal(f"signal variance {v} too small")
    return float(np.sqrt(X.n_obs * v * (1.0 - r_squared) / r_squared))


def generate_replicate(spec: SimSpec) -> tuple[np.ndarray, DesignMatrix, np.ndarray, TrueModel]:
    """Raw design, normalized design, response, and ground truth for a spec."""
    raw = generate_design(spec)
    X = normalize_columns(raw)
    truth = generate_coefficients(X, spec)
    if spec.r_squared is not None:
        sigma = calibrate_noise(X, truth, spec.r_squared)
    elif spec.model in (ModelKind.FAN_D, ModelKind.FAN_E):
        sigma = float(np.sqrt(spec.n))
    else:
        raise ValueError(f"{spec.model.value} requires an explicit r_squared")
    rng = _stream(spec.replicate_seed, STREAM_NOISE)
    noise = rng.standard_normal(spec.n) * (sigma / np.sqrt(spec.n))
    y = signal_vector(X, truth) + noise
    return raw, X, y, replace(truth, sigma=sigma)


def threshold_seed(replicate_seed: int) -> int:
    """Seed for the replicate's null-reference stream."""
    seq = np.random.SeedSequence(entropy=replicate_seed, spawn_key=(STREAM_THRESHOLD,))
    return int(seq.generate_state(1, np.uint64)[0])
