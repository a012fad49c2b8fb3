"""Stationary-process and covariance-structure generators.

Each sample vector of length ``p`` is one path of a stationary process in the
coordinate index.  Alternating-sign geometric structures
``(-1)^(a+b) * b^|a-b|`` are the autocovariances of an AR(1) with coefficient
``-b``, so they are sampled by the recursion rather than by a matrix square
root.  All randomness comes from an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "LAWS",
    "OmegaJ",
    "AR1",
    "CS",
    "CenteredGammaIID",
    "CovModel",
    "substream",
    "draw_innovation",
    "draw_innovations",
    "ar1_path",
    "ar1_paths",
    "omega_matrix",
    "ar1_matrix",
    "cs_sample",
    "gamma_iid_sample",
    "long_run_variance_ar1",
    "sample_group",
    "parse_model",
]

Law = Literal["gaussian", "centered_exponential", "centered_uniform"]
LAWS = ("gaussian", "centered_exponential", "centered_uniform")
LAW_ALIASES = {
    "gaussian": "gaussian",
    "normal": "gaussian",
    "centered_exponential": "centered_exponential",
    "exponential": "centered_exponential",
    "exp": "centered_exponential",
    "centered_uniform": "centered_uniform",
    "uniform": "centered_uniform",
}
NON_GAUSSIAN_BURNIN = 1000
_SQRT3 = math.sqrt(3.0)


def _law(law: str) -> str:
    try:
        return LAW_ALIASES[law]
    except KeyError:
        raise ValueError(f"unknown innovation law {law!r}; expected one of {LAWS}") from None


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(master_seed, *key)``.

    The same key always gives the same stream, whatever order or process
    it is requested from.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def draw_innovations(law: str, rng: np.random.Generator, size) -> np.ndarray:
    """Mean-zero, unit-variance innovations of the given law."""
    law = _law(law)
    if law == "gaussian":
        return rng.standard_normal(size)
    if law == "centered_exponential":
        return rng.standard_exponential(size) - 1.0
    return rng.uniform(-_SQRT3, _SQRT3, size)


def draw_innovation(law: str, rng: np.random.Generator) -> float:
    """A single standardized innovation."""
    return float(draw_innovations(law, rng, None))


def _check_phi(phi: float) -> None:
    if not -1.0 < phi < 1.0:
        raise ValueError(f"AR(1) coefficient must satisfy |phi| < 1, got {phi!r}")


def ar1_paths(
    phi: float,
    law: str,
    n: int,
    p: int,
    rng: np.random.Generator,
    burnin: int | None = None,
) -> np.ndarray:
    """``n`` independent AR(1) paths of length ``p`` with unit marginal variance.

    ``X_j = phi X_{j-1} + sqrt(1 - phi^2) e_j``.  Gaussian paths start from the
    exact stationary law; other laws start from one innovation and discard
    ``burnin`` steps (default 1000).
    """
    _check_phi(phi)
    law = _law(law)
    if burnin is None:
        burnin = 0 if law == "gaussian" else NON_GAUSSIAN_BURNIN
    total = burnin + p
    eps = draw_innovations(law, rng, (n, total))
    if phi == 0.0:
        return eps[:, burnin:]
    scale = math.sqrt(1.0 - phi * phi)
    x0 = eps[:, :1]
    out = np.empty((n, total))
    out[:, :1] = x0
    if total > 1:
        out[:, 1:], _ = lfilter([scale], [1.0, -phi], eps[:, 1:], axis=1, zi=phi * x0)
    return out[:, burnin:]


def ar1_path(
    phi: float,
    law: str,
    p: int,
    burnin: int | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """A single AR(1) path of length ``p``; see :func:`ar1_paths`."""
    return ar1_paths(phi, law, 1, p, rng, burnin)[0]


def ar1_matrix(base: float, p: int) -> np.ndarray:
    """``(-1)^(a+b) * base^|a-b|`` for ``a, b = 1..p``."""
    # (-1)^(a+b) = (-1)^|a-b|, so the entries are (-base)^|a-b|
    idx = np.arange(p)
    lag = np.abs(idx[:, None] - idx[None, :])
    return np.power(-float(base), lag)


def omega_matrix(J: int, p: int) -> np.ndarray:
    """Alternating-sign structure with base ``0.2 (J + 2)``, ``J in {0, 1, 2}``."""
    if J not in (0, 1, 2):
        raise ValueError(f"J must be 0, 1 or 2, got {J!r}")
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    return ar1_matrix(0.2 * (J + 2), p)


def cs_sample(
    K: float, phi_cs: float, n: int, p: int, law: str, rng: np.random.Generator
) -> np.ndarray:
    """Compound-symmetry rows ``sqrt(phi_cs) z0 1 + sqrt(K) z``.

    The covariance is ``K I + phi_cs J`` exactly, for every innovation law.
    """
    if not K > 0 or phi_cs < 0:
        raise ValueError(f"need K > 0 and phi_cs >= 0, got K={K!r}, phi_cs={phi_cs!r}")
    common = draw_innovations(law, rng, (n, 1))
    own = draw_innovations(law, rng, (n, p))
    return math.sqrt(phi_cs) * common + math.sqrt(K) * own


def gamma_iid_sample(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. ``Gamma(1, 1) - 1`` entries: mean 0, identity covariance."""
    return rng.standard_exponential((n, p)) - 1.0


def long_run_variance_ar1(phi: float) -> float:
    """``sum_j phi^|j| = (1 + phi) / (1 - phi)`` for a unit-variance AR(1)."""
    _check_phi(phi)
    return (1.0 + phi) / (1.0 - phi)


@dataclass(frozen=True)
class AR1:
    """Alternating-sign geometric covariance ``(-1)^(a+b) base^|a-b|``."""

    base: float

    def __post_init__(self) -> None:
        _check_phi(self.base)

    @property
    def phi(self) -> float:
        return -self.base

    def matrix(self, p: int) -> np.ndarray:
        return ar1_matrix(self.base, p)

    @property
    def name(self) -> str:
        return f"ar1:{self.base:g}"


@dataclass(frozen=True)
class OmegaJ(AR1):
    """``Omega_J``: the AR(1) structure with base ``0.2 (J + 2)``."""

    base: float = 0.0
    J: int = 0

    def __init__(self, J: int):
        if J not in (0, 1, 2):
            raise ValueError(f"J must be 0, 1 or 2, got {J!r}")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "base", 0.2 * (J + 2))

    def matrix(self, p: int) -> np.ndarray:
        return omega_matrix(self.J, p)

    @property
    def name(self) -> str:
        return f"omega{self.J}"


@dataclass(frozen=True)
class CS:
    """Compound symmetry ``K I + phi_cs J_ones``."""

    K: float = 1.0
    phi_cs: float = 0.7

    def __post_init__(self) -> None:
        if not self.K > 0 or self.phi_cs < 0:
            raise ValueError(f"need K > 0 and phi_cs >= 0, got K={self.K!r}, phi_cs={self.phi_cs!r}")

    def matrix(self, p: int) -> np.ndarray:
        return self.K * np.eye(p) + self.phi_cs * np.ones((p, p))

    @property
    def name(self) -> str:
        return f"cs:{self.K:g},{self.phi_cs:g}"


@dataclass(frozen=True)
class CenteredGammaIID:
    """I.i.d. centered ``Gamma(1, 1)`` coordinates (identity covariance)."""

    def matrix(self, p: int) -> np.ndarray:
        return np.eye(p)

    @property
    def name(self) -> str:
        return "gamma"


CovModel = Union[AR1, OmegaJ, CS, CenteredGammaIID]


def sample_group(model: CovModel, law: str, n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. rows whose population covariance is ``model.matrix(p)``.

    ``CenteredGammaIID`` carries its own law and only accepts
    ``"centered_exponential"``.
    """
    law = _law(law)
    if isinstance(model, AR1):
        return ar1_paths(model.phi, law, n, p, rng)
    if isinstance(model, CS):
        return cs_sample(model.K, model.phi_cs, n, p, law, rng)
    if isinstance(model, CenteredGammaIID):
        if law != "centered_exponential":
            raise ValueError(f"centered Gamma(1,1) model cannot be combined with law {law!r}")
        return gamma_iid_sample(n, p, rng)
    raise ValueError(f"unsupported covariance model {model!r}")


def parse_model(text: str) -> CovModel:
    """Parse ``omega0|omega1|omega2|ar1:<base>|cs:<K>,<phi>|gamma``."""
    t = text.strip().lower()
    if t in ("omega0", "omega1", "omega2"):
        return OmegaJ(int(t[-1]))
    if t.startswith("ar1:"):
        return AR1(float(t[4:]))
    if t.startswith("cs:"):
        K, phi = (float(v) for v in t[3:].split(","))
        return CS(K, phi)
    if t == "cs":
        return CS()
    if t == "gamma":
        return CenteredGammaIID()
    raise ValueError(f"cannot parse covariance model {text!r}")
