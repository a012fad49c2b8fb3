"""Homogeneity tests for several covariance matrices.

The headline statistic replaces the determinants in Box's M with scalar
quadratic forms ``Ŝ_i = y S_i yᵀ``::

    L_k = (n - k) log V - sum_i (n_i - 1) log Ŝ_i,
    V   = sum_i (n_i - 1) Ŝ_i / (n - k),

and decisions use the Bartlett-scaled ``rho * L_k`` against ``chi2_{k-1}``.
Block tests apply the same statistic to indicator selectors of contiguous
coordinate blocks, which localizes where the covariances differ.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np

from .exceptions import DataError, DegenerateDataError
from .quadform import as_group, quad_form
from .statmath import chi2_quantile, chi2_sf

__all__ = [
    "TestResult",
    "BlockPartition",
    "BlockTestResult",
    "DimensionConditionReport",
    "as_groups",
    "rho_factor",
    "lk_from_quadforms",
    "lk_test",
    "rejection_region",
    "default_partition",
    "explicit_partition",
    "block_tests",
    "box_m",
    "box_m_correction",
    "dimension_condition",
]

DecisionMode = Literal["upper", "region"]
DECISION_MODES = ("upper", "region")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one homogeneity test.

    ``p_value`` is always the upper-tail probability of ``scaled_statistic``.
    ``region`` is the two-sided rejection region ``[0, lo) U (hi, inf)``, set
    only in ``"region"`` decision mode.
    """

    __test__ = False  # keep pytest from collecting this class

    label: str
    statistic: float
    scale_factor: float
    scaled_statistic: float
    df: int
    p_value: float
    reject: bool
    alpha: float
    mode: str
    region: tuple[float, float] | None = None
    group_quadforms: tuple[float, ...] = ()
    pooled: float | None = None
    warnings: tuple[str, ...] = ()

    def asdict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DimensionConditionReport:
    """Advisory check of ``p >= c * n_max**(3r/(r-2))``.

    The per-group threshold ``c * n_max**(r/(r-2))`` is the weaker condition
    under which each scaled quadratic form is approximately chi-square.
    """

    p: int
    n_max: int
    r: float
    c: float
    threshold: float
    satisfied: bool
    group_threshold: float
    group_satisfied: bool

    def warning(self) -> str | None:
        if self.satisfied:
            return None
        return (
            f"dimension advisory: p={self.p} < c*n_max^(3r/(r-2)) = {self.threshold:.6g} "
            f"(r={self.r:g}, c={self.c:g}, n_max={self.n_max}); "
            "the chi-square approximation is not guaranteed"
        )


def dimension_condition(p: int, n_max: int, r: float = 4.0, c: float = 1.0) -> DimensionConditionReport:
    """Report whether ``p`` is large enough relative to ``n_max``.

    Advisory only; tests never refuse to run because of it.
    """
    if not r > 2:
        raise ValueError(f"moment order r must exceed 2, got {r!r}")
    if not c > 0:
        raise ValueError(f"constant c must be positive, got {c!r}")
    threshold = c * float(n_max) ** (3.0 * r / (r - 2.0))
    group_threshold = c * float(n_max) ** (r / (r - 2.0))
    return DimensionConditionReport(
        p=int(p),
        n_max=int(n_max),
        r=float(r),
        c=float(c),
        threshold=threshold,
        satisfied=p >= threshold,
        group_threshold=group_threshold,
        group_satisfied=p >= group_threshold,
    )


def as_groups(groups: Sequence) -> list[np.ndarray]:
    """Validate ``k >= 2`` groups sharing a common dimension ``p``."""
    arrays = [as_group(g) for g in groups]
    if len(arrays) < 2:
        raise DataError(f"need at least k=2 groups, got {len(arrays)}")
    p = arrays[0].shape[1]
    for i, a in enumerate(arrays):
        if a.shape[1] != p:
            raise DataError(f"group {i} has p={a.shape[1]}, expected p={p}")
    return arrays


def rho_factor(n_sizes: Sequence[int]) -> float:
    """Bartlett scale factor ``rho = 1 / C``.

    ``C = 1 + (sum_i 1/(n_i - 1) - 1/(n - k)) / (3 (k - 1))``.
    """
    k = len(n_sizes)
    if k < 2:
        raise ValueError(f"need at least two groups, got {k}")
    if any(ni < 2 for ni in n_sizes):
        raise ValueError(f"every group needs n_i >= 2, got {list(n_sizes)}")
    pooled_df = sum(ni - 1 for ni in n_sizes)
    spread = math.fsum(1.0 / (ni - 1) for ni in n_sizes) - 1.0 / pooled_df
    return 1.0 / (1.0 + spread / (3.0 * (k - 1)))


def lk_from_quadforms(quadforms: Sequence[float], n_sizes: Sequence[int]) -> float:
    """Modified M statistic from the per-group quadratic forms.

    Raises
    ------
    DegenerateDataError
        If any quadratic form is not strictly positive.
    """
    if len(quadforms) != len(n_sizes):
        raise ValueError("quadforms and n_sizes differ in length")
    for i, s in enumerate(quadforms):
        if not s > 0:
            raise DegenerateDataError(
                f"group {i}: quadratic form is {s!r}; need a positive value "
                "(constant or rank-deficient data?)",
                group=i,
            )
    if all(s == quadforms[0] for s in quadforms):
        return 0.0
    dfs = [ni - 1 for ni in n_sizes]
    pooled = math.fsum(d * s for d, s in zip(dfs, quadforms)) / sum(dfs)
    # sum_i d_i log(V / S_i) avoids cancelling two large logs
    return math.fsum(d * math.log(pooled / s) for d, s in zip(dfs, quadforms))


def rejection_region(alpha: float, df: int) -> tuple[float, float]:
    """Equal-tailed chi-square cut points ``(q(alpha/2), q(1 - alpha/2))``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return chi2_quantile(alpha / 2.0, df), chi2_quantile(1.0 - alpha / 2.0, df)


def _decide(scaled: float, df: int, alpha: float, mode: str):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    p_value = chi2_sf(scaled, df)
    if mode == "upper":
        return p_value, None, p_value < alpha
    if mode == "region":
        lo, hi = rejection_region(alpha, df)
        return p_value, (lo, hi), scaled < lo or scaled > hi
    raise ValueError(f"unknown decision mode {mode!r}; expected one of {DECISION_MODES}")


def _check_selector(y: np.ndarray, expert: bool) -> None:
    if not np.any(y):
        raise ValueError("selector vector is identically zero")
    if not expert and not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError(
            "general (non 0/1) selector weights are not covered by the asymptotic "
            "theory; pass expert=True to use them anyway"
        )


def _lk_result(
    qf: Sequence[float],
    n_sizes: Sequence[int],
    alpha: float,
    mode: str,
    label: str,
    warnings: tuple[str, ...] = (),
) -> TestResult:
    stat = lk_from_quadforms(qf, n_sizes)
    rho = rho_factor(n_sizes)
    scaled = rho * stat
    df = len(n_sizes) - 1
    p_value, region, reject = _decide(scaled, df, alpha, mode)
    dfs = [ni - 1 for ni in n_sizes]
    pooled = math.fsum(d * s for d, s in zip(dfs, qf)) / sum(dfs)
    return TestResult(
        label=label,
        statistic=stat,
        scale_factor=rho,
        scaled_statistic=scaled,
        df=df,
        p_value=p_value,
        reject=bool(reject),
        alpha=alpha,
        mode=mode,
        region=region,
        group_quadforms=tuple(float(s) for s in qf),
        pooled=pooled,
        warnings=warnings,
    )


def lk_test(
    groups: Sequence,
    y=None,
    alpha: float = 0.05,
    mode: DecisionMode = "upper",
    *,
    expert: bool = False,
    r: float = 4.0,
    c: float = 1.0,
    label: str = "all",
) -> TestResult:
    """Bartlett-scaled modified M test of ``Sigma_1 = ... = Sigma_k``.

    Parameters
    ----------
    groups : sequence of array_like
        ``k >= 2`` sample matrices of shape ``(n_i, p)``.
    y : array_like, optional
        Selector vector; all ones by default. Weights other than 0/1 need
        ``expert=True``.
    alpha : float
        Nominal level.
    mode : {"upper", "region"}
        ``"upper"`` rejects when the upper-tail p-value is below ``alpha``;
        ``"region"`` rejects outside the equal-tailed chi-square interval.
    r, c : float
        Parameters of the advisory dimension condition.

    Returns
    -------
    TestResult
    """
    arrays = as_groups(groups)
    p = arrays[0].shape[1]
    sel = np.ones(p) if y is None else np.asarray(y, dtype=float)
    if sel.shape != (p,):
        raise ValueError(f"selector length {sel.shape} does not match p={p}")
    _check_selector(sel, expert)
    n_sizes = [a.shape[0] for a in arrays]
    qf = [quad_form(a, sel) for a in arrays]
    report = dimension_condition(p, max(n_sizes), r, c)
    warn = report.warning()
    return _lk_result(qf, n_sizes, alpha, mode, label, (warn,) if warn else ())


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous coordinate blocks given by increasing right endpoints.

    Block ``j`` covers the 1-based coordinates ``(p_{j-1}, p_j]`` with
    ``p_0 = 0``.
    """

    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        b = self.boundaries
        if not b:
            raise ValueError("partition needs at least one block")
        if b[0] < 1 or any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError(f"block boundaries must be positive and strictly increasing, got {b}")

    @property
    def m(self) -> int:
        return len(self.boundaries)

    @property
    def p(self) -> int:
        return self.boundaries[-1]

    def slices(self) -> list[slice]:
        starts = (0,) + self.boundaries[:-1]
        return [slice(a, b) for a, b in zip(starts, self.boundaries)]

    def selectors(self) -> Iterator[np.ndarray]:
        """Indicator vectors of the blocks, one per block."""
        for sl in self.slices():
            y = np.zeros(self.p)
            y[sl] = 1.0
            yield y


def default_partition(p: int, n_min: int) -> BlockPartition:
    """Blocks of width ``n_min - 1``, the last one truncated at ``p``.

    Boundaries are ``p_j = min(j (n_min - 1), p)``.  When ``p <= n_min - 1``
    the partition is a single block.
    """
    if n_min < 3:
        raise ValueError(f"n_min must be at least 3 (block width n_min-1 >= 2), got {n_min}")
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    width = n_min - 1
    bounds = []
    j = 1
    while not bounds or bounds[-1] < p:
        bounds.append(min(j * width, p))
        j += 1
    return BlockPartition(tuple(bounds))


def explicit_partition(boundaries: Sequence[int], p: int) -> BlockPartition:
    """Partition from user-given right endpoints, which must end at ``p``."""
    part = BlockPartition(tuple(int(b) for b in boundaries))
    if part.p != p:
        raise ValueError(f"last block boundary {part.p} does not equal p={p}")
    return part


@dataclass(frozen=True)
class BlockTestResult:
    """Per-block tests combined by rejecting if any block rejects."""

    __test__ = False

    partition: BlockPartition
    blocks: tuple[TestResult | None, ...]
    errors: dict[int, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def reject(self) -> bool:
        return any(b is not None and b.reject for b in self.blocks)

    @property
    def rejected_blocks(self) -> list[int]:
        """0-based indices of blocks whose sub-hypothesis is rejected."""
        return [j for j, b in enumerate(self.blocks) if b is not None and b.reject]


def block_tests(
    groups: Sequence,
    partition: BlockPartition | None = None,
    alpha: float = 0.05,
    mode: DecisionMode = "upper",
    *,
    r: float = 4.0,
    c: float = 1.0,
) -> BlockTestResult:
    """Run the modified M test on each coordinate block.

    A degenerate block is recorded in ``errors`` and the remaining blocks
    are still tested.
    """
    arrays = as_groups(groups)
    p = arrays[0].shape[1]
    n_sizes = [a.shape[0] for a in arrays]
    if partition is None:
        partition = default_partition(p, min(n_sizes))
    if partition.p != p:
        raise ValueError(f"partition covers p={partition.p}, data has p={p}")
    blocks: list[TestResult | None] = []
    errors: dict[int, str] = {}
    for j, sl in enumerate(partition.slices()):
        qf = [quad_form(a[:, sl]) for a in arrays]
        label = f"block{j + 1}[{sl.start + 1}-{sl.stop}]"
        try:
            blocks.append(_lk_result(qf, n_sizes, alpha, mode, label))
        except DegenerateDataError as exc:
            errors[j] = str(exc)
            blocks.append(None)
    report = dimension_condition(p, max(n_sizes), r, c)
    warn = report.warning()
    return BlockTestResult(partition, tuple(blocks), errors, (warn,) if warn else ())


def box_m_correction(p: int, n_sizes: Sequence[int]) -> float:
    """Box's small-sample factor for ``M``.

    ``phi = 1 - (2p^2 + 3p - 1) / (6 (p + 1)(k - 1)) * (sum 1/(n_i-1) - 1/(n-k))``.
    """
    k = len(n_sizes)
    pooled_df = sum(ni - 1 for ni in n_sizes)
    spread = math.fsum(1.0 / (ni - 1) for ni in n_sizes) - 1.0 / pooled_df
    return 1.0 - (2 * p * p + 3 * p - 1) / (6.0 * (p + 1) * (k - 1)) * spread


def _logdet_spd(S: np.ndarray, what: str) -> float:
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DegenerateDataError(f"{what} covariance is not positive definite") from None
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def box_m(groups: Sequence, alpha: float = 0.05, mode: DecisionMode = "upper") -> TestResult:
    """Classical Box's M test, for reference at small ``p``.

    Only valid when ``p < n_i`` for every group; otherwise the sample
    covariances are singular.
    """
    arrays = as_groups(groups)
    p = arrays[0].shape[1]
    n_sizes = [a.shape[0] for a in arrays]
    if p >= min(n_sizes):
        raise DataError(
            f"Box's M needs p < min n_i (got p={p}, min n_i={min(n_sizes)}): "
            "sample covariance matrices are singular"
        )
    k = len(arrays)
    dfs = [ni - 1 for ni in n_sizes]
    covs = [np.atleast_2d(np.cov(a, rowvar=False)) for a in arrays]
    pooled = sum(d * S for d, S in zip(dfs, covs)) / sum(dfs)
    logdets = [_logdet_spd(S, f"group {i}") for i, S in enumerate(covs)]
    pooled_logdet = _logdet_spd(pooled, "pooled")
    stat = sum(dfs) * pooled_logdet - math.fsum(d * ld for d, ld in zip(dfs, logdets))
    phi = box_m_correction(p, n_sizes)
    scaled = phi * stat
    df = (k - 1) * p * (p + 1) // 2
    p_value, region, reject = _decide(max(scaled, 0.0), df, alpha, mode)
    return TestResult(
        label="box_m",
        statistic=stat,
        scale_factor=phi,
        scaled_statistic=scaled,
        df=df,
        p_value=p_value,
        reject=bool(reject),
        alpha=alpha,
        mode=mode,
        region=region,
    )
