"""Monte Carlo size/power experiments and distributional checks.

Every replication draws from its own generator derived from
``(master_seed, scenario key, replication index)``, so rejection counts do not
depend on how replications are split across worker processes.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ReplicationError
from .homtest import BlockPartition, block_tests, default_partition, lk_test
from .procsim import (
    AR1,
    CS,
    CenteredGammaIID,
    CovModel,
    OmegaJ,
    _law,
    long_run_variance_ar1,
    parse_model,
    sample_group,
    substream,
)
from .quadform import quad_form
from .statmath import chi2_cdf, ks_distance

__all__ = [
    "Scenario",
    "RateEstimate",
    "Chi2LimitCheck",
    "wilson_interval",
    "run_scenario",
    "scenario_presets",
    "scenario_from_dict",
    "scenario_to_dict",
    "chi2_limit_check",
    "size_power_table",
    "SizePowerTable",
    "KS_CRITICAL_5PCT",
]

KS_CRITICAL_5PCT = 1.358
GRID_P = (20, 50, 100, 200, 300)
GRID_N = (10, 20, 50, 100)
GRID_LAWS = {"normal": "gaussian", "exp": "centered_exponential", "uniform": "centered_uniform"}


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo experiment.

    ``groups`` holds one ``(CovModel, law)`` pair per population.
    ``partition`` is ``None`` for the single all-ones test, ``"auto"`` for
    the default block partition, or an explicit :class:`BlockPartition`;
    with blocks a replication rejects if any block rejects.
    """

    name: str
    n_sizes: tuple[int, ...]
    p: int
    groups: tuple[tuple[CovModel, str], ...]
    alpha: float = 0.05
    replications: int = 1000
    master_seed: int = 0
    mode: str = "upper"
    partition: BlockPartition | str | None = None
    kind: str = "custom"

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if len(self.groups) != len(self.n_sizes):
            raise ValueError(
                f"{len(self.groups)} group models for {len(self.n_sizes)} sample sizes"
            )
        if len(self.n_sizes) < 2:
            raise ValueError("a scenario needs at least two groups")

    @property
    def k(self) -> int:
        return len(self.n_sizes)

    @property
    def key(self) -> int:
        return zlib.crc32(self.name.encode("utf-8"))

    def with_(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class RateEstimate:
    rejections: int
    replications: int
    rate: float
    wilson_ci_95: tuple[float, float]

    @classmethod
    def from_counts(cls, rejections: int, replications: int) -> "RateEstimate":
        rate = rejections / replications
        lo, hi = wilson_interval(rejections, replications)
        # guard the invariant lo <= rate <= hi against last-bit rounding
        return cls(rejections, replications, rate, (min(lo, rate), max(hi, rate)))


def _one_replication(s: Scenario, rep: int) -> bool:
    rng = substream(s.master_seed, s.key, rep)
    data = [sample_group(model, law, n, s.p, rng) for (model, law), n in zip(s.groups, s.n_sizes)]
    if s.partition is None:
        return lk_test(data, alpha=s.alpha, mode=s.mode).reject
    part = default_partition(s.p, min(s.n_sizes)) if s.partition == "auto" else s.partition
    return block_tests(data, part, alpha=s.alpha, mode=s.mode).reject


def _count_rejections(s: Scenario, reps: Sequence[int]) -> int:
    count = 0
    for rep in reps:
        try:
            count += _one_replication(s, rep)
        except Exception as exc:
            raise ReplicationError(str(exc), rep) from exc
    return count


def run_scenario(s: Scenario, workers: int = 1) -> RateEstimate:
    """Rejection rate of the scenario's test over its replications.

    Parameters
    ----------
    s : Scenario
    workers : int
        Number of worker processes; ``1`` runs in-process. The result is the
        same for any value.
    """
    reps = range(s.replications)
    if workers <= 1:
        count = _count_rejections(s, reps)
    else:
        chunks = [list(c) for c in np.array_split(np.arange(s.replications), workers * 4) if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            count = sum(pool.map(_count_rejections, [s] * len(chunks), chunks))
    return RateEstimate.from_counts(int(count), s.replications)


def _grid_size(law_label: str, p: int, n: int, reps: int, seed: int) -> Scenario:
    law = GRID_LAWS[law_label]
    return Scenario(
        name=f"grid-size-{law_label}-p{p}-n{n}",
        n_sizes=(n, n, n),
        p=p,
        groups=((OmegaJ(0), law),) * 3,
        replications=reps,
        master_seed=seed,
        kind="size",
    )


def _grid_power(law_label: str, p: int, n: int, reps: int, seed: int) -> Scenario:
    law = GRID_LAWS[law_label]
    if law == "gaussian":
        groups = ((OmegaJ(0), law), (OmegaJ(1), law), (OmegaJ(2), law))
    else:
        groups = ((CS(1.0, 0.7), law), (AR1(0.4), law), (CenteredGammaIID(), "centered_exponential"))
    return Scenario(
        name=f"grid-power-{law_label}-p{p}-n{n}",
        n_sizes=(n, n, n),
        p=p,
        groups=groups,
        replications=reps,
        master_seed=seed,
        kind="power",
    )


def scenario_presets(replications: int = 1000, master_seed: int = 0) -> dict[str, Scenario]:
    """Named experiment presets.

    The 120 ``grid-{size,power}-{law}-p{p}-n{n}`` entries cover the size and
    power grid; ``region-n100-*`` and ``blocks-n101-*`` are the null scenarios with
    base-0.40 alternating structure at ``p = 350``.
    """
    presets: dict[str, Scenario] = {}
    for make in (_grid_size, _grid_power):
        for p in GRID_P:
            for n in GRID_N:
                for label in GRID_LAWS:
                    s = make(label, p, n, replications, master_seed)
                    presets[s.name] = s
    for label in ("normal", "exp"):
        law = GRID_LAWS[label]
        for name, n, part in (("region-n100", 100, None), ("blocks-n101", 101, "auto")):
            s = Scenario(
                name=f"{name}-{label}",
                n_sizes=(n, n, n),
                p=350,
                groups=((AR1(0.4), law),) * 3,
                replications=replications,
                master_seed=master_seed,
                mode="region",
                partition=part,
                kind="size",
            )
            presets[s.name] = s
    return presets


def scenario_to_dict(s: Scenario) -> dict:
    if isinstance(s.partition, BlockPartition):
        part = list(s.partition.boundaries)
    else:
        part = s.partition
    return {
        "name": s.name,
        "kind": s.kind,
        "n_sizes": list(s.n_sizes),
        "p": s.p,
        "groups": [[model.name, law] for model, law in s.groups],
        "alpha": s.alpha,
        "replications": s.replications,
        "master_seed": s.master_seed,
        "mode": s.mode,
        "partition": part,
    }


def scenario_from_dict(d: dict) -> Scenario:
    """Build a scenario from a JSON-style mapping (see :func:`scenario_to_dict`)."""
    part = d.get("partition")
    if isinstance(part, list):
        part = BlockPartition(tuple(int(b) for b in part))
    elif part not in (None, "auto"):
        raise ValueError(f"partition must be null, 'auto' or a list of boundaries, got {part!r}")
    groups = tuple((parse_model(m), _law(law)) for m, law in d["groups"])
    return Scenario(
        name=d.get("name", "custom"),
        n_sizes=tuple(int(n) for n in d["n_sizes"]),
        p=int(d["p"]),
        groups=groups,
        alpha=float(d.get("alpha", 0.05)),
        replications=int(d.get("replications", 1000)),
        master_seed=int(d.get("master_seed", 0)),
        mode=d.get("mode", "upper"),
        partition=part,
        kind=d.get("kind", "custom"),
    )


@dataclass(frozen=True)
class Chi2LimitCheck:
    """KS comparison of scaled quadratic forms with ``chi2_{n-1}``."""

    n: int
    p: int
    phi: float
    law: str
    replications: int
    long_run_variance: float
    ks_distance: float
    critical_value: float
    passed: bool
    statistics: np.ndarray = field(repr=False, compare=False)


def chi2_limit_check(
    n: int,
    p: int,
    phi: float,
    law: str,
    replications: int,
    rng: np.random.Generator,
    chunk: int = 200,
) -> Chi2LimitCheck:
    """Check that ``(n - 1) 1S1ᵀ / (p sigma^2)`` is close to ``chi2_{n-1}``.

    ``sigma^2`` is the AR(1) long-run variance. The check passes when the KS
    distance is below the 5% critical value ``1.358 / sqrt(replications)``.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    sigma2 = long_run_variance_ar1(phi)
    model = AR1(-phi)
    stats = np.empty(replications)
    for start in range(0, replications, chunk):
        stop = min(start + chunk, replications)
        paths = sample_group(model, law, n * (stop - start), p, rng)
        for i in range(stop - start):
            X = paths[i * n : (i + 1) * n]
            stats[start + i] = (n - 1) * quad_form(X) / (p * sigma2)
    ordered = np.sort(stats)
    d = ks_distance(ordered.tolist(), lambda x: chi2_cdf(x, n - 1))
    crit = KS_CRITICAL_5PCT / math.sqrt(replications)
    return Chi2LimitCheck(n, p, phi, _law(law), replications, sigma2, d, crit, d < crit, stats)


_LAW_COLUMNS = (("gaussian", "Normal"), ("centered_exponential", "Exp"), ("centered_uniform", "Uniform"))


@dataclass
class SizePowerTable:
    """Size and power by ``(p, n)`` and innovation law."""

    rows: list[dict]

    @property
    def columns(self) -> list[str]:
        cols = ["p", "n"]
        for kind in ("size", "power"):
            cols += [f"{kind}_{short.lower()}" for _, short in _LAW_COLUMNS]
        return cols

    def to_records(self) -> list[dict]:
        return [dict(r) for r in self.rows]

    def render(self) -> str:
        header = ["p", "n"] + [f"size:{s}" for _, s in _LAW_COLUMNS] + [f"power:{s}" for _, s in _LAW_COLUMNS]
        lines = [header]
        for r in self.rows:
            cells = [str(r["p"]), str(r["n"])]
            for col in self.columns[2:]:
                v = r.get(col)
                cells.append("" if v is None else f"{v:.3f}")
            lines.append(cells)
        widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in lines)


def size_power_table(results: Sequence[tuple[Scenario, RateEstimate]]) -> SizePowerTable:
    """Arrange ``(scenario, estimate)`` pairs into size/power rows.

    Scenarios of kind other than ``"size"``/``"power"`` are skipped.
    """
    short = dict(_LAW_COLUMNS)
    table: dict[tuple, dict] = {}
    for s, est in results:
        if s.kind not in ("size", "power"):
            continue
        n = s.n_sizes[0] if len(set(s.n_sizes)) == 1 else "/".join(map(str, s.n_sizes))
        row = table.setdefault((s.p, str(n)), {"p": s.p, "n": n})
        col = f"{s.kind}_{short[s.groups[0][1]].lower()}"
        row[col] = est.rate
    ordered = sorted(table.values(), key=lambda r: (r["p"], str(r["n"]).zfill(8)))
    for r in ordered:
        for col in SizePowerTable([]).columns[2:]:
            r.setdefault(col, None)
    return SizePowerTable(ordered)
