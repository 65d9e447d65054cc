"""Output-degree distributions for rateless codes.

Everything here is a finite probability mass function over output degrees
d >= 1. The constructors cover the families that matter for intermediate
performance: the classic soliton shapes, their heavy-tailed limit, the
truncated/rescaled designs for recovery targets above 2/3, the Raptor output
distribution, and the degree-one perturbation that makes a heavy-tailed
distribution startable by the peeling decoder.

Masses are stored sparsely (support list) as 64-bit floats. Constructors are
required to hit a mass sum of 1 within 1e-12 on their own; no hidden
renormalization is applied after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Mapping, Union

import numpy as np

MASS_SUM_TOL = 1e-12


class UnknownRegionError(ValueError):
    """No exactly optimal distribution is known for this recovery target."""


@dataclass(frozen=True)
class DegreeDistribution:
    """Sparse probability mass function over output degrees.

    entries: ordered (degree, mass) pairs, degrees distinct and ascending,
    masses nonnegative and summing to 1 within MASS_SUM_TOL.
    """

    entries: tuple[tuple[int, float], ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("distribution needs at least one entry")
        degrees = [d for d, _ in self.entries]
        masses = [m for _, m in self.entries]
        for d in degrees:
            if not isinstance(d, int) or d < 1:
                raise ValueError(f"degrees must be integers >= 1, got {d!r}")
        if any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise ValueError("degrees must be strictly ascending")
        for m in masses:
            if not math.isfinite(m) or m < 0.0:
                raise ValueError(f"masses must be finite and >= 0, got {m!r}")
        total = math.fsum(masses)
        if abs(total - 1.0) > MASS_SUM_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1 within {MASS_SUM_TOL}")

    @classmethod
    def from_mapping(
        cls, masses: Mapping[int, float], label: str = ""
    ) -> "DegreeDistribution":
        entries = tuple(sorted((int(d), float(m)) for d, m in masses.items()))
        return cls(entries, label)

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(self.entries)

    @cached_property
    def degree_array(self) -> np.ndarray:
        arr = np.array([d for d, _ in self.entries], dtype=np.int64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def mass_array(self) -> np.ndarray:
        arr = np.array([m for _, m in self.entries], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.entries)

    @property
    def max_degree(self) -> int:
        return self.entries[-1][0]

    def mass(self, degree: int) -> float:
        return self._lookup.get(degree, 0.0)

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def mean_degree(self) -> float:
        return float(np.dot(self.degree_array, self.mass_array))


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=np.float64)
    if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
        raise ValueError("t must lie in [0, 1]")
    return arr


def pgf_eval(dist: DegreeDistribution, t) -> float | np.ndarray:
    """Generating function sum_i P(i) t^i at t in [0, 1] (scalar or array)."""
    arr = _check_t(t)
    powers = np.power.outer(arr, dist.degree_array)
    out = powers @ dist.mass_array
    return float(out) if arr.ndim == 0 else out


def pgf_derivative(dist: DegreeDistribution, t) -> float | np.ndarray:
    """Derivative sum_i P(i) i t^(i-1); equals P(1) at t = 0."""
    arr = _check_t(t)
    weights = dist.mass_array * dist.degree_array
    powers = np.power.outer(arr, dist.degree_array - 1)
    out = powers @ weights
    return float(out) if arr.ndim == 0 else out


def ideal_soliton(k: int) -> DegreeDistribution:
    """Soliton distribution on {1..k}: mass 1/k at degree 1, 1/(i(i-1)) above.

    The sum telescopes to exactly 1. Requires k >= 2.
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"ideal_soliton needs integer k >= 2, got {k!r}")
    masses = {1: 1.0 / k}
    for i in range(2, k + 1):
        masses[i] = 1.0 / (i * (i - 1))
    return DegreeDistribution.from_mapping(masses, label=f"ideal_soliton(k={k})")


def limiting_soliton(max_degree: int) -> DegreeDistribution:
    """Heavy-tailed soliton limit, truncated to a finite support {2..max_degree}.

    Mass 1/(i(i-1)) on 2 <= i < max_degree; the tail deficit 1/max_degree is
    folded into the top degree, which becomes 1/(max_degree-1). Degree one
    carries no mass, so a peeling decoder cannot start on this distribution
    without a perturbation; use it to study the fragile limit itself.
    """
    m = max_degree
    if not isinstance(m, int) or m < 2:
        raise ValueError(f"limiting_soliton needs integer max_degree >= 2, got {m!r}")
    masses = {i: 1.0 / (i * (i - 1)) for i in range(2, m)}
    masses[m] = 1.0 / (m - 1)
    return DegreeDistribution.from_mapping(masses, label=f"limiting_soliton(max={m})")


def robust_soliton(k: int, c: float, fail_prob: float) -> DegreeDistribution:
    """Practical soliton variant with a low-degree boost and a spike.

    Adds the usual correction term tau to the ideal soliton and normalizes:
    with R = c * ln(k/fail_prob) * sqrt(k) and spike position s = round(k/R),
    tau(i) = R/(i*k) for i < s and tau(s) = R * ln(R/fail_prob) / k. This is
    the standard construction from the original LT-code design, included here
    as finite-k simulation equipment.
    """
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"robust_soliton needs integer k >= 2, got {k!r}")
    if c <= 0.0:
        raise ValueError("c must be positive")
    if not 0.0 < fail_prob < 1.0:
        raise ValueError("fail_prob must lie in (0, 1)")
    R = c * math.log(k / fail_prob) * math.sqrt(k)
    if R <= 0.0 or k / R < 2.0:
        raise ValueError(f"degenerate ripple size R={R!r} for k={k}")
    spike = int(round(k / R))
    if spike < 2 or spike > k:
        raise ValueError(f"spike degree {spike} outside support for k={k}")
    if R <= fail_prob:
        raise ValueError("degenerate parameters: R must exceed fail_prob")

    rho = [0.0] * (k + 1)
    rho[1] = 1.0 / k
    for i in range(2, k + 1):
        rho[i] = 1.0 / (i * (i - 1))
    tau = [0.0] * (k + 1)
    for i in range(1, spike):
        tau[i] = R / (i * k)
    tau[spike] = R * math.log(R / fail_prob) / k

    beta = math.fsum(rho[1:]) + math.fsum(tau[1:])
    masses = {i: (rho[i] + tau[i]) / beta for i in range(1, k + 1)}
    return DegreeDistribution.from_mapping(
        masses, label=f"robust_soliton(k={k},c={c:g},fail_prob={fail_prob:g})"
    )


def max_useful_degree(z: float) -> int:
    """Largest degree worth any mass for recovery target z.

    Returns the m with (m-1)/m <= z <= m/(m+1); at a boundary z = m/(m+1)
    the smaller choice is used. Mass above m cannot help reach z.
    """
    if not 0.0 < z < 1.0:
        raise ValueError(f"z must lie in (0, 1), got {z!r}")
    # small slack guards float overshoot at exactly representable boundaries
    m = math.ceil(z / (1.0 - z) - 1e-9)
    return max(m, 1)


def _log_series_tail(z: float, m: int) -> float:
    """sum_{i >= m} z^i / i via the closed form -log(1-z) - sum_{i < m} z^i / i."""
    head = math.fsum(z**i / i for i in range(1, m))
    return -math.log1p(-z) - head


@dataclass(frozen=True)
class TruncatedSolitonDesign:
    """Truncated, rescaled soliton achieving recovery fraction z at rate a."""

    z: float
    m: int
    a: float
    distribution: DegreeDistribution

    def __post_init__(self) -> None:
        if not 2.0 / 3.0 < self.z < 1.0:
            raise ValueError(f"z must lie in (2/3, 1), got {self.z!r}")
        if (self.m - 1) / self.m > self.z + 1e-12 or self.z > self.m / (self.m + 1) + 1e-12:
            raise ValueError(f"m={self.m} inconsistent with z={self.z!r}")
        if self.a < (self.m - 2) / (self.m - 1) - 1e-12:
            raise ValueError("scale a too small for nonnegative masses")
        support = self.distribution.support
        if support[0] < 2 or support[-1] > self.m:
            raise ValueError("design support must lie within {2..m}")


def truncated_soliton(z: float) -> TruncatedSolitonDesign:
    """Design a distribution that recovers fraction z in (2/3, 1) cheaply.

    With m = max_useful_degree(z) the masses are 1/(a i (i-1)) for
    2 <= i <= m-1 and 1 - (m-2)/(a(m-1)) at m, where

        a = (m-1)/m + (1/(m z^(m-1))) * sum_{i >= m} z^i / i.

    The series is evaluated through its logarithmic closed form, which stays
    accurate as z approaches 1. The asymptotic recovered fraction at rate a
    is exactly z, and a is the least rate achieving it with this shape.
    """
    if not 2.0 / 3.0 < z < 1.0:
        raise ValueError(
            f"z={z!r} outside (2/3, 1); use optimal_distribution for z <= 2/3"
        )
    m = max(max_useful_degree(z), 3)
    tail = _log_series_tail(z, m)
    a = (m - 1) / m + tail / (m * z ** (m - 1))
    masses = {i: 1.0 / (a * i * (i - 1)) for i in range(2, m)}
    masses[m] = 1.0 - (m - 2) / (a * (m - 1))
    dist = DegreeDistribution.from_mapping(masses, label=f"truncated_soliton(z={z:g})")
    return TruncatedSolitonDesign(z=z, m=m, a=a, distribution=dist)


def raptor_omega(eps: float) -> DegreeDistribution:
    """Raptor output distribution for overhead parameter eps > 0.

    With D = ceil(4(1+eps)/eps) and mu = eps/2 + (eps/2)^2 the masses are
    mu/(1+mu) at degree 1, 1/((1+mu) i (i-1)) for 2 <= i <= D, and
    1/((1+mu) D) at degree D+1; the sum telescopes to exactly 1.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    # the 1e-9 slack keeps D exact when 4(1+eps)/eps is an integer but the
    # float quotient lands a hair above it
    D = math.ceil(4.0 * (1.0 + eps) / eps - 1e-9)
    mu = eps / 2.0 + (eps / 2.0) ** 2
    masses = {1: mu / (1.0 + mu)}
    for i in range(2, D + 1):
        masses[i] = 1.0 / ((1.0 + mu) * i * (i - 1))
    masses[D + 1] = 1.0 / ((1.0 + mu) * D)
    return DegreeDistribution.from_mapping(masses, label=f"raptor_omega(eps={eps:g})")


def perturb(dist: DegreeDistribution, delta: float) -> DegreeDistribution:
    """Move mass delta to degree one: Q(1) = delta + (1-delta)P(1), Q(i) = (1-delta)P(i).

    The generating function becomes (1-delta) P(t) + delta t. This is the
    canonical finite-k realization of a distribution with no degree-one mass:
    it gives the peeling decoder a starting ripple while approximating the
    original asymptotics.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    masses = {d: (1.0 - delta) * m for d, m in dist.entries}
    masses[1] = delta + masses.get(1, 0.0)
    label = f"perturb({dist.label or 'P'},delta={delta:g})"
    return DegreeDistribution.from_mapping(masses, label=label)


def optimal_distribution(z: float) -> tuple[DegreeDistribution, float]:
    """Optimal distribution and minimal rate for recovery targets z <= 2/3.

    For z <= 1/2 all mass goes on degree 1 and the rate is -log(1-z); for
    1/2 < z <= 2/3 all mass goes on degree 2 and the rate is -log(1-z)/(2z).
    Both forms agree at z = 1/2 (rate log 2); the degree-one form is returned
    there for determinism. Beyond 2/3 no optimal shape is known and
    UnknownRegionError is raised.
    """
    if not 0.0 <= z < 1.0:
        raise ValueError(f"z must lie in [0, 1), got {z!r}")
    if z > 2.0 / 3.0:
        raise UnknownRegionError(
            f"no optimal distribution is known for z={z!r} > 2/3; "
            "use truncated_soliton for a near-optimal design"
        )
    if z <= 0.5:
        return DegreeDistribution.from_mapping({1: 1.0}, label="degree1"), -math.log1p(-z)
    return (
        DegreeDistribution.from_mapping({2: 1.0}, label="degree2"),
        -math.log1p(-z) / (2.0 * z),
    )


# --- text format: one "degree<TAB>mass" pair per line, '#' comments,
# --- lines sorted lexically so plain `sort` leaves a canonical file


def write_distribution(dist: DegreeDistribution, dest: Union[str, Path, IO[str]]) -> None:
    lines = sorted(f"{d}\t{m:.17g}" for d, m in dist.entries)
    body = "".join(line + "\n" for line in lines)
    header = f"# degree distribution: {dist.label}\n" if dist.label else ""
    if hasattr(dest, "write"):
        dest.write(header + body)
    else:
        Path(dest).write_text(header + body, encoding="utf-8")


def read_distribution(src: Union[str, Path, IO[str]], label: str = "") -> DegreeDistribution:
    if hasattr(src, "read"):
        text = src.read()
    else:
        path = Path(src)
        text = path.read_text(encoding="utf-8")
        label = label or path.stem
    masses: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'degree<TAB>mass', got {raw!r}")
        degree, mass = int(parts[0]), float(parts[1])
        if degree in masses:
            raise ValueError(f"line {lineno}: duplicate degree {degree}")
        masses[degree] = mass
    return DegreeDistribution.from_mapping(masses, label=label)
