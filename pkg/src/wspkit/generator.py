"""Pseudo-random instance generation and satisfiability-rate calibration.

Instances are drawn by a fixed, self-contained PRNG (SplitMix64 streams,
rejection-sampled bounded integers, partial Fisher-Yates subsets) so the same
spec and seed give byte-identical instances on any platform.  Authorisation
lists are drawn per user: each user receives a uniformly random number of
steps between 1 and floor(k/2) (at least 1), then a uniform subset of that
size.  Constraint shapes are fixed:

  sod   two distinct steps
  am3   at most 3 users over a scope of 5 steps
  sual  scope of 5 steps, h = 3, 5 super users
  wl    scope of 2 steps, two disjoint teams of floor(n/4) users each
  ada   two distinct steps, trigger and required sets of floor(n/2) users,
        drawn independently (overlap permitted)

`calibrate_pt` locates the constraint count at which roughly half the drawn
instances are satisfiable: the hardest regime, where instances sit on the
boundary between satisfiable and unsatisfiable.  `make_family` builds the two
standard benchmark families around that point:

  family "sod":           k am3 + e sod             (e calibrated)
  family c in {am3, sual, wl, ada}:
                          k am3 + round(0.75 e) sod + e_c of c
                          (e_c calibrated with the sod count held fixed;
                           rounding is to nearest, ties down)
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, Optional

from .core import (
    ADA,
    AtMost,
    AuthorisationFunction,
    Instance,
    InvariantError,
    SoD,
    SUAL,
    WL,
    WspError,
)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

GENERATOR_VERSION = 1

# a draw is retried under the next sub-seed when some step ends up with no
# authorised user; pathological specs (far more steps than the users can
# cover) would retry forever without a cap
MAX_DRAW_ATTEMPTS = 1000

FAMILY_KINDS = ("sod", "am3", "sual", "wl", "ada")


class CalibrationError(WspError):
    """No constraint count lands in the requested satisfiability band."""


# --- deterministic randomness --------------------------------------------------


def _mix64(z: int) -> int:
    """The SplitMix64 finalising permutation."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Combine integers into a 64-bit sub-seed, deterministically."""
    z = 0x243F6A8885A308D3
    for p in parts:
        z = _mix64((z + GOLDEN + _mix64(p & MASK64)) & MASK64)
    return z


class SplitMix64:
    """The standard SplitMix64 stream."""

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), by rejection on the high bits."""
        if bound <= 0:
            raise InvariantError(f"below: bound must be positive, got {bound}")
        bits = max(1, (bound - 1).bit_length())
        while True:
            value = self.next64() >> (64 - bits)
            if value < bound:
                return value

    def subset(self, m: int, size: int) -> list[int]:
        """`size` distinct integers from range(m), in draw order, via a
        partial Fisher-Yates shuffle."""
        if size > m:
            raise InvariantError(f"subset: cannot draw {size} of {m}")
        pool = list(range(m))
        for i in range(size):
            j = i + self.below(m - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:size]


# --- specs ----------------------------------------------------------------------


@dataclass(frozen=True)
class GenSpec:
    """What to draw: problem size, constraint counts, and the master seed."""

    k: int
    n: int
    sod: int = 0
    am3: int = 0
    sual: int = 0
    wl: int = 0
    ada: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvariantError(f"spec: k must be at least 1, got {self.k}")
        if self.n < 1:
            raise InvariantError(f"spec: n must be at least 1, got {self.n}")
        for field in FAMILY_KINDS:
            if getattr(self, field) < 0:
                raise InvariantError(
                    f"spec: {field} count must be non-negative")
        if self.wl > 0 and self.n < 4:
            raise InvariantError(
                f"spec: wl teams of size n//4 need n >= 4, got n={self.n}")

    def counts(self) -> dict[str, int]:
        return {field: getattr(self, field) for field in FAMILY_KINDS}


@dataclass(frozen=True)
class PTCalibration:
    """A calibrated constraint count and the satisfiability rate measured
    at it."""

    e_value: int
    sat_rate: float
    samples: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.sat_rate <= 1.0:
            raise InvariantError(
                f"calibration: sat_rate must be in [0, 1], got {self.sat_rate}")


# --- instance drawing ------------------------------------------------------------


def _check_shape_preconditions(spec: GenSpec) -> None:
    if spec.am3 > 0 and spec.k < 5:
        raise InvariantError(
            f"generate: am3 scopes have 5 steps, need k >= 5, got k={spec.k}")
    if spec.sual > 0 and spec.k < 5:
        raise InvariantError(
            f"generate: sual scopes have 5 steps, need k >= 5, got k={spec.k}")
    if spec.sual > 0 and spec.n < 5:
        raise InvariantError(
            f"generate: sual super sets have 5 users, need n >= 5, "
            f"got n={spec.n}")
    for field in ("sod", "wl", "ada"):
        if getattr(spec, field) > 0 and spec.k < 2:
            raise InvariantError(
                f"generate: {field} needs two distinct steps, got k={spec.k}")
    if spec.ada > 0 and spec.n < 2:
        raise InvariantError(
            f"generate: ada user sets have n//2 users, need n >= 2, "
            f"got n={spec.n}")


def _draw_instance(spec: GenSpec, rng: SplitMix64) -> Optional[Instance]:
    """One draw; None when some step ends up with no authorised user."""
    k, n = spec.k, spec.n
    top = max(1, k // 2)
    step_users: list[list[int]] = [[] for _ in range(k)]
    for u in range(n):
        size = 1 + rng.below(top)
        for s in rng.subset(k, size):
            step_users[s].append(u)
    if any(not users for users in step_users):
        return None
    auth = AuthorisationFunction.from_lists(step_users, n)

    constraints = []
    for _ in range(spec.sod):
        a, b = rng.subset(k, 2)
        constraints.append(SoD(min(a, b), max(a, b)))
    for _ in range(spec.am3):
        constraints.append(AtMost(3, tuple(rng.subset(k, 5))))
    for _ in range(spec.sual):
        scope = tuple(rng.subset(k, 5))
        constraints.append(SUAL(scope, 3, frozenset(rng.subset(n, 5))))
    team = spec.n // 4
    for _ in range(spec.wl):
        scope = tuple(rng.subset(k, 2))
        sample = rng.subset(n, 2 * team)
        constraints.append(WL(scope, (frozenset(sample[:team]),
                                      frozenset(sample[team:]))))
    half = spec.n // 2
    for _ in range(spec.ada):
        s1, s2 = rng.subset(k, 2)
        constraints.append(ADA(s1, s2, frozenset(rng.subset(n, half)),
                               frozenset(rng.subset(n, half))))
    return Instance(k, n, auth, tuple(constraints))


def generate_with_meta(spec: GenSpec) -> tuple[Instance, dict]:
    """Draw the instance a GenSpec determines, plus draw metadata (the
    number of attempts it took to authorise every step)."""
    _check_shape_preconditions(spec)
    for attempt in range(MAX_DRAW_ATTEMPTS):
        rng = SplitMix64(derive_seed(spec.seed, attempt))
        inst = _draw_instance(spec, rng)
        if inst is not None:
            return inst, {
                "seed": spec.seed,
                "attempts": attempt + 1,
                "version": GENERATOR_VERSION,
            }
    raise WspError(
        f"generate: no draw authorised every step after {MAX_DRAW_ATTEMPTS} "
        f"attempts (k={spec.k}, n={spec.n})")


def generate(spec: GenSpec) -> Instance:
    """Draw the instance a GenSpec determines; a pure function of it."""
    return generate_with_meta(spec)[0]


# --- satisfiability-rate calibration ----------------------------------------------


def _spec_is_sat(spec: GenSpec) -> bool:
    from .solver import Verdict, solve_backtracking

    return solve_backtracking(generate(spec)).verdict is Verdict.SAT


def _measure_rate(base: GenSpec, vary: str, count: int, samples: int,
                  jobs: int) -> float:
    """SAT rate over `samples` seeded draws with `count` extra `vary`
    constraints.  Sample seeds depend only on (base.seed, index), so rates at
    different counts share their random draws."""
    spec = replace(base, **{vary: getattr(base, vary) + count})
    specs = [replace(spec, seed=derive_seed(base.seed, i))
             for i in range(samples)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(_spec_is_sat, specs, chunksize=4))
    else:
        hits = sum(_spec_is_sat(s) for s in specs)
    return hits / samples


def calibrate_pt(k: int, n: int, base: GenSpec, samples: int = 40,
                 band: tuple[float, float] = (0.4, 0.6), *,
                 vary: str = "sod", jobs: int = 1) -> PTCalibration:
    """Find the smallest `vary`-constraint count whose measured SAT rate
    falls inside `band`, by integer bisection over [0, k(k-1)/2].

    Assumes the rate is monotone non-increasing in the count, which holds in
    expectation (every added constraint can only remove plans) though
    sampling noise can dent it.  The returned count's rate is always
    re-checked against the band, so a noisy bisection fails loudly rather
    than returning an out-of-band count.
    """
    lo, hi = band
    if samples < 20:
        raise InvariantError(
            f"calibrate: need at least 20 samples, got {samples}")
    if not 0.0 < lo < hi < 1.0:
        raise InvariantError(f"calibrate: band must satisfy 0 < lo < hi < 1, "
                             f"got [{lo}, {hi}]")
    if vary not in FAMILY_KINDS:
        raise InvariantError(f"calibrate: unknown constraint kind {vary!r}")
    if (k, n) != (base.k, base.n):
        raise InvariantError(
            f"calibrate: base spec is for k={base.k}, n={base.n}, "
            f"asked for k={k}, n={n}")
    if vary == "sod" and base.sod != 0:
        raise InvariantError(
            "calibrate: base spec already fixes the sod count")

    cap = k * (k - 1) // 2
    rates: dict[int, float] = {}

    def rate(count: int) -> float:
        if count not in rates:
            rates[count] = _measure_rate(base, vary, count, samples, jobs)
        return rates[count]

    if rate(0) < lo:
        raise CalibrationError(
            f"calibrate: rate is {rate(0):.3f} with no {vary} constraints, "
            f"below the band [{lo}, {hi}]")
    if rate(0) <= hi:
        return PTCalibration(0, rate(0), samples)
    if rate(cap) > hi:
        raise CalibrationError(
            f"calibrate: rate stays above the band [{lo}, {hi}]: "
            f"{rate(0):.3f} at 0, {rate(cap):.3f} at {cap}")

    low, high = 0, cap  # rate(low) > hi >= rate(high)
    while high - low > 1:
        mid = (low + high) // 2
        if rate(mid) <= hi:
            high = mid
        else:
            low = mid
    measured = rate(high)
    if measured >= lo:
        return PTCalibration(high, measured, samples)
    raise CalibrationError(
        f"calibrate: no {vary} count lands in the band [{lo}, {hi}]: "
        f"rate jumps from {rate(low):.3f} at {low} to {measured:.3f} "
        f"at {high}")


# --- calibration cache -------------------------------------------------------------


def cache_dir() -> Path:
    env = os.environ.get("WSPKIT_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "wspkit"


def calibration_path(k: int, n: int, family: str) -> Path:
    return cache_dir() / f"pt-k{k}-n{n}-{family}.json"


def save_calibration(k: int, n: int, family: str, cal: PTCalibration,
                     band: tuple[float, float], master_seed: int) -> Path:
    path = calibration_path(k, n, family)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "k": k,
        "n": n,
        "family": family,
        "e_value": cal.e_value,
        "sat_rate": cal.sat_rate,
        "samples": cal.samples,
        "band": list(band),
        "master_seed": master_seed,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="ascii")
    return path


def load_calibration(k: int, n: int, family: str, samples: int,
                     band: tuple[float, float],
                     master_seed: int) -> Optional[PTCalibration]:
    """The cached calibration, or None when absent or computed under
    different settings."""
    path = calibration_path(k, n, family)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text(encoding="ascii"))
    except (OSError, ValueError):
        return None
    expected = {"k": k, "n": n, "family": family, "samples": samples,
                "band": list(band), "master_seed": master_seed}
    if any(doc.get(key) != value for key, value in expected.items()):
        return None
    return PTCalibration(doc["e_value"], doc["sat_rate"], doc["samples"])


# --- benchmark families ---------------------------------------------------------------


def _round_three_quarters(e: int) -> int:
    # round(0.75 e) to the nearest integer, ties down: ceil(3e/4 - 1/2)
    return (3 * e + 1) // 4


def _calibrated(k: int, n: int, family: str, base: GenSpec, vary: str,
                samples: int, band: tuple[float, float], use_cache: bool,
                jobs: int) -> PTCalibration:
    if use_cache:
        cached = load_calibration(k, n, family, samples, band, base.seed)
        if cached is not None:
            return cached
    cal = calibrate_pt(k, n, base, samples, band, vary=vary, jobs=jobs)
    if use_cache:
        save_calibration(k, n, family, cal, band, base.seed)
    return cal


def family_spec(kind: str, k: int, n: int, *,
                count_override: Optional[int] = None, samples: int = 40,
                band: tuple[float, float] = (0.4, 0.6),
                use_cache: bool = True, jobs: int = 1) -> GenSpec:
    """The calibrated constraint counts of a benchmark family, as a spec
    with seed 0.

    Every family starts from k am3 constraints.  The "sod" family adds the
    calibrated sod count e.  The other families fix sod at round(0.75 e) and
    add a calibrated count of their own kind on top.  `count_override` skips
    the final calibration and uses the given count for the family's own
    kind.
    """
    kind = kind.lower()
    if kind not in FAMILY_KINDS:
        raise InvariantError(f"family: unknown constraint kind {kind!r}")
    base = GenSpec(k=k, n=n, am3=k, seed=derive_seed(k, n))
    if kind == "sod":
        if count_override is not None:
            return replace(base, sod=count_override, seed=0)
        cal = _calibrated(k, n, "sod", base, "sod", samples, band,
                          use_cache, jobs)
        return replace(base, sod=cal.e_value, seed=0)

    cal = _calibrated(k, n, "sod", base, "sod", samples, band,
                      use_cache, jobs)
    fixed = replace(base, sod=_round_three_quarters(cal.e_value))
    if count_override is not None:
        extra = count_override
    else:
        own = _calibrated(k, n, kind, fixed, kind, samples, band,
                          use_cache, jobs)
        extra = own.e_value
    return replace(fixed, seed=0,
                   **{kind: getattr(fixed, kind) + extra})


def family_stream(spec: GenSpec, master_seed: int) -> Iterator[Instance]:
    """Unbounded stream of draws from one GenSpec, one sub-seed per index."""
    index = 0
    while True:
        yield generate(replace(spec, seed=derive_seed(master_seed, index)))
        index += 1


def make_family(kind: str, k: int, n: int, seed: int, *,
                count_override: Optional[int] = None, samples: int = 40,
                band: tuple[float, float] = (0.4, 0.6),
                use_cache: bool = True, jobs: int = 1) -> Iterator[Instance]:
    """Stream instances of a calibrated benchmark family."""
    spec = family_spec(kind, k, n, count_override=count_override,
                       samples=samples, band=band, use_cache=use_cache,
                       jobs=jobs)
    return family_stream(spec, seed)
