"""Exact output statistics of the extractor on affine subspaces, plus every
structural check the error analysis rests on.

Measured quantities are exact where possible: output distributions are
integer count vectors, statistical distance is a Fraction, and the change of
variables comparison is an integer equality of count vectors.  Character-sum
magnitudes and the bounds built from them are float64 with a pinned absolute
tolerance.

`verify_extractor` sweeps a set of affine subspaces (exhaustive, seeded
sample, or an explicit list) and runs selected checks on each one.  The sweep
processes one linear subspace at a time with all of its parallel offsets
batched through shared power tables, so exhaustive runs at desk scale stay
in the seconds-to-minutes range.  Work is sharded over processes in fixed
chunks whose layout does not depend on the worker count, and partial results
merge in chunk order, so reports are byte-identical for any worker count.

Checks
  sd                 statistical distance to uniform (informational)
  char_max           largest nontrivial character magnitude (informational)
  xor                sd <= char_max * q**(m/2), the XOR-lemma aggregation
  zero_coordinate    every c^T A has at most m-1 zeros on pivot coordinates
  change_of_vars     substituting s_i**(D/d_{j_i}) for t_i permutes inputs:
                     output counts along both routes agree exactly
  substitution_form  after that substitution each pivot coordinate powers to
                     s_i**D, and every non-pivot term has degree below D
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .config import (
    DEFAULT_POINT_BUDGET,
    DEFAULT_TOLERANCE,
    Budgets,
    BudgetExceededError,
)
from .extractor import ExtractorSpec, evaluate
from .numtheory import is_prime
from .subspace import (
    AffineSubspace,
    basis_at,
    count_affine_subspaces,
    enumerate_points,
    offsets_for_pattern,
    parametrize,
    pattern_blocks,
    random_subspace,
)

CHECK_ORDER = (
    "sd",
    "char_max",
    "xor",
    "zero_coordinate",
    "change_of_vars",
    "substitution_form",
)
THEOREM_CHECKS = ("xor", "zero_coordinate", "change_of_vars", "substitution_form")
DEFAULT_CHECKS = ("sd", "char_max", "xor", "zero_coordinate")

_CHAR_CHUNK = 256  # character columns per matmul; fixed so results never vary
_ELEM_SLICE = 1 << 24  # max elements in one offsets-by-points buffer
_CHUNK_TARGET = 192  # sweep chunks; fixed so chunking is worker-independent
_AUTO_FULL_LIMIT = 100_000  # collect="auto": full rows up to here, else violations


# ---------------------------------------------------------------------------
# output encoding


def encode_output(z: Sequence[int], q: int) -> int:
    """Big-endian base-q encoding of an output vector."""
    enc = 0
    for v in z:
        enc = enc * q + v
    return enc


def decode_output(enc: int, q: int, m: int) -> tuple[int, ...]:
    out = []
    for _ in range(m):
        enc, r = divmod(enc, q)
        out.append(r)
    return tuple(reversed(out))


def _output_digits(q: int, m: int) -> np.ndarray:
    """All q**m output vectors as rows, indexed by their encoding."""
    enc = np.arange(q**m, dtype=np.int64)
    digits = np.empty((q**m, m), dtype=np.int64)
    for i in range(m):
        digits[:, i] = (enc // q ** (m - 1 - i)) % q
    return digits


# ---------------------------------------------------------------------------
# distributions and distance


@dataclass(frozen=True)
class OutputDistribution:
    """Exact integer counts of F(x) over some input set, indexed by encoding."""

    q: int
    m: int
    counts: np.ndarray
    total: int

    def __post_init__(self) -> None:
        if self.counts.shape != (self.q**self.m,):
            raise ValueError("count vector length must be q**m")
        if int(self.counts.sum()) != self.total:
            raise ValueError("counts do not sum to total")

    def probability(self, z: Sequence[int]) -> Fraction:
        return Fraction(int(self.counts[encode_output(z, self.q)]), self.total)


def output_distribution(
    spec: ExtractorSpec,
    V: AffineSubspace,
    budget: int = DEFAULT_POINT_BUDGET,
) -> OutputDistribution:
    """Tally F over every point of V by direct enumeration.

    This is the plain reference path (one evaluate() per point); the sweep
    engine reproduces these counts through batched table lookups and is
    tested against it.
    """
    _check_subspace(spec, V)
    q, m = spec.modulus, spec.m
    if q**m > budget:
        raise BudgetExceededError(f"q**m = {q**m} outcome cells, budget is {budget}")
    counts = np.zeros(q**m, dtype=np.int64)
    for x in enumerate_points(V, budget):
        counts[encode_output(evaluate(spec, x), q)] += 1
    return OutputDistribution(q=q, m=m, counts=counts, total=q**V.k)


def statistical_distance(dist: OutputDistribution) -> Fraction:
    """Exact total-variation distance between dist and uniform on F_q^m."""
    qm = dist.q**dist.m
    total = dist.total
    # sum |c*qm - total| <= 2*total*qm, safe in int64 under the budgets
    if total * qm < (1 << 62):
        num = int(np.abs(dist.counts * qm - total).sum())
    else:  # pragma: no cover - beyond any configured budget
        num = sum(abs(int(c) * qm - total) for c in dist.counts)
    return Fraction(num, 2 * total * qm)


# ---------------------------------------------------------------------------
# character sums


@dataclass(frozen=True)
class CharacterSum:
    """Integer tallies of a mod-q residue; the sum is sum_r counts[r] w^r."""

    q: int
    residue_counts: np.ndarray
    total: int

    def __post_init__(self) -> None:
        if self.residue_counts.shape != (self.q,):
            raise ValueError("residue count vector length must be q")
        if int(self.residue_counts.sum()) != self.total:
            raise ValueError("residue counts do not sum to total")


def _omega_powers(q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(q) / q)


def character_magnitude(cs: CharacterSum) -> float:
    """|E[w^R]| for the tallied residue R."""
    s = (cs.residue_counts.astype(np.complex128) * _omega_powers(cs.q)).sum()
    return float(abs(s)) / cs.total


def character_sum_subspace(
    spec: ExtractorSpec,
    V: AffineSubspace,
    c: Sequence[int],
    budget: int = DEFAULT_POINT_BUDGET,
) -> CharacterSum:
    """Tally <c, F(x)> over V, confirming both routes to the residue agree:
    <c, A x^d> pointwise equals <c^T A, x^d>."""
    _check_subspace(spec, V)
    q = spec.modulus
    if len(c) != spec.m:
        raise ValueError(f"character index length {len(c)} does not match m={spec.m}")
    b = [sum(ci * row[j] for ci, row in zip(c, spec.A.rows)) % q for j in range(spec.n)]
    counts = np.zeros(q, dtype=np.int64)
    for x in enumerate_points(V, budget):
        powed = [pow(xj, dj, q) for xj, dj in zip(x, spec.d)]
        z = [sum(a * p for a, p in zip(row, powed)) % q for row in spec.A.rows]
        r1 = sum(ci * zi for ci, zi in zip(c, z)) % q
        r2 = sum(bj * pj for bj, pj in zip(b, powed)) % q
        if r1 != r2:
            raise AssertionError("character routes disagree; arithmetic bug")
        counts[r1] += 1
    return CharacterSum(q=q, residue_counts=counts, total=q**V.k)


def character_magnitudes(
    dist: OutputDistribution,
    budget: int = DEFAULT_POINT_BUDGET,
) -> np.ndarray:
    """|E[w^<c,Z>]| for every c in F_q^m (encoded order), from exact counts."""
    q, m = dist.q, dist.m
    qm = q**m
    if qm * qm > budget:
        raise BudgetExceededError(
            f"character table needs {qm * qm} operations, budget is {budget}"
        )
    zdig = _output_digits(q, m)
    omega = _omega_powers(q)
    counts = dist.counts.astype(np.float64)
    out = np.empty(qm, dtype=np.float64)
    for lo in range(0, qm, _CHAR_CHUNK):
        hi = min(lo + _CHAR_CHUNK, qm)
        phase = (zdig @ zdig[lo:hi].T) % q
        out[lo:hi] = np.abs(counts @ omega[phase]) / dist.total
    return out


# ---------------------------------------------------------------------------
# bound reports


@dataclass(frozen=True)
class BoundReport:
    """One checked quantity against one bound.

    satisfied is None for informational rows (no bound to enforce); for
    float quantities it means quantity <= bound + tolerance, for integer
    quantities an exact comparison.
    """

    check: str
    quantity: float | int
    bound: float | int | None
    satisfied: bool | None
    subspace_id: int | None = None
    c_encoded: int | None = None
    detail: str = ""


def xor_bound_check(
    dist: OutputDistribution,
    tolerance: float = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_POINT_BUDGET,
) -> BoundReport:
    """Statistical distance against the aggregated character bound.

    The XOR lemma turns per-character magnitudes into the distance bound
    sd <= max_{c!=0} |E[w^<c,Z>]| * q**(m/2); this holds unconditionally, so
    a failure here means an arithmetic bug, not a bad parameter choice.
    """
    mags = character_magnitudes(dist, budget)
    eps_star = float(mags[1:].max()) if mags.size > 1 else 0.0
    c_star = int(mags[1:].argmax()) + 1 if mags.size > 1 else None
    sd = float(statistical_distance(dist))
    bound = eps_star * dist.q ** (dist.m / 2)
    return BoundReport(
        check="xor",
        quantity=sd,
        bound=bound,
        satisfied=sd <= bound + tolerance,
        c_encoded=c_star,
        detail=f"eps_star={eps_star!r}",
    )


# ---------------------------------------------------------------------------
# change of variables and substitution form


def _pivot_degrees(spec: ExtractorSpec, pivots: Sequence[int]) -> tuple[int, list[int]]:
    """D = lcm of the pivot exponents, and D_i = D / d_{j_i} per pivot."""
    D = math.lcm(*(spec.d[j] for j in pivots)) if pivots else 1
    return D, [D // spec.d[j] for j in pivots]


def _two_path_counts(
    spec: ExtractorSpec,
    V: AffineSubspace,
    budget: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Output counts over V along the direct route x = l(t) and the
    substituted route x = l(s_1**D_1, ..., s_k**D_k)."""
    _check_subspace(spec, V)
    q, m = spec.modulus, spec.m
    if q**V.k > budget:
        raise BudgetExceededError(f"subspace has {q**V.k} points, budget is {budget}")
    if q**m > budget:
        raise BudgetExceededError(f"q**m = {q**m} outcome cells, budget is {budget}")
    par = parametrize(V)
    _, D_per_pivot = _pivot_degrees(spec, V.pivots)
    sub_tables = [
        [pow(s, Di, q) for s in range(q)] for Di in D_per_pivot
    ]
    direct = np.zeros(q**m, dtype=np.int64)
    substituted = np.zeros(q**m, dtype=np.int64)
    for t in product(range(q), repeat=V.k):
        direct[encode_output(evaluate(spec, par.evaluate(t)), q)] += 1
        u = tuple(tab[s] for tab, s in zip(sub_tables, t))
        substituted[encode_output(evaluate(spec, par.evaluate(u)), q)] += 1
    return direct, substituted


def _project_counts(counts: np.ndarray, c: Sequence[int], q: int, m: int) -> np.ndarray:
    """Residue counts of <c, Z> induced by output counts."""
    phases = (_output_digits(q, m) @ np.asarray(c, dtype=np.int64)) % q
    out = np.zeros(q, dtype=np.int64)
    np.add.at(out, phases, counts)
    return out


def change_of_vars_check(
    spec: ExtractorSpec,
    V: AffineSubspace,
    c: Sequence[int],
    budget: int = DEFAULT_POINT_BUDGET,
) -> BoundReport:
    """Exact equality of the residue counts of <c, F> along both routes.

    s_i -> s_i**D_i is a bijection on F_q (D_i divides lcm(d), so it is
    coprime to q - 1), hence substituting it cannot change any count; the
    check recomputes both sides from scratch and compares integers.
    """
    direct, substituted = _two_path_counts(spec, V, budget)
    q, m = spec.modulus, spec.m
    rc1 = _project_counts(direct, c, q, m)
    rc2 = _project_counts(substituted, c, q, m)
    diff = int(np.abs(rc1 - rc2).max())
    return BoundReport(
        check="change_of_vars",
        quantity=diff,
        bound=0,
        satisfied=diff == 0,
        c_encoded=encode_output(tuple(int(v) % q for v in c), q),
    )


def _change_of_vars_all(
    spec: ExtractorSpec,
    V: AffineSubspace,
    budget: int,
) -> BoundReport:
    """Worst residue-count discrepancy over every nonzero c (sweep variant)."""
    direct, substituted = _two_path_counts(spec, V, budget)
    q, m = spec.modulus, spec.m
    zdig = _output_digits(q, m)
    worst = 0
    worst_c = None
    for enc_c in range(1, q**m):
        c = zdig[enc_c]
        rc1 = _project_counts(direct, c, q, m)
        rc2 = _project_counts(substituted, c, q, m)
        diff = int(np.abs(rc1 - rc2).max())
        if diff > worst:
            worst, worst_c = diff, enc_c
    return BoundReport(
        check="change_of_vars",
        quantity=worst,
        bound=0,
        satisfied=worst == 0,
        c_encoded=worst_c,
    )


def substitution_form_check(
    spec: ExtractorSpec,
    V: AffineSubspace,
    budget: int = DEFAULT_POINT_BUDGET,
    sample_points: int = 10**4,
    seed: int = 0,
) -> BoundReport:
    """Structure of the substituted restriction l(s_1**D_1, ..., s_k**D_k).

    Two parts, both with zero tolerance: (a) pointwise, each pivot coordinate
    raised to its exponent equals s_i**D (checked on the full parameter grid
    when q**k fits the budget, else on a seeded sample); (b) for every
    non-pivot coordinate j depending on parameters up to i, the substituted
    degree d_j * D_i stays strictly below D, so the pivot term dominates.
    """
    _check_subspace(spec, V)
    q = spec.modulus
    par = parametrize(V)
    D, D_per_pivot = _pivot_degrees(spec, V.pivots)
    violations = 0
    # (b) degree comparison, pure integer arithmetic
    for j in range(spec.n):
        if j in V.pivots:
            continue
        i = sum(1 for p in V.pivots if p < j)
        if i == 0:
            continue  # coordinate is constant on V, no term to dominate
        if spec.d[j] * D_per_pivot[i - 1] >= D:
            violations += 1
    # (a) pointwise identity on the grid
    if q**V.k <= min(budget, sample_points):
        grid: Iterable[tuple[int, ...]] = product(range(q), repeat=V.k)
    else:
        rng = np.random.default_rng(seed)
        grid = (
            tuple(int(v) for v in row)
            for row in rng.integers(0, q, size=(sample_points, V.k))
        )
    sub_tables = [[pow(s, Di, q) for s in range(q)] for Di in D_per_pivot]
    top_table = [pow(s, D, q) for s in range(q)]
    for s in grid:
        u = tuple(tab[si] for tab, si in zip(sub_tables, s))
        x = par.evaluate(u)
        for i, j in enumerate(V.pivots):
            if pow(x[j], spec.d[j], q) != top_table[s[i]]:
                violations += 1
    return BoundReport(
        check="substitution_form",
        quantity=violations,
        bound=0,
        satisfied=violations == 0,
        detail=f"D={D}",
    )


# ---------------------------------------------------------------------------
# zero coordinates of c^T A


def zero_coordinate_bound(A, c: Sequence[int]) -> BoundReport:
    """Count zeros of b = c^T A; Vandermonde structure caps them at m - 1.

    b_j is a nonzero polynomial of degree < m evaluated at seed point r_j,
    so it can vanish at most m - 1 times.
    """
    q = A.q
    c = [int(v) % q for v in c]
    if len(c) != A.m:
        raise ValueError(f"coefficient length {len(c)} does not match m={A.m}")
    if not any(c):
        raise ValueError("c must be nonzero")
    zeros = 0
    for j in range(A.n):
        bj = sum(ci * row[j] for ci, row in zip(c, A.rows)) % q
        if bj == 0:
            zeros += 1
    return BoundReport(
        check="zero_coordinate",
        quantity=zeros,
        bound=A.m - 1,
        satisfied=zeros <= A.m - 1,
        c_encoded=encode_output(c, q),
    )


# ---------------------------------------------------------------------------
# Deligne-type bounds for diagonal polynomials


@dataclass(frozen=True)
class DiagonalPolynomial:
    """f = sum_i a_i x_i**degree + (terms of total degree < degree) over F_q.

    The top-degree part is diagonal with nonzero coefficients and the degree
    is coprime to q, which makes it smooth; complete character sums of such
    polynomials obey |S| <= (degree-1)**num_vars * q**(num_vars/2).
    """

    q: int
    num_vars: int
    degree: int
    diagonal_coeffs: tuple[int, ...]
    lower_terms: tuple[tuple[tuple[int, ...], int], ...] = ()

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise ValueError(f"q must be prime, got {self.q}")
        if self.num_vars < 1:
            raise ValueError("need at least one variable")
        if self.degree < 1:
            raise ValueError("degree must be positive")
        if math.gcd(self.degree, self.q) != 1:
            raise ValueError(
                f"degree {self.degree} divisible by the characteristic {self.q}"
            )
        if len(self.diagonal_coeffs) != self.num_vars:
            raise ValueError("one diagonal coefficient per variable required")
        for a in self.diagonal_coeffs:
            if not 1 <= a < self.q:
                raise ValueError(f"diagonal coefficients must be nonzero residues, got {a}")
        seen = set()
        for exps, coeff in self.lower_terms:
            if len(exps) != self.num_vars:
                raise ValueError("term exponent tuple length must match num_vars")
            if any(e < 0 for e in exps):
                raise ValueError("term exponents must be nonnegative")
            if sum(exps) >= self.degree:
                raise ValueError(
                    f"lower term {exps} has total degree >= {self.degree}"
                )
            if not 1 <= coeff < self.q:
                raise ValueError(f"term coefficients must be nonzero residues, got {coeff}")
            if exps in seen:
                raise ValueError(f"duplicate term {exps}")
            seen.add(exps)

    def evaluate(self, point: Sequence[int]) -> int:
        if len(point) != self.num_vars:
            raise ValueError("point length must match num_vars")
        acc = sum(
            a * pow(x, self.degree, self.q) for a, x in zip(self.diagonal_coeffs, point)
        )
        for exps, coeff in self.lower_terms:
            term = coeff
            for x, e in zip(point, exps):
                term = term * pow(x, e, self.q) % self.q
            acc += term
        return acc % self.q

    def residues_grid(self) -> np.ndarray:
        """f over all q**num_vars points, grid in row-major point order."""
        q, v = self.q, self.num_vars
        cols = np.meshgrid(*([np.arange(q, dtype=np.int64)] * v), indexing="ij")
        cols = [g.reshape(-1) for g in cols]
        deg_table = np.array([pow(x, self.degree, q) for x in range(q)], dtype=np.int64)
        acc = np.zeros(q**v, dtype=np.int64)
        for a, col in zip(self.diagonal_coeffs, cols):
            acc = (acc + a * deg_table[col]) % q
        for exps, coeff in self.lower_terms:
            term = np.full(q**v, coeff, dtype=np.int64)
            for col, e in zip(cols, exps):
                if e:
                    tab = np.array([pow(x, e, q) for x in range(q)], dtype=np.int64)
                    term = term * tab[col] % q
            acc = (acc + term) % q
        return acc


def deligne_bound_check(
    f: DiagonalPolynomial,
    b: int,
    budget: int = DEFAULT_POINT_BUDGET,
    tolerance: float = DEFAULT_TOLERANCE,
) -> BoundReport:
    """|sum_x w^(b f(x))| against (degree-1)**v * q**(v/2), by brute force."""
    if not 1 <= b < f.q:
        raise ValueError(f"b must be a nonzero residue mod {f.q}, got {b}")
    if f.q**f.num_vars > budget:
        raise BudgetExceededError(
            f"grid has {f.q**f.num_vars} points, budget is {budget}"
        )
    residues = (b * f.residues_grid()) % f.q
    s = _omega_powers(f.q)[residues].sum()
    quantity = float(abs(s))
    bound = (f.degree - 1) ** f.num_vars * f.q ** (f.num_vars / 2)
    return BoundReport(
        check="deligne",
        quantity=quantity,
        bound=bound,
        satisfied=quantity <= bound + tolerance,
        c_encoded=b,
        detail=f"q={f.q} vars={f.num_vars} degree={f.degree}",
    )


def deligne_battery() -> tuple[tuple[DiagonalPolynomial, int], ...]:
    """A fixed battery of smooth diagonal polynomials and character twists."""
    P = DiagonalPolynomial
    cases: list[tuple[DiagonalPolynomial, int]] = [
        (P(7, 1, 3, (1,)), 1),
        (P(7, 1, 3, (1,)), 3),
        (P(7, 1, 1, (1,)), 1),
        (P(13, 1, 1, (5,), (((0,), 7),)), 1),
        (P(13, 1, 2, (1,)), 1),
        (P(13, 2, 5, (1, 1), (((1, 1), 1),)), 1),
        (P(13, 2, 7, (1, 1)), 2),
        (P(17, 1, 2, (3,), (((1,), 2), ((0,), 4))), 1),
        (P(19, 1, 6, (1,)), 1),
        (P(23, 1, 4, (5,), (((2,), 1), ((1,), 2), ((0,), 3))), 7),
        (P(29, 1, 3, (1,), (((1,), 28),)), 1),
        (P(31, 1, 3, (2,), (((1,), 1),)), 1),
        (P(31, 1, 5, (1,)), 11),
        (P(37, 2, 2, (1, 1), (((1, 0), 1), ((0, 1), 1))), 1),
        (P(41, 1, 5, (2,), (((3,), 7),)), 1),
        (P(43, 2, 6, (1, 5), (((2, 3), 11),)), 1),
        (P(3, 2, 2, (1, 1)), 1),
        (P(5, 1, 3, (1,)), 2),
        (P(11, 2, 3, (1, 1)), 1),
        (P(11, 2, 4, (1, 3), (((2, 1), 5),)), 3),
        (P(101, 1, 7, (1,)), 1),
        (P(101, 2, 3, (1, 2), (((1, 1), 3),)), 1),
        (P(101, 2, 7, (1, 1), (((3, 3), 1),)), 5),
        (P(7, 2, 3, (1, 2), (((1, 0), 1),)), 1),
    ]
    return tuple(cases)


# ---------------------------------------------------------------------------
# sweep sources


@dataclass(frozen=True)
class ExhaustiveSubspaces:
    """Every affine subspace of dimension spec.k, in canonical order."""

    def label(self, spec: ExtractorSpec) -> str:
        return "exhaustive"


@dataclass(frozen=True)
class SampledSubspaces:
    """count seeded draws of dimension spec.k; draw i uses seed + i, so any
    index range can be regenerated independently (sampling with replacement)."""

    count: int
    seed: int

    def label(self, spec: ExtractorSpec) -> str:
        return f"sample:{self.count}:seed:{self.seed}"


@dataclass(frozen=True)
class ExplicitSubspaces:
    """A caller-provided list; ids are list positions, dimensions may vary."""

    subspaces: tuple[AffineSubspace, ...]

    def label(self, spec: ExtractorSpec) -> str:
        return f"explicit:{len(self.subspaces)}"


SubspaceSource = ExhaustiveSubspaces | SampledSubspaces | ExplicitSubspaces


# ---------------------------------------------------------------------------
# sweep result


@dataclass
class SweepResult:
    spec_q: int
    spec_n: int
    spec_k: int
    spec_m: int
    source: str
    checks: tuple[str, ...]
    collect: str
    tolerance: float
    total_subspaces: int
    processed: int = 0
    budget_errors: int = 0
    violations: dict[str, int] = field(default_factory=dict)
    max_sd: float | None = None
    max_sd_exact: Fraction | None = None
    max_sd_subspace: int | None = None
    max_char: float | None = None
    max_char_subspace: int | None = None
    max_char_c: int | None = None
    reports: list[BoundReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """No theorem-backed check failed on any processed subspace."""
        return all(v == 0 for v in self.violations.values())


def summary_lines(result: SweepResult) -> list[str]:
    lines = [
        f"q = {result.spec_q}",
        f"n = {result.spec_n}",
        f"k = {result.spec_k}",
        f"m = {result.spec_m}",
        f"source = {result.source}",
        f"checks = {','.join(result.checks)}",
        f"collect = {result.collect}",
        f"tolerance = {result.tolerance!r}",
        f"total_subspaces = {result.total_subspaces}",
        f"processed = {result.processed}",
        f"budget_errors = {result.budget_errors}",
        f"violations_total = {sum(result.violations.values())}",
    ]
    for check in CHECK_ORDER:
        if check in result.violations:
            lines.append(f"violations_{check} = {result.violations[check]}")
    if result.max_sd is not None:
        lines.append(f"max_sd = {result.max_sd!r}")
        lines.append(f"max_sd_exact = {result.max_sd_exact}")
        lines.append(f"max_sd_subspace = {result.max_sd_subspace}")
    if result.max_char is not None:
        lines.append(f"max_char_magnitude = {result.max_char!r}")
        lines.append(f"max_char_magnitude_subspace = {result.max_char_subspace}")
        lines.append(f"max_char_magnitude_c = {result.max_char_c}")
    return lines


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


REPORT_COLUMNS = ("check_name", "subspace_id", "c_encoded", "quantity", "bound", "satisfied")


def reports_csv_lines(result: SweepResult) -> list[str]:
    lines = [",".join(REPORT_COLUMNS)]
    for r in result.reports:
        lines.append(
            ",".join(
                (
                    r.check,
                    _fmt_cell(r.subspace_id),
                    _fmt_cell(r.c_encoded),
                    _fmt_cell(r.quantity),
                    _fmt_cell(r.bound),
                    _fmt_cell(r.satisfied),
                )
            )
        )
    lines += [f"# {line}" for line in summary_lines(result)]
    return lines


def write_reports_csv(result: SweepResult, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(reports_csv_lines(result)) + "\n")


def write_summary(result: SweepResult, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(summary_lines(result)) + "\n")


# ---------------------------------------------------------------------------
# the sweep engine


def _check_subspace(spec: ExtractorSpec, V: AffineSubspace) -> None:
    if V.q != spec.modulus:
        raise ValueError(f"subspace modulus {V.q} does not match spec q={spec.modulus}")
    if V.n != spec.n:
        raise ValueError(f"subspace lives in F_q^{V.n}, spec has n={spec.n}")


def normalize_checks(checks: Iterable[str]) -> tuple[str, ...]:
    wanted = set(checks)
    unknown = wanted - set(CHECK_ORDER)
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(sorted(unknown))}")
    if not wanted:
        raise ValueError("no checks selected")
    return tuple(c for c in CHECK_ORDER if c in wanted)


@dataclass
class _Partial:
    processed: int = 0
    budget_errors: int = 0
    violations: dict[str, int] = field(default_factory=dict)
    rows: list[BoundReport] = field(default_factory=list)
    max_sd: float = -1.0
    max_sd_absdev: int = 0
    max_sd_denom: int = 1
    max_sd_id: int = -1
    max_char: float = -1.0
    max_char_id: int = -1
    max_char_c: int = 0


class _SweepState:
    """Everything a worker needs, rebuilt once per process from the payload."""

    def __init__(self, payload: dict) -> None:
        self.spec: ExtractorSpec = payload["spec"]
        self.source: SubspaceSource = payload["source"]
        self.checks: tuple[str, ...] = payload["checks"]
        self.collect: str = payload["collect"]
        self.tolerance: float = payload["tolerance"]
        self.budgets: Budgets = payload["budgets"]
        spec = self.spec
        q, m = spec.modulus, spec.m
        self.q, self.m = q, m
        self.qm = q**m
        self.need_counts = bool({"sd", "char_max", "xor"} & set(self.checks))
        self.need_char = bool({"char_max", "xor"} & set(self.checks))
        self.sqrt_qm = q ** (m / 2)
        self.weights = np.array(
            [q ** (m - 1 - i) for i in range(m)], dtype=np.int64
        )
        self.powtabs = self._power_tables()
        self.A = spec.A.array()
        self.zdig = _output_digits(q, m)
        self.omega = _omega_powers(q)
        self.tgrids: dict[int, np.ndarray] = {}
        self.zero_cache: dict[tuple[int, ...], tuple[int, int]] = {}
        if isinstance(self.source, ExhaustiveSubspaces):
            self.blocks = pattern_blocks(spec.n, spec.k, q)
            self.offsets_cache: dict[tuple[int, ...], np.ndarray] = {}
            self.offsets_per_linear = q ** (spec.n - spec.k)

    def _power_tables(self) -> np.ndarray:
        # tables over [0, 2q-2] so offset + basis-combination sums index
        # directly without a reduction first
        q = self.q
        tabs = np.empty((self.spec.n, 2 * q - 1), dtype=np.int64)
        for j, dj in enumerate(self.spec.d):
            col = np.array([pow(v % q, dj, q) for v in range(2 * q - 1)], dtype=np.int64)
            tabs[j] = col
        return tabs

    def tgrid(self, k: int) -> np.ndarray:
        if k not in self.tgrids:
            q = self.q
            if k == 0:
                self.tgrids[k] = np.zeros((1, 0), dtype=np.int64)
            else:
                grids = np.meshgrid(*([np.arange(q, dtype=np.int64)] * k), indexing="ij")
                self.tgrids[k] = np.stack(grids, axis=-1).reshape(-1, k)
        return self.tgrids[k]

    def zero_coordinate_worst(self, pivots: tuple[int, ...]) -> tuple[int, int]:
        """Worst zero count of c^T A over pivot coordinates, over nonzero c."""
        if pivots not in self.zero_cache:
            ball = (self.zdig[1:] @ self.A) % self.q  # (qm-1, n)
            if pivots:
                zeros = (ball[:, list(pivots)] == 0).sum(axis=1)
            else:
                zeros = np.zeros(ball.shape[0], dtype=np.int64)
            worst = int(zeros.max()) if zeros.size else 0
            worst_c = int(zeros.argmax()) + 1 if zeros.size else 0
            self.zero_cache[pivots] = (worst, worst_c)
        return self.zero_cache[pivots]

    # -- block analysis ----------------------------------------------------

    def analyze_block(
        self,
        basis: np.ndarray,
        basis_rows: tuple[tuple[int, ...], ...],
        pivots: tuple[int, ...],
        offsets: np.ndarray,
        ids: np.ndarray,
        partial: _Partial,
    ) -> None:
        """Run all selected checks for one direction space and a batch of
        parallel offsets; ids are the global subspace ids, one per offset."""
        spec = self.spec
        q, m, qm = self.q, self.m, self.qm
        k = basis.shape[0]
        n = spec.n
        tgrid = self.tgrid(k)
        T = tgrid.shape[0]
        O = offsets.shape[0]
        check = set(self.checks)

        sd_f = eps = eps_c = absdev = None
        if self.need_counts:
            tB = (tgrid @ basis) % q if k else np.zeros((1, n), dtype=np.int64)
            counts = np.empty((O, qm), dtype=np.int64)
            slice_rows = max(1, _ELEM_SLICE // max(1, n * T))
            for lo in range(0, O, slice_rows):
                hi = min(lo + slice_rows, O)
                enc = np.zeros((hi - lo, T), dtype=np.int64)
                for i in range(m):
                    acc = np.zeros((hi - lo, T), dtype=np.int64)
                    for j in range(n):
                        X = offsets[lo:hi, j][:, None] + tB[:, j][None, :]
                        acc += self.A[i, j] * self.powtabs[j][X]
                    enc += (acc % q) * self.weights[i]
                flat = (np.arange(hi - lo, dtype=np.int64)[:, None] * qm + enc).ravel()
                counts[lo:hi] = np.bincount(flat, minlength=(hi - lo) * qm).reshape(
                    hi - lo, qm
                )
            absdev = np.abs(counts * qm - T).sum(axis=1)
            denom = 2 * T * qm
            sd_f = absdev / float(denom)
            if self.need_char:
                counts_f = counts.astype(np.float64)
                eps = np.full(O, -1.0)
                eps_c = np.zeros(O, dtype=np.int64)
                for lo in range(1, qm, _CHAR_CHUNK):
                    hi = min(lo + _CHAR_CHUNK, qm)
                    phase = (self.zdig @ self.zdig[lo:hi].T) % q
                    mags = np.abs(counts_f @ self.omega[phase]) / T
                    best = mags.argmax(axis=1)
                    vals = mags[np.arange(O), best]
                    better = vals > eps
                    eps[better] = vals[better]
                    eps_c[better] = best[better] + lo

        if "zero_coordinate" in check:
            zworst, zc = self.zero_coordinate_worst(pivots)

        per_offset_objs = check & {"change_of_vars", "substitution_form"}

        # fast path: when no rows are kept and nothing in the block violates,
        # the per-offset report loop collapses to vectorised max tracking
        if self.collect != "full" and not per_offset_objs:
            clean = True
            if "xor" in check:
                clean = bool((sd_f <= eps * self.sqrt_qm + self.tolerance).all())
            if clean and "zero_coordinate" in check:
                clean = zworst <= m - 1
            if clean:
                partial.processed += O
                if sd_f is not None:
                    row = int(np.argmax(sd_f))
                    if float(sd_f[row]) > partial.max_sd:
                        partial.max_sd = float(sd_f[row])
                        partial.max_sd_absdev = int(absdev[row])
                        partial.max_sd_denom = denom
                        partial.max_sd_id = int(ids[row])
                if eps is not None:
                    row = int(np.argmax(eps))
                    if float(eps[row]) > partial.max_char:
                        partial.max_char = float(eps[row])
                        partial.max_char_id = int(ids[row])
                        partial.max_char_c = int(eps_c[row])
                return

        for row in range(O):
            sid = int(ids[row])
            partial.processed += 1
            if per_offset_objs:
                V = AffineSubspace(
                    q=q,
                    n=n,
                    k=k,
                    offset=tuple(int(v) for v in offsets[row]),
                    basis=basis_rows,
                    pivots=pivots,
                )
            for name in self.checks:
                if name == "sd":
                    g = math.gcd(int(absdev[row]), denom)
                    self._emit(
                        partial,
                        BoundReport(
                            check="sd",
                            quantity=float(sd_f[row]),
                            bound=None,
                            satisfied=None,
                            subspace_id=sid,
                            detail=f"exact={int(absdev[row]) // g}/{denom // g}",
                        ),
                    )
                elif name == "char_max":
                    self._emit(
                        partial,
                        BoundReport(
                            check="char_max",
                            quantity=float(eps[row]),
                            bound=None,
                            satisfied=None,
                            subspace_id=sid,
                            c_encoded=int(eps_c[row]),
                        ),
                    )
                elif name == "xor":
                    bound = float(eps[row]) * self.sqrt_qm
                    ok = float(sd_f[row]) <= bound + self.tolerance
                    self._emit(
                        partial,
                        BoundReport(
                            check="xor",
                            quantity=float(sd_f[row]),
                            bound=bound,
                            satisfied=ok,
                            subspace_id=sid,
                            c_encoded=int(eps_c[row]),
                        ),
                    )
                elif name == "zero_coordinate":
                    self._emit(
                        partial,
                        BoundReport(
                            check="zero_coordinate",
                            quantity=zworst,
                            bound=m - 1,
                            satisfied=zworst <= m - 1,
                            subspace_id=sid,
                            c_encoded=zc,
                        ),
                    )
                elif name == "change_of_vars":
                    rep = _change_of_vars_all(spec, V, self.budgets.points)
                    self._emit(partial, replace(rep, subspace_id=sid))
                elif name == "substitution_form":
                    rep = substitution_form_check(spec, V, self.budgets.points)
                    self._emit(partial, replace(rep, subspace_id=sid))
            if sd_f is not None:
                sdv = float(sd_f[row])
                if sdv > partial.max_sd:
                    partial.max_sd = sdv
                    partial.max_sd_absdev = int(absdev[row])
                    partial.max_sd_denom = denom
                    partial.max_sd_id = sid
            if eps is not None:
                ev = float(eps[row])
                if ev > partial.max_char:
                    partial.max_char = ev
                    partial.max_char_id = sid
                    partial.max_char_c = int(eps_c[row])

    def _emit(self, partial: _Partial, report: BoundReport) -> None:
        if report.satisfied is False:
            partial.violations[report.check] = partial.violations.get(report.check, 0) + 1
        if self.collect == "full":
            partial.rows.append(report)
        elif self.collect == "violations" and report.satisfied is False:
            partial.rows.append(report)

    # -- chunk execution ----------------------------------------------------

    def run_range(self, lo: int, hi: int) -> _Partial:
        partial = _Partial()
        for name in self.checks:
            if name in THEOREM_CHECKS:
                partial.violations.setdefault(name, 0)
        spec = self.spec
        if isinstance(self.source, ExhaustiveSubspaces):
            for linear in range(lo, hi):
                block, basis = basis_at(self.blocks, linear, self.q, spec.n)
                if block.pattern not in self.offsets_cache:
                    self.offsets_cache[block.pattern] = offsets_for_pattern(
                        block.pattern, spec.n, self.q
                    )
                offsets = self.offsets_cache[block.pattern]
                base = linear * self.offsets_per_linear
                ids = base + np.arange(offsets.shape[0], dtype=np.int64)
                basis_rows = tuple(tuple(int(v) for v in r) for r in basis)
                self.analyze_block(basis, basis_rows, block.pattern, offsets, ids, partial)
        elif isinstance(self.source, SampledSubspaces):
            for i in range(lo, hi):
                V = random_subspace(spec.n, spec.k, self.q, seed=self.source.seed + i)
                self._analyze_single(V, i, partial)
        else:
            for i in range(lo, hi):
                V = self.source.subspaces[i]
                if self.q**V.k > self.budgets.points:
                    partial.budget_errors += 1
                    self._emit_budget_error(partial, V, i)
                    continue
                self._analyze_single(V, i, partial)
        return partial

    def _analyze_single(self, V: AffineSubspace, sid: int, partial: _Partial) -> None:
        _check_subspace(self.spec, V)
        self.analyze_block(
            V.basis_array(),
            V.basis,
            V.pivots,
            V.offset_array().reshape(1, -1),
            np.array([sid], dtype=np.int64),
            partial,
        )

    def _emit_budget_error(self, partial: _Partial, V: AffineSubspace, sid: int) -> None:
        report = BoundReport(
            check="budget_error",
            quantity=self.q**V.k,
            bound=self.budgets.points,
            satisfied=None,
            subspace_id=sid,
            detail="subspace skipped: point budget exceeded",
        )
        if self.collect in ("full", "violations"):
            partial.rows.append(report)


_WORKER_STATE: _SweepState | None = None


def _init_worker(payload: dict) -> None:
    global _WORKER_STATE
    _WORKER_STATE = _SweepState(payload)


def _run_chunk(task: tuple[int, int, int]) -> tuple[int, _Partial]:
    assert _WORKER_STATE is not None
    idx, lo, hi = task
    return idx, _WORKER_STATE.run_range(lo, hi)


def _merge(result: SweepResult, partial: _Partial) -> None:
    result.processed += partial.processed
    result.budget_errors += partial.budget_errors
    for name, count in partial.violations.items():
        result.violations[name] = result.violations.get(name, 0) + count
    result.reports.extend(partial.rows)
    if partial.max_sd_id >= 0:
        if result.max_sd is None or partial.max_sd > result.max_sd:
            result.max_sd = partial.max_sd
            result.max_sd_exact = Fraction(partial.max_sd_absdev, partial.max_sd_denom)
            result.max_sd_subspace = partial.max_sd_id
    if partial.max_char_id >= 0:
        if result.max_char is None or partial.max_char > result.max_char:
            result.max_char = partial.max_char
            result.max_char_subspace = partial.max_char_id
            result.max_char_c = partial.max_char_c


def _chunk_plan(total_units: int) -> list[tuple[int, int, int]]:
    """Fixed chunking of [0, total_units); independent of the worker count so
    merged output is always byte-identical."""
    if total_units == 0:
        return []
    size = max(1, math.ceil(total_units / _CHUNK_TARGET))
    return [
        (idx, lo, min(lo + size, total_units))
        for idx, lo in enumerate(range(0, total_units, size))
    ]


def verify_extractor(
    spec: ExtractorSpec,
    source: SubspaceSource,
    checks: Iterable[str] = DEFAULT_CHECKS,
    workers: int = 1,
    budgets: Budgets | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    collect: str = "auto",
) -> SweepResult:
    """Run the selected checks over every subspace the source yields.

    collect: "full" keeps one report row per (check, subspace), "violations"
    keeps only failed rows, "none" keeps no rows, "auto" switches from full
    to violations above 100000 subspaces.  Summary statistics (max distance,
    max character magnitude, violation counts) are always gathered.
    """
    budgets = budgets or Budgets()
    checks = normalize_checks(checks)
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    q = spec.modulus
    if q**spec.m > budgets.points:
        raise BudgetExceededError(
            f"q**m = {q**spec.m} outcome cells, budget is {budgets.points}"
        )

    if isinstance(source, ExhaustiveSubspaces):
        total = count_affine_subspaces(spec.n, spec.k, q)
        if total > budgets.subspaces:
            raise BudgetExceededError(
                f"exhaustive sweep has {total} subspaces, budget is {budgets.subspaces}"
            )
        if q**spec.k > budgets.points:
            raise BudgetExceededError(
                f"each subspace has {q**spec.k} points, budget is {budgets.points}"
            )
        units = total // q ** (spec.n - spec.k)  # linear subspaces
    elif isinstance(source, SampledSubspaces):
        if source.count < 1:
            raise ValueError("sample count must be positive")
        if source.count > budgets.subspaces:
            raise BudgetExceededError(
                f"sample has {source.count} subspaces, budget is {budgets.subspaces}"
            )
        if q**spec.k > budgets.points:
            raise BudgetExceededError(
                f"each subspace has {q**spec.k} points, budget is {budgets.points}"
            )
        total = source.count
        units = total
    elif isinstance(source, ExplicitSubspaces):
        if not source.subspaces:
            raise ValueError("explicit source has no subspaces")
        if len(source.subspaces) > budgets.subspaces:
            raise BudgetExceededError(
                f"list has {len(source.subspaces)} subspaces, budget is {budgets.subspaces}"
            )
        for V in source.subspaces:
            _check_subspace(spec, V)
        total = len(source.subspaces)
        units = total
    else:
        raise TypeError(f"unknown subspace source {type(source).__name__}")

    if collect == "auto":
        collect = "full" if total <= _AUTO_FULL_LIMIT else "violations"
    if collect not in ("full", "violations", "none"):
        raise ValueError(f"unknown collect mode {collect!r}")

    payload = {
        "spec": spec,
        "source": source,
        "checks": checks,
        "collect": collect,
        "tolerance": tolerance,
        "budgets": budgets,
    }
    result = SweepResult(
        spec_q=q,
        spec_n=spec.n,
        spec_k=spec.k,
        spec_m=spec.m,
        source=source.label(spec),
        checks=checks,
        collect=collect,
        tolerance=tolerance,
        total_subspaces=total,
    )
    for name in checks:
        if name in THEOREM_CHECKS:
            result.violations.setdefault(name, 0)

    tasks = _chunk_plan(units)
    if workers == 1:
        state = _SweepState(payload)
        for _, lo, hi in tasks:
            _merge(result, state.run_range(lo, hi))
        return result

    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
    partials: dict[int, _Partial] = {}
    with ctx.Pool(processes=workers, initializer=_init_worker, initargs=(payload,)) as pool:
        for idx, partial in pool.imap_unordered(_run_chunk, tasks):
            partials[idx] = partial
    for idx in sorted(partials):
        _merge(result, partials[idx])
    return result
