"""Scalar and graded spin Ruijsenaars-Macdonald difference operators.

The scalar operators act on functions of L complex positions:

    D_k f = sum_{|I|=k} prod_{i in I, j not in I} phi(z_j - z_i)
            f(..., z_i - eta for i in I, ...).

The spin operators insert ordered products of normalized two-site
R-matrices around the shifts.  For the index subset I = (i_1 < ... < i_k)
the ordering conventions are

* left block, slots t = 1..k left to right; slot t is the descending
  product Rbar_{j, i_t}(z_j - z_{i_t}) over j = i_t - 1 .. 1, j not in I;

* right block, slots t = k..1 left to right; slot t is the ascending
  product Rbar_{i_t, j}(z_{i_t} - eta - z_j) over j = 1 .. i_t - 1,
  j not in I (the shift has already hit the first argument).

Operators are realized as evaluators (function to value at a point), and
compositions track the exact exponential shift action on test functions,
so there is no interpolation error anywhere.  Subsets are enumerated
lexicographically and subset sums use a fixed pairwise (tree) reduction.

The commutativity of the spin operators is equivalent to a family of
four-block R-matrix identities in the *unnormalized* matrices; those are
assembled by :func:`f_identity`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .gradedcore import GradedDim, LocalOperator, embed_realized, sigma_mask
from .rmatrix import RMatrixSpec, build_r, build_r_normalized, phi

_FLOOR = 1e-300
_LATTICE_MARGIN = 1e-3


@dataclass(frozen=True)
class SiteConfig:
    """Positions, shift step and deformation parameter for L sites."""

    length: int
    z: tuple[complex, ...]
    eta: complex
    hbar: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", tuple(complex(v) for v in self.z))
        if len(self.z) != self.length:
            raise ValueError("need one position per site")
        self.validate_shifts(1)

    def validate_shifts(self, depth: int) -> None:
        """Require all pairwise differences, eta-shifted up to ``depth``
        times and optionally hbar-shifted, to stay off the integer lattice."""
        bad = []
        for i in range(self.length):
            for j in range(self.length):
                if i == j:
                    continue
                base = self.z[i] - self.z[j]
                for m in range(-depth, depth + 1):
                    for s in (0, 1):
                        v = base + m * self.eta + s * self.hbar
                        if abs(v - round(v.real)) <= _LATTICE_MARGIN:
                            bad.append((i + 1, j + 1, m, s))
        if bad:
            raise ValueError(f"site differences too close to the pole lattice: {bad[:3]}")

    def shifted(self, subset: Sequence[int]) -> np.ndarray:
        """Positions with z_i -> z_i - eta for the 1-based sites in subset."""
        z = np.array(self.z, dtype=complex)
        for i in subset:
            z[i - 1] -= self.eta
        return z


@dataclass(frozen=True)
class TestFunction:
    """Finite sum of (vector- or scalar-valued) exponentials of L positions.

    Each term is (coefficient, frequency vector m in Z^L) and contributes
    coefficient * exp(2 pi i m . z).  Shifting z_i -> z_i - eta multiplies
    the term by exp(-2 pi i m_i eta), so the family is closed under the
    shift operators.
    """

    __test__ = False  # not a pytest case, despite the name

    length: int
    terms: tuple[tuple[np.ndarray | complex, tuple[int, ...]], ...]

    def value(self, z: Sequence[complex]):
        z = np.asarray(z, dtype=complex)
        total = None
        for coeff, freq in self.terms:
            ph = np.exp(2j * np.pi * np.dot(np.array(freq, dtype=float), z))
            contrib = coeff * ph
            total = contrib if total is None else total + contrib
        return total

    def shift(self, site: int, eta: complex) -> "TestFunction":
        """Exact image under z_site -> z_site - eta (site 1-based)."""
        terms = tuple(
            (coeff * np.exp(-2j * np.pi * freq[site - 1] * eta), freq)
            for coeff, freq in self.terms
        )
        return TestFunction(self.length, terms)


def random_test_function(
    length: int,
    rng: np.random.Generator,
    dim: GradedDim | None = None,
    n_terms: int = 3,
    max_freq: int = 2,
) -> TestFunction:
    """Random probe with integer frequencies in [-max_freq, max_freq]."""
    terms = []
    for _ in range(n_terms):
        freq = tuple(int(v) for v in rng.integers(-max_freq, max_freq + 1, size=length))
        if dim is None:
            coeff = complex(rng.standard_normal(), rng.standard_normal())
        else:
            d = dim.n ** length
            coeff = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        terms.append((coeff, freq))
    return TestFunction(length, tuple(terms))


class _Deferred:
    """Evaluator wrapper: some operator already applied to a function."""

    def __init__(self, fn: Callable[[np.ndarray], object]):
        self._fn = fn

    def value(self, z):
        return self._fn(np.asarray(z, dtype=complex))


def _tree_sum(items: list):
    """Pairwise reduction in a fixed order (deterministic rounding)."""
    if not items:
        raise ValueError("nothing to sum")
    work = list(items)
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


# ---------------------------------------------------------------------------
# scalar operators
# ---------------------------------------------------------------------------


def _phi_prefactor(hbar: complex, z: np.ndarray, subset: tuple[int, ...]) -> complex:
    L = len(z)
    pref = 1.0 + 0.0j
    inside = set(subset)
    for i in subset:
        for j in range(1, L + 1):
            if j not in inside:
                pref *= phi(hbar, z[j - 1] - z[i - 1])
    return pref


def _scalar_d_value(k: int, hbar: complex, eta: complex, f, z: np.ndarray):
    L = len(z)
    vals = []
    for subset in combinations(range(1, L + 1), k):
        zs = z.copy()
        for i in subset:
            zs[i - 1] -= eta
        vals.append(_phi_prefactor(hbar, z, subset) * f.value(zs))
    return _tree_sum(vals)


def scalar_d(k: int, cfg: SiteConfig, f) -> complex:
    """Value of the k-th scalar difference operator applied to f at cfg.z."""
    if not 1 <= k <= cfg.length:
        raise ValueError(f"order k={k} out of range 1..{cfg.length}")
    return _scalar_d_value(k, cfg.hbar, cfg.eta, f, np.array(cfg.z, dtype=complex))


def scalar_d_operator(k: int, hbar: complex, eta: complex) -> Callable:
    """The k-th scalar operator as an evaluator transformer (for composition)."""

    def op(f):
        return _Deferred(lambda z: _scalar_d_value(k, hbar, eta, f, z))

    return op


# ---------------------------------------------------------------------------
# spin operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetTerm:
    """One index subset of a difference operator with its factor structure.

    ``left_sites`` and ``right_sites`` hold the (row, column) site pairs of
    the R-factors in product order (leftmost factor first); the first site
    of each right factor is the one whose argument carries the shift.
    ``phi_pairs`` are the (outside, inside) site pairs of the coefficient.
    """

    subset: tuple[int, ...]
    phi_pairs: tuple[tuple[int, int], ...]
    left_sites: tuple[tuple[int, int], ...]
    right_sites: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class DifferenceOperator:
    """Symbolic structure of the order-k difference operator on L sites.

    Spin mode lists, per subset I = (i_1 < ... < i_k), the ordered factor
    blocks: the left block runs slots t = 1..k, each a descending product of
    Rbar_{j, i_t} over j < i_t outside I; the right block runs slots
    t = k..1, each an ascending product of Rbar_{i_t, j} over j < i_t
    outside I, evaluated at shifted first arguments.  Scalar mode has empty
    factor lists.
    """

    order: int
    length: int
    spin: bool = True

    def __post_init__(self) -> None:
        if not 1 <= self.order <= self.length:
            raise ValueError(f"order {self.order} out of range 1..{self.length}")

    def subset_terms(self) -> tuple[SubsetTerm, ...]:
        k, L = self.order, self.length
        terms = []
        for subset in combinations(range(1, L + 1), k):
            inside = set(subset)
            phi_pairs = tuple(
                (j, i) for i in subset for j in range(1, L + 1) if j not in inside
            )
            left = []
            right = []
            if self.spin:
                for t, it in enumerate(subset):
                    for j in range(it - 1, 0, -1):
                        if j not in subset[:t]:
                            left.append((j, it))
                for t in range(k - 1, -1, -1):
                    it = subset[t]
                    for j in range(1, it):
                        if j not in subset[:t]:
                            right.append((it, j))
            terms.append(SubsetTerm(subset, phi_pairs, tuple(left), tuple(right)))
        return tuple(terms)


class _RFactorCache:
    """Realized embedded normalized R-matrices, keyed by sites and argument."""

    def __init__(self, spec: RMatrixSpec, length: int, normalized: bool = True):
        self.spec = spec
        self.length = length
        self.build = build_r_normalized if normalized else build_r
        self._store: dict = {}

    def get(self, i: int, j: int, arg: complex) -> np.ndarray:
        key = (i, j, arg)
        if key not in self._store:
            self._store[key] = embed_realized(self.build(self.spec, arg), (i, j), self.length)
        return self._store[key]


def _spin_d_value(spec: RMatrixSpec, k: int, eta: complex, f, z: np.ndarray, cache=None):
    L = len(z)
    if cache is None:
        cache = _RFactorCache(spec, L)
    d = spec.dim.n ** L
    vals = []
    for term in DifferenceOperator(k, L).subset_terms():
        pref = _phi_prefactor(spec.hbar, z, term.subset)
        zs = z.copy()
        for i in term.subset:
            zs[i - 1] -= eta
        vec = np.asarray(f.value(zs), dtype=complex).reshape(d)
        # factors act on the vector from the right end of the product string
        for (i, j) in reversed(term.right_sites):
            vec = cache.get(i, j, z[i - 1] - eta - z[j - 1]) @ vec
        for (j, i) in reversed(term.left_sites):
            vec = cache.get(j, i, z[j - 1] - z[i - 1]) @ vec
        vals.append(pref * vec)
    return _tree_sum(vals)


def _check_spec_cfg(spec: RMatrixSpec, cfg: SiteConfig) -> None:
    if abs(spec.hbar - cfg.hbar) > 1e-14:
        raise ValueError("spec.hbar and cfg.hbar disagree")


def spin_d(spec: RMatrixSpec, k: int, cfg: SiteConfig, f) -> np.ndarray:
    """Value of the k-th spin difference operator applied to f at cfg.z.

    Reduces to :func:`scalar_d` when the graded dimension is 1.
    """
    _check_spec_cfg(spec, cfg)
    if not 1 <= k <= cfg.length:
        raise ValueError(f"order k={k} out of range 1..{cfg.length}")
    return _spin_d_value(spec, k, cfg.eta, f, np.array(cfg.z, dtype=complex))


def spin_d_operator(spec: RMatrixSpec, k: int, eta: complex) -> Callable:
    """The k-th spin operator as an evaluator transformer (for composition)."""

    def op(f):
        return _Deferred(lambda z: _spin_d_value(spec, k, eta, f, z))

    return op


def commutator_eval(spec: RMatrixSpec, cfg: SiteConfig, k: int, l: int, f) -> float:
    """Normalized norm of ([D_k, D_l] f)(cfg.z) for the spin operators."""
    _check_spec_cfg(spec, cfg)
    cfg.validate_shifts(2)
    z0 = np.array(cfg.z, dtype=complex)
    dk = spin_d_operator(spec, k, cfg.eta)
    dl = spin_d_operator(spec, l, cfg.eta)
    v_kl = np.asarray(dk(dl(f)).value(z0))
    v_lk = np.asarray(dl(dk(f)).value(z0))
    num = np.linalg.norm(v_kl - v_lk)
    den = np.linalg.norm(v_kl) + np.linalg.norm(v_lk) + _FLOOR
    return float(num / den)


def scalar_commutator_eval(cfg: SiteConfig, k: int, l: int, f) -> float:
    """Normalized |([D_k, D_l] f)(cfg.z)| for the scalar operators."""
    cfg.validate_shifts(2)
    z0 = np.array(cfg.z, dtype=complex)
    dk = scalar_d_operator(k, cfg.hbar, cfg.eta)
    dl = scalar_d_operator(l, cfg.hbar, cfg.eta)
    v_kl = dk(dl(f)).value(z0)
    v_lk = dl(dk(f)).value(z0)
    return float(abs(v_kl - v_lk) / (abs(v_kl) + abs(v_lk) + _FLOOR))


# ---------------------------------------------------------------------------
# the commutativity identities (four ordered R-product blocks)
# ---------------------------------------------------------------------------


def _f_identity_assembled(spec: RMatrixSpec, cfg: SiteConfig, k: int):
    L = cfg.length
    z = np.array(cfg.z, dtype=complex)
    eta = cfg.eta
    d = spec.dim.n ** L
    cache = _RFactorCache(spec, L, normalized=False)
    norms: dict = {}

    def R(i, j, shifted=False):
        arg = z[i - 1] - z[j - 1] - (eta if shifted else 0.0)
        mat = cache.get(i, j, arg)
        norms[(i, j, shifted)] = np.linalg.norm(mat)
        return mat

    total = np.zeros((d, d), dtype=complex)
    scale = 0.0
    for subset in combinations(range(1, L + 1), k):
        inside = set(subset)
        # F+ block 1: slots t = k..1; ascending l in (i_t, L], l not in later I
        fp = np.eye(d, dtype=complex)
        for t in range(k - 1, -1, -1):
            it = subset[t]
            later = set(subset[t + 1:])
            for l in range(it + 1, L + 1):
                if l in later:
                    continue
                fp = fp @ R(it, l)
        # F+ block 2: slots t = 1..k; descending j over all sites outside I
        for t in range(k):
            it = subset[t]
            for j in range(L, 0, -1):
                if j in inside:
                    continue
                fp = fp @ R(j, it, shifted=True)
        # F+ block 3: slots t = k..1; ascending m in [1, i_t), m not in earlier I
        for t in range(k - 1, -1, -1):
            it = subset[t]
            earlier = set(subset[:t])
            for m in range(1, it):
                if m in earlier:
                    continue
                fp = fp @ R(it, m)
        # F- block 1: slots t = 1..k; descending m in [1, i_t), m not in earlier I
        fm = np.eye(d, dtype=complex)
        term_scale = 1.0
        for t in range(k):
            it = subset[t]
            earlier = set(subset[:t])
            for m in range(it - 1, 0, -1):
                if m in earlier:
                    continue
                fm = fm @ R(m, it)
                term_scale *= norms[(m, it, False)]
        # F- block 2: slots t = k..1; ascending j over all sites outside I
        for t in range(k - 1, -1, -1):
            it = subset[t]
            for j in range(1, L + 1):
                if j in inside:
                    continue
                fm = fm @ R(it, j, shifted=True)
                term_scale *= norms[(it, j, True)]
        # F- block 3: slots t = 1..k; descending l in (i_t, L], l not in later I
        for t in range(k):
            it = subset[t]
            later = set(subset[t + 1:])
            for l in range(L, it, -1):
                if l in later:
                    continue
                fm = fm @ R(l, it)
                term_scale *= norms[(l, it, False)]
        total += fm - fp
        scale += term_scale
    if spec.dim.n_odd:
        total = sigma_mask(spec.dim, L) * total
    return LocalOperator(spec.dim, L, total), scale


def f_identity(spec: RMatrixSpec, cfg: SiteConfig, k: int) -> LocalOperator:
    """Assembled commutativity defect (should vanish) as an L-leg operator."""
    _check_spec_cfg(spec, cfg)
    if not 1 <= k <= cfg.length:
        raise ValueError(f"order k={k} out of range 1..{cfg.length}")
    op, _ = _f_identity_assembled(spec, cfg, k)
    return op


def f_identity_residual(spec: RMatrixSpec, cfg: SiteConfig, k: int) -> float:
    """Norm of the assembled defect over the summed factor-norm scale."""
    _check_spec_cfg(spec, cfg)
    op, scale = _f_identity_assembled(spec, cfg, k)
    return float(op.norm() / (scale + _FLOOR))


def f_identity_eta_spread(
    spec: RMatrixSpec, cfg: SiteConfig, k: int, etas: Sequence[complex]
) -> float:
    """Max residual over several eta values (the defect is eta-independent)."""
    worst = 0.0
    for eta in etas:
        cfg_eta = replace(cfg, eta=eta)
        worst = max(worst, f_identity_residual(spec, cfg_eta, k))
    return worst
