import cmath
import math

import numpy as np
import pytest

from gradedhs import (
    GradedDim,
    PoleError,
    RFamily,
    RMatrixSpec,
    build_f_derivative,
    build_r,
    build_r_normalized,
    c_matrix,
    c_matrix_closed_form,
    c_prefactor,
    graded_permutation,
    matrix_units,
    normalized_closed_form,
    phi,
    residue_at_zero,
    r_transposed,
    scalar_kernels,
    super_multiply,
    twist_data,
)

HBAR = 0.23 + 0.11j

ALL_DIMS = [(1, 0), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2)]


def spec_of(fam, nm, hbar=HBAR):
    return RMatrixSpec(fam, GradedDim(*nm), hbar)


def all_specs(hbar=HBAR, dims=ALL_DIMS):
    return [spec_of(fam, nm, hbar) for fam in RFamily for nm in dims]


# ---------------------------------------------------------------------------
# the scalar kernel phi
# ---------------------------------------------------------------------------


def test_phi_zero_at_negated_argument():
    assert abs(phi(HBAR, -HBAR)) < 1e-13


def test_phi_quarter_point():
    assert abs(phi(0.25, 0.25) - 2 * math.pi) < 1e-12


def test_phi_product_identity(rng):
    for _ in range(25):
        h = complex(rng.uniform(0.05, 0.95), rng.uniform(0.1, 0.5))
        z = complex(rng.uniform(0.05, 0.95), rng.uniform(0.1, 0.5))
        lhs = phi(h, z) * phi(h, -z)
        rhs = math.pi ** 2 / cmath.sin(math.pi * h) ** 2 - math.pi ** 2 / cmath.sin(math.pi * z) ** 2
        assert abs(lhs - rhs) / abs(rhs) < 1e-12


def test_phi_pole_raises():
    with pytest.raises(PoleError):
        phi(1.0, 0.3)
    with pytest.raises(PoleError):
        phi(0.3, 2.0)


def test_phi_alternative_form(rng):
    h = 0.31 + 0.21j
    z = 0.44 + 0.17j
    alt = math.pi * cmath.sin(math.pi * (h + z)) / (cmath.sin(math.pi * h) * cmath.sin(math.pi * z))
    assert abs(phi(h, z) - alt) / abs(alt) < 1e-13


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def test_spec_rejects_integer_hbar():
    with pytest.raises(PoleError):
        RMatrixSpec(RFamily.UQ_GLNM, GradedDim(1, 1), 1.0)


def test_build_r_scalar_case_is_phi():
    spec = spec_of(RFamily.UQ_GLNM, (1, 0))
    z = 0.37 + 0.21j
    assert np.allclose(build_r(spec, z).entries, [[phi(HBAR, z)]])
    spec_zn = spec_of(RFamily.ZN_GRADED, (1, 0))
    assert np.allclose(build_r(spec_zn, z).entries, [[phi(HBAR, z)]])


def test_build_r_uq_mixed_two_dim_blocks():
    # diagonal cotangents, constant 1/sin(pi h) cross block, and the
    # exp(+-i pi z)-weighted flip block with opposite parity signs
    d = GradedDim(1, 1)
    spec = spec_of(RFamily.UQ_GLNM, (1, 1))
    z = 0.41 + 0.19j
    h = HBAR
    cot = lambda w: cmath.cos(w) / cmath.sin(w)
    expected = (
        math.pi * (cot(math.pi * z) + cot(math.pi * h)) * matrix_units(d, [(1, 1), (1, 1)])
        + math.pi * (-cot(math.pi * z) + cot(math.pi * h)) * matrix_units(d, [(2, 2), (2, 2)])
        + (math.pi / cmath.sin(math.pi * h))
        * (matrix_units(d, [(1, 1), (2, 2)]) + matrix_units(d, [(2, 2), (1, 1)]))
        + (math.pi / cmath.sin(math.pi * z))
        * (
            -cmath.exp(1j * math.pi * z) * matrix_units(d, [(1, 2), (2, 1)])
            + cmath.exp(-1j * math.pi * z) * matrix_units(d, [(2, 1), (1, 2)])
        )
    )
    assert np.allclose(build_r(spec, z).entries, expected.entries, atol=1e-13)


def test_build_r_zn_even_two_dim_has_unweighted_flips():
    spec = spec_of(RFamily.ZN_GRADED, (2, 0))
    z = 0.41 + 0.19j
    R = build_r(spec, z).entries
    w = math.pi / cmath.sin(math.pi * z)
    assert abs(R[1, 2] - w) < 1e-13
    assert abs(R[2, 1] - w) < 1e-13


def test_families_differ_only_by_flip_weights_at_even_two_dim():
    # ungraded n=2: same diagonal blocks, flip entries carry exp(+-i pi z)
    # in one family and no weight in the other
    z = 0.29 + 0.23j
    Ru = build_r(spec_of(RFamily.UQ_GLNM, (2, 0)), z).entries
    Rz = build_r(spec_of(RFamily.ZN_GRADED, (2, 0)), z).entries
    assert np.allclose(np.diag(Ru), np.diag(Rz), atol=1e-13)
    assert abs(Ru[1, 2] - Rz[1, 2] * cmath.exp(1j * math.pi * z)) < 1e-13
    assert abs(Ru[2, 1] - Rz[2, 1] * cmath.exp(-1j * math.pi * z)) < 1e-13


def test_build_r_pole_guards():
    spec = spec_of(RFamily.UQ_GLNM, (1, 1))
    with pytest.raises(PoleError):
        build_r(spec, 1.0)
    with pytest.raises(PoleError):
        build_r(spec, -HBAR)  # z + hbar on the lattice
    with pytest.raises(PoleError):
        build_r_normalized(spec, 1.0 - HBAR)


# ---------------------------------------------------------------------------
# normalized matrix and its closed forms
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("spec", all_specs(), ids=str)
def test_normalized_matches_closed_form(spec, rng):
    for _ in range(5):
        z = complex(rng.uniform(0.05, 0.95), rng.uniform(0.1, 0.5))
        a = build_r_normalized(spec, z)
        b = normalized_closed_form(spec, z)
        assert (a - b).norm() / b.norm() < 1e-12


def test_normalized_odd_diagonal_coefficient():
    # the odd-odd diagonal entry of the normalized mixed-parity matrix is
    # sin(pi(z - hbar)) / sin(pi(z + hbar))
    spec = spec_of(RFamily.UQ_GLNM, (1, 1))
    z = 0.37 + 0.14j
    rbar = build_r_normalized(spec, z)
    expected = cmath.sin(math.pi * (z - HBAR)) / cmath.sin(math.pi * (z + HBAR))
    assert abs(rbar.entries[3, 3] - expected) < 1e-13


@pytest.mark.parametrize("spec", all_specs(), ids=str)
def test_normalized_unitarity(spec):
    z = 0.43 + 0.27j
    r12 = build_r_normalized(spec, z)
    r21 = r_transposed(build_r_normalized(spec, -z))
    prod = super_multiply(r12, r21)
    assert np.allclose(prod.entries, np.eye(spec.dim.n ** 2), atol=1e-12)


@pytest.mark.parametrize("nm", [(2, 0), (1, 1), (2, 1)])
def test_normalized_limit_at_zero_is_graded_permutation(nm):
    # phi pole dominates and the residue is the graded permutation, so the
    # normalized matrix tends to P (regularity), not to the identity
    for fam in RFamily:
        spec = spec_of(fam, nm)
        z = 1e-6 * (1 + 1j)
        rbar = build_r_normalized(spec, z)
        P = graded_permutation(spec.dim)
        assert (rbar - P).norm() / P.norm() < 1e-4


# ---------------------------------------------------------------------------
# spectral derivative
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("spec", all_specs(), ids=str)
def test_derivative_matches_finite_differences(spec):
    z = 0.38 + 0.21j
    h = 1e-6
    fd = (build_r_normalized(spec, z + h).entries - build_r_normalized(spec, z - h).entries) / (2 * h)
    an = build_f_derivative(spec, z).entries
    assert np.linalg.norm(an - fd) / max(np.linalg.norm(an), 1.0) < 1e-6


def test_derivative_scalar_case_vanishes():
    spec = spec_of(RFamily.UQ_GLNM, (1, 0))
    assert np.allclose(build_f_derivative(spec, 0.4 + 0.2j).entries, [[0.0]])


# ---------------------------------------------------------------------------
# constant two-site factor
# ---------------------------------------------------------------------------


def test_c_matrix_matches_even_closed_form():
    spec = spec_of(RFamily.UQ_GLNM, (2, 0), 0.3)
    C = c_matrix(spec)
    assert np.allclose(C.entries, c_matrix_closed_form(spec).entries, atol=1e-12)


def test_c_matrix_matches_mixed_closed_form():
    spec = spec_of(RFamily.UQ_GLNM, (1, 1), 0.3)
    C = c_matrix(spec)
    d = GradedDim(1, 1)
    expected = (
        cmath.exp(-1j * math.pi * 0.3) * matrix_units(d, [(1, 1), (2, 2)])
        + matrix_units(d, [(1, 2), (2, 1)])
        - matrix_units(d, [(2, 1), (1, 2)])
        + cmath.exp(1j * math.pi * 0.3) * matrix_units(d, [(2, 2), (1, 1)])
        + 2 * math.cos(math.pi * 0.3) * matrix_units(d, [(2, 2), (2, 2)])
    )
    assert np.allclose(C.entries, expected.entries, atol=1e-12)


def test_c_factorization_relation(rng):
    # Rbar_12(v-u) Fbar_21(u-v) equals the scalar prefactor times C
    spec = spec_of(RFamily.UQ_GLNM, (1, 1), 0.3)
    C = c_matrix(spec)
    for _ in range(5):
        u = complex(rng.uniform(0, 1), rng.uniform(0.05, 0.3))
        v = complex(rng.uniform(0, 1), rng.uniform(0.35, 0.6))
        lhs = super_multiply(
            build_r_normalized(spec, v - u), r_transposed(build_f_derivative(spec, u - v))
        )
        rhs = c_prefactor(spec, u - v) * C
        assert (lhs - rhs).norm() / rhs.norm() < 1e-12


def test_c_matrix_small_hbar_limit_is_one_minus_permutation():
    for nm in ((2, 0), (1, 1)):
        spec = spec_of(RFamily.UQ_GLNM, nm, 1e-6)
        C = c_matrix_closed_form(spec)
        target = np.eye(4) - graded_permutation(spec.dim).entries
        assert np.max(np.abs(C.entries - target)) < 1e-5


def test_c_matrix_rejects_wrong_family_or_dim():
    with pytest.raises(ValueError):
        c_matrix(spec_of(RFamily.ZN_GRADED, (1, 1)))
    with pytest.raises(ValueError):
        c_matrix(spec_of(RFamily.UQ_GLNM, (2, 1)))


# ---------------------------------------------------------------------------
# twist data and residue
# ---------------------------------------------------------------------------


def test_twist_trivial_at_two_dims():
    for nm in ((2, 0), (1, 1)):
        td = twist_data(spec_of(RFamily.ZN_GRADED, nm), 0.3)
        assert np.array_equal(td.twist.entries, np.eye(4))


def test_gauge_matrix_two_dim():
    u = 0.37 + 0.11j
    td = twist_data(spec_of(RFamily.ZN_GRADED, (1, 1)), u)
    assert np.allclose(td.gauge, np.diag([1.0, cmath.exp(1j * math.pi * u)]), atol=1e-14)


@pytest.mark.parametrize("nm", [(1, 0), (2, 0), (1, 1), (2, 1), (2, 2)])
def test_periodicity_matrix_is_root_of_unity(nm):
    td = twist_data(spec_of(RFamily.ZN_GRADED, nm), 0.0)
    q = td.periodicity
    n = GradedDim(*nm).n
    assert np.allclose(np.linalg.matrix_power(q, n), np.eye(n), atol=1e-12)


@pytest.mark.parametrize("spec", all_specs(dims=[(1, 0), (2, 0), (1, 1), (2, 1), (2, 2)]), ids=str)
def test_analytic_residue_equals_graded_permutation(spec):
    assert np.array_equal(residue_at_zero(spec).entries, graded_permutation(spec.dim).entries)


@pytest.mark.parametrize("spec", all_specs(dims=[(1, 1), (2, 1)]), ids=str)
def test_numeric_residue_limit(spec):
    eps = 1e-6 * (1 + 1j)
    approx = eps * build_r(spec, eps).entries
    P = graded_permutation(spec.dim).entries
    assert np.linalg.norm(approx - P) / np.linalg.norm(P) < 1e-4


# ---------------------------------------------------------------------------
# scalar kernels
# ---------------------------------------------------------------------------


def test_kernel_f_even_index_is_phi():
    spec = spec_of(RFamily.ZN_GRADED, (2, 1))
    k = scalar_kernels(spec)
    z, h = 0.42 + 0.2j, 0.3 + 0.1j
    assert abs(k.f(1, z, h) - phi(h, z)) < 1e-13


def test_kernel_flip_pole_structure():
    spec = spec_of(RFamily.ZN_GRADED, (2, 1))
    k = scalar_kernels(spec)
    with pytest.raises(PoleError):
        k.g_flip(1, 2, 1.0)
    near = k.g_flip(1, 2, 1e-5)
    assert abs(near) > 1e4  # simple pole at integer z


@pytest.mark.parametrize("spec", all_specs(), ids=str)
def test_kernel_reconstruction_matches_build_r(spec):
    z = 0.33 + 0.24j
    direct = build_r(spec, z)
    rebuilt = scalar_kernels(spec).rebuild(z)
    assert (direct - rebuilt).norm() / direct.norm() < 1e-13
