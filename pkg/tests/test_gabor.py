import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from gaboropt.dsp import ChirpedGaussianParams, chirp, gaussian_window, tf_shift
from gaboropt.errors import DimensionError, InvalidLatticeError, NotAFrameError
from gaboropt.gabor import (
    GaborCoefficients,
    Lattice,
    boundary_energy_check,
    dgt,
    dgt_direct,
    dual_window,
    frame_bounds,
    frame_operator,
    frame_operator_matrix,
    idgt,
    lattice_new,
    lattice_points,
    mask_operator,
)
from gaboropt.lattice_adapt import adapted_lattice


def divisors(N):
    return [d for d in range(1, N + 1) if N % d == 0]


@st.composite
def lattices(draw, sizes=(8, 12, 16, 18, 24)):
    N = draw(st.sampled_from(sizes))
    a = draw(st.sampled_from(divisors(N)))
    b = draw(st.sampled_from(divisors(N)))
    k = draw(st.integers(0, N))
    return lattice_new(a, b, k, N)


def brute_coefficients(f, g, lattice):
    # independent oracle: explicit atoms, linear in f
    out = np.empty(lattice.shape, dtype=complex)
    t = np.arange(lattice.N)
    for n in range(lattice.n_time):
        for m in range(lattice.n_freq):
            x = n * lattice.a
            xi = (m * lattice.b + n * lattice.s) % lattice.N
            atom = np.exp(2j * np.pi * xi * t / lattice.N) * np.roll(g, x)
            out[m, n] = np.sum(f * np.conj(atom))
    return out


# lattices

def test_lattice_new_critical():
    lat = lattice_new(8, 8, 0, 64)
    assert lat.redundancy == 1 and lat.s == 0


def test_lattice_new_shear_step():
    lat = lattice_new(4, 8, 1, 64)
    assert lat.redundancy == 2
    assert lat.s == 8 // math.gcd(16, 8) == 1


@pytest.mark.parametrize("args", [(3, 8, 0, 64), (8, 3, 0, 64), (0, 8, 0, 64), (4, 4, 0, 2)])
def test_lattice_new_rejects(args):
    with pytest.raises(InvalidLatticeError):
        lattice_new(*args)


def test_lattice_rejects_infeasible_shear():
    # b / gcd(N/a, b) = 4 / gcd(2, 4) = 2
    with pytest.raises(InvalidLatticeError):
        Lattice(4, 4, 1, 8)


def test_lattice_shear_reduced_mod_n():
    assert Lattice(4, 4, 10, 8).s == 2


def test_lattice_points_single():
    assert lattice_points(Lattice(8, 8, 0, 8)).tolist() == [[0, 0]]


@pytest.mark.parametrize("s", [0, 1, 5])
def test_lattice_points_full_plane(s):
    N = 6
    pts = {tuple(p) for p in lattice_points(Lattice(1, 1, s, N))}
    assert pts == {(x, xi) for x in range(N) for xi in range(N)}


def test_lattice_points_rate_one_example():
    # chirp rate 1 on (a, b) = (4, 4): column n = 1 is lifted by a * 1 = 4 bins
    lat = Lattice.from_chirp_rate(4, 4, 1, 8)
    assert lat == Lattice(4, 4, 4, 8)
    pts = lattice_points(lat)
    assert sorted(map(tuple, pts[pts[:, 0] == 4])) == [(4, 0), (4, 4)]


@given(lattices())
def test_lattice_points_cardinality(lat):
    pts = lattice_points(lat)
    assert len(pts) == lat.N * lat.redundancy
    assert len({tuple(p) for p in pts}) == len(pts)


@given(lattices())
def test_canonical_same_points(lat):
    a = {tuple(p) for p in lattice_points(lat)}
    b = {tuple(p) for p in lattice_points(lat.canonical())}
    assert a == b


# dgt

@given(lattices(), st.integers(0, 2**32 - 1))
def test_dgt_matches_direct(lat, seed):
    rng = np.random.default_rng(seed)
    f, g = crandn(rng, lat.N), crandn(rng, lat.N)
    ref = brute_coefficients(f, g, lat)
    scale = np.abs(ref).max()
    for method in ("auto", "offset", "direct"):
        got = dgt(f, g, lat, method=method).values
        assert np.abs(got - ref).max() <= 1e-10 * scale
    if lat.chirp_rate is not None:
        assert np.abs(dgt(f, g, lat, method="chirp").values - ref).max() <= 1e-10 * scale


def test_dgt_direct_is_oracle(rng):
    lat = Lattice(2, 3, 2, 12)
    f, g = crandn(rng, 12), crandn(rng, 12)
    np.testing.assert_allclose(dgt_direct(f, g, lat).values, brute_coefficients(f, g, lat), atol=1e-12)


def test_dgt_chirp_method_needs_integer_rate(rng):
    lat = Lattice(4, 4, 2, 8)
    with pytest.raises(InvalidLatticeError):
        dgt(crandn(rng, 8), crandn(rng, 8), lat, method="chirp")


def test_dgt_delta_full_lattice():
    N = 8
    d = np.zeros(N)
    d[0] = 1
    c = dgt(d, d, Lattice.full(N)).values
    expected = np.zeros((N, N))
    expected[:, 0] = 1
    np.testing.assert_allclose(c, expected, atol=1e-15)


@given(st.integers(4, 16), st.integers(0, 2**32 - 1))
def test_full_lattice_parseval(N, seed):
    rng = np.random.default_rng(seed)
    f, g = crandn(rng, N), crandn(rng, N)
    energy = np.sum(np.abs(dgt(f, g, Lattice.full(N)).values) ** 2)
    assert np.isclose(energy, N * np.linalg.norm(f) ** 2 * np.linalg.norm(g) ** 2, rtol=1e-12)


def test_dgt_peak_at_exact_shift():
    N = 64
    lat = Lattice(4, 4, 0, N)
    g = gaussian_window((1, 0), N)
    c = np.abs(dgt(tf_shift(g, 12, 20), g, lat).values)
    m, n = np.unravel_index(np.argmax(c), c.shape)
    assert (n * 4, m * 4) == (12, 20)
    assert c.max() == pytest.approx(1, abs=1e-12)


@given(st.integers(0, 11), st.integers(0, 11), st.integers(0, 2**32 - 1))
def test_dgt_modulus_permutes_under_joint_shift(x, xi, seed):
    N = 12
    rng = np.random.default_rng(seed)
    f, g = crandn(rng, N), crandn(rng, N)
    lat = Lattice.full(N)
    before = np.sort(np.abs(dgt(f, g, lat).values).ravel())
    after = np.sort(np.abs(dgt(tf_shift(f, x, xi), tf_shift(g, x, xi), lat).values).ravel())
    np.testing.assert_allclose(after, before, atol=1e-12)


def test_dgt_dimension_errors(rng):
    with pytest.raises(DimensionError):
        dgt(crandn(rng, 8), crandn(rng, 12), Lattice(2, 2, 0, 8))
    with pytest.raises(DimensionError):
        dgt(crandn(rng, 8), crandn(rng, 8), Lattice(2, 2, 0, 16))


def test_coefficients_shape_checked():
    with pytest.raises(DimensionError):
        GaborCoefficients(np.zeros((3, 3)), Lattice(2, 2, 0, 8))


# shear identity, both inner-product conventions

@pytest.mark.parametrize("N", [8, 12])
@pytest.mark.parametrize("s", [1, 2])
def test_shear_identity(rng, N, s):
    f, g = crandn(rng, N), crandn(rng, N)
    fc, gc = chirp(f, -s), chirp(g, -s)
    worst_anti = worst_lin = 0.0
    for x in range(N):
        phase = np.exp(1j * s * np.pi * x**2 * (N + 1) / N)
        for xi in range(N):
            lhs_atom = tf_shift(g, x, xi + x * s)
            rhs_atom = tf_shift(gc, x, xi)
            # conjugate-linear in the first slot
            worst_anti = max(worst_anti, abs(np.vdot(f, lhs_atom) - phase * np.vdot(fc, rhs_atom)))
            # linear in the first slot (coefficient convention of dgt)
            lin = lambda u, v: np.sum(u * np.conj(v))  # noqa: E731
            worst_lin = max(worst_lin, abs(lin(f, lhs_atom) - np.conj(phase) * lin(fc, rhs_atom)))
    assert worst_anti < 1e-10 and worst_lin < 1e-10


# synthesis and duals

def test_idgt_zero():
    lat = Lattice(2, 2, 0, 8)
    np.testing.assert_array_equal(idgt(np.zeros(lat.shape), np.ones(8), lat), np.zeros(8))


def test_full_lattice_scaled_window_is_dual(rng):
    N = 8
    f, g = crandn(rng, N), crandn(rng, N)
    lat = Lattice.full(N)
    gd = g / (N * np.linalg.norm(g) ** 2)
    np.testing.assert_allclose(idgt(dgt(f, g, lat), gd), f, atol=1e-10 * np.linalg.norm(f))
    np.testing.assert_allclose(dual_window(g, lat), gd, atol=1e-12)


def test_reconstruction_redundancy_four(rng):
    N = 64
    lat = Lattice(4, 4, 0, N)
    g = gaussian_window((1, 0), N)
    f = crandn(rng, N)
    rec = idgt(dgt(f, g, lat), dual_window(g, lat))
    assert np.linalg.norm(rec - f) / np.linalg.norm(f) < 1e-9


@given(lattices(sizes=(16, 24, 32)), st.integers(0, 2**32 - 1))
def test_reconstruction_whenever_frame(lat, seed):
    g = gaussian_window((1, 0), lat.N)
    fb = frame_bounds(g, lat)
    if not fb.A / fb.B > 1e-8:
        return
    f = crandn(np.random.default_rng(seed), lat.N)
    rec = idgt(dgt(f, g, lat), dual_window(g, lat))
    assert np.linalg.norm(rec - f) / np.linalg.norm(f) < 1e-7


def test_critical_gaussian_lattice_degenerates():
    N = 64
    lat = Lattice(8, 8, 0, N)
    g = gaussian_window((1, 0), N)
    try:
        dual_window(g, lat)
    except NotAFrameError:
        return
    assert frame_bounds(g, lat).condition > 1e6


def test_dual_window_matrix_free_matches_dense():
    N = 576
    lat = Lattice(8, 8, 4, N)
    g = gaussian_window((1, 0), N)
    gd = dual_window(g, lat)
    f = gaussian_window((0.5, 0.1), N)
    rec = idgt(dgt(f, g, lat), gd)
    assert np.linalg.norm(rec - f) < 1e-9


# frame bounds and operator

@pytest.mark.parametrize("N", [8, 20])
def test_full_lattice_tight(rng, N):
    g = crandn(rng, N)
    g /= np.linalg.norm(g)
    fb = frame_bounds(g, Lattice.full(N))
    assert abs(fb.A - N) < 1e-6 and abs(fb.B - N) < 1e-6


def test_hexagonal_beats_rectangular_n144():
    N = 144
    g = gaussian_window((1, 0), N)
    hexa = adapted_lattice(ChirpedGaussianParams(1, 0), N, 2)
    assert hexa.redundancy == 2 and hexa.s % hexa.b != 0
    rect = Lattice(hexa.a, hexa.b, 0, N)
    assert frame_bounds(g, hexa).condition < frame_bounds(g, rect).condition


@pytest.mark.parametrize("s", [1, 2])
def test_chirped_window_on_sheared_lattice_same_bounds(s):
    N = 48
    g = gaussian_window((1.3, 0), N)
    base = frame_bounds(g, Lattice(4, 6, 0, N))
    sheared = frame_bounds(chirp(g, s), Lattice.from_chirp_rate(4, 6, s, N))
    assert abs(base.A - sheared.A) < 1e-9 and abs(base.B - sheared.B) < 1e-9


def test_frame_bounds_matrix_free_matches_dense():
    N = 64
    lat = Lattice(4, 8, 2, N)
    g = gaussian_window((0.7, 0.2), N)
    ev = np.linalg.eigvalsh(frame_operator_matrix(g, lat))
    import gaboropt.gabor as gab

    old = gab.DENSE_LIMIT
    gab.DENSE_LIMIT = 0
    try:
        fb = frame_bounds(g, lat)
    finally:
        gab.DENSE_LIMIT = old
    assert fb.A == pytest.approx(ev[0], rel=1e-6)
    assert fb.B == pytest.approx(ev[-1], rel=1e-6)


@given(lattices(sizes=(8, 12, 16)), st.integers(0, 2**32 - 1))
def test_frame_operator_matrix_matches_definition(lat, seed):
    g = crandn(np.random.default_rng(seed), lat.N)
    S = np.zeros((lat.N, lat.N), dtype=complex)
    t = np.arange(lat.N)
    for x, xi in lattice_points(lat):
        atom = np.exp(2j * np.pi * xi * t / lat.N) * np.roll(g, x)
        S += np.outer(atom, np.conj(atom))
    np.testing.assert_allclose(frame_operator_matrix(g, lat), S, atol=1e-10 * np.abs(S).max())


# masking operator

def test_mask_full_lattice_ones(rng):
    N = 8
    g, f = crandn(rng, N), crandn(rng, N)
    out = mask_operator(g, f, Lattice.full(N), 1.0)
    np.testing.assert_allclose(out, N * np.linalg.norm(f) ** 2 * g, atol=1e-10)


def test_mask_zero(rng):
    lat = Lattice(2, 2, 2, 8)
    np.testing.assert_array_equal(mask_operator(crandn(rng, 8), crandn(rng, 8), lat, 0.0), np.zeros(8))


def test_mask_single_point(rng):
    N = 12
    lat = Lattice(3, 2, 2, N)
    g, f = crandn(rng, N), crandn(rng, N)
    mask = np.zeros(lat.shape)
    m, n = 4, 2
    mask[m, n] = 1
    x, xi = n * lat.a, (m * lat.b + n * lat.s) % N
    atom = tf_shift(f, x, xi)
    np.testing.assert_allclose(mask_operator(g, f, lat, mask), np.sum(g * np.conj(atom)) * atom, atol=1e-12)


@given(lattices(), st.integers(0, 2**32 - 1))
def test_mask_matches_direct(lat, seed):
    rng = np.random.default_rng(seed)
    g, f = crandn(rng, lat.N), crandn(rng, lat.N)
    mask = rng.random(lat.shape)
    ref = mask_operator(g, f, lat, mask, method="direct")
    for method in ("auto", "offset"):
        got = mask_operator(g, f, lat, mask, method=method)
        assert np.abs(got - ref).max() <= 1e-10 * max(np.abs(ref).max(), 1)


@given(lattices(), st.integers(0, 2**32 - 1))
def test_frame_operator_self_adjoint_psd(lat, seed):
    rng = np.random.default_rng(seed)
    g, u, v = crandn(rng, lat.N), crandn(rng, lat.N), crandn(rng, lat.N)
    S = frame_operator(g, lat)
    np.testing.assert_allclose(S.matvec(u), frame_operator_matrix(g, lat) @ u, atol=1e-9 * np.abs(S.matvec(u)).max())
    assert np.isclose(np.vdot(S.matvec(u), v), np.vdot(u, S.matvec(v)), rtol=1e-10, atol=1e-10)
    assert np.vdot(u, S.matvec(u)).real >= -1e-10


# boundary bound

def centred_gaussian(N, sigma):
    return tf_shift(gaussian_window((sigma, 0), N), N // 2)


def tail(v, N):
    t = np.arange(N)
    outside = (t < N / 2 - N / 8) | (t > N / 2 + N / 8)
    return np.abs(v[outside]).max()


def test_boundary_wide_gaussian_pair():
    N = 256
    # time standard deviation of |g|^2 equal to 0.05 N
    sigma = 4 * np.pi * 0.05**2 * N
    f = centred_gaussian(N, sigma)
    g = tf_shift(gaussian_window((sigma, 0.01), N), N // 2)
    eps = max(tail(f, N), tail(g, N))
    rep = boundary_energy_check(f, g, eps)
    assert rep.ok and rep.max_ratio <= 1


def test_boundary_sigma_one():
    N = 256
    f = g = centred_gaussian(N, 1)
    rep = boundary_energy_check(f, g, tail(f, N))
    assert rep.ok and rep.max_ratio <= 1


def test_boundary_precondition_violation():
    N = 64
    f = centred_gaussian(N, 1)
    g = f.copy()
    g[0] = 1.0
    rep = boundary_energy_check(f, g, tail(f, N))
    assert not rep.ok
    assert rep.violation[:2] == ("g", 0)
