import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdns.grid import (
    GridError,
    PeriodicGrid,
    State,
    derived,
    div,
    grad,
    integrate,
    lap,
    load_checkpoint,
    lp_norm,
    save_checkpoint,
    spectral_div,
    spectral_grad,
    spectral_lap,
)


def random_scalar(grid, seed=0):
    return np.random.default_rng(seed).standard_normal(grid.sizes)


def random_vector(grid, seed=1):
    return np.random.default_rng(seed).standard_normal((grid.dim, *grid.sizes))


# -- grid construction --------------------------------------------------------


def test_grid_basics():
    g = PeriodicGrid((64, 32), (2.0, 1.0))
    assert g.dim == 2
    assert g.spacing == (2.0 / 64, 1.0 / 32)
    assert g.cell_volume == pytest.approx((2.0 / 64) * (1.0 / 32))
    assert g.n_cells == 64 * 32


def test_grid_rejects_bad_shapes():
    with pytest.raises(GridError):
        PeriodicGrid((4,))
    with pytest.raises(GridError):
        PeriodicGrid((8, 8, 8))
    with pytest.raises(GridError):
        PeriodicGrid((16,), (0.0,))


def test_field_shape_checks():
    g = PeriodicGrid((16,))
    with pytest.raises(GridError):
        grad(np.zeros(17), g)
    with pytest.raises(GridError):
        div(np.zeros((2, 16)), g)


# -- centered operators --------------------------------------------------------


def test_grad_of_constant_is_zero():
    g = PeriodicGrid((32,))
    assert np.all(grad(np.full(g.sizes, 3.7), g) == 0.0)


def test_grad_converges_at_second_order():
    errs = []
    for n in (128, 256, 512):
        g = PeriodicGrid((n,))
        x = g.axis_coords(0)
        err = np.max(np.abs(grad(np.sin(2 * np.pi * x), g)[0] - 2 * np.pi * np.cos(2 * np.pi * x)))
        errs.append(err)
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.9


def test_div_grad_equals_lap_exactly():
    for sizes in ((32,), (16, 24)):
        g = PeriodicGrid(sizes)
        f = random_scalar(g, seed=3)
        assert np.array_equal(lap(f, g), div(grad(f, g), g))


def test_integration_by_parts_is_exact():
    for sizes in ((64,), (16, 16)):
        g = PeriodicGrid(sizes)
        f = random_scalar(g, seed=5)
        v = random_vector(g, seed=6)
        lhs = integrate(f * div(v, g), g)
        rhs = -integrate(np.sum(grad(f, g) * v, axis=0), g)
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_grad_and_div_have_zero_mean():
    g = PeriodicGrid((16, 16))
    f = random_scalar(g, seed=7)
    v = random_vector(g, seed=8)
    assert integrate(div(v, g), g) == pytest.approx(0.0, abs=1e-12)
    for a in range(2):
        assert integrate(grad(f, g)[a], g) == pytest.approx(0.0, abs=1e-12)


# -- spectral operators ---------------------------------------------------------


def test_spectral_grad_near_machine_precision():
    g = PeriodicGrid((64,))
    x = g.axis_coords(0)
    err = np.max(np.abs(spectral_grad(np.sin(2 * np.pi * x), g)[0] - 2 * np.pi * np.cos(2 * np.pi * x)))
    assert err < 1e-10


def test_spectral_div_of_grad_is_lap():
    g = PeriodicGrid((32, 32))
    xs = g.coords()
    f = np.sin(2 * np.pi * xs[0]) * np.cos(4 * np.pi * xs[1])
    assert np.max(np.abs(spectral_div(spectral_grad(f, g), g) - spectral_lap(f, g))) < 1e-10


def test_spectral_constant_field_derivative_zero():
    g = PeriodicGrid((32,))
    assert np.max(np.abs(spectral_grad(np.full(g.sizes, 2.0), g))) < 1e-13


def test_spectral_2d_mixed_mode():
    g = PeriodicGrid((64, 64))
    xs = g.coords()
    f = np.sin(2 * np.pi * (2 * xs[0] + 3 * xs[1]))
    exact = 2 * np.pi * 2 * np.cos(2 * np.pi * (2 * xs[0] + 3 * xs[1]))
    assert np.max(np.abs(spectral_grad(f, g)[0] - exact)) < 1e-9


# -- quadrature -----------------------------------------------------------------


def test_integrate_unit():
    for sizes in ((32,), (16, 16)):
        g = PeriodicGrid(sizes)
        assert integrate(np.ones(g.sizes), g) == pytest.approx(1.0, rel=1e-14)


def test_lp_norm_of_sine():
    g = PeriodicGrid((256,))
    x = g.axis_coords(0)
    # int sin^2 = 1/2 exactly (trig polynomial below Nyquist)
    assert lp_norm(np.sin(2 * np.pi * x), g, 2) ** 2 == pytest.approx(0.5, abs=1e-12)


def test_lp_norm_max():
    g = PeriodicGrid((64,))
    f = np.zeros(g.sizes)
    f[10] = -3.5
    assert lp_norm(f, g, np.inf) == 3.5


@given(c=st.floats(-100.0, 100.0), p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 6.0]))
@settings(max_examples=40, deadline=None)
def test_lp_norm_homogeneity(c, p):
    g = PeriodicGrid((32,))
    f = random_scalar(g, seed=11)
    assert lp_norm(c * f, g, p) == pytest.approx(abs(c) * lp_norm(f, g, p), rel=1e-10, abs=1e-12)


def test_lp_norm_rejects_small_p():
    g = PeriodicGrid((16,))
    with pytest.raises(ValueError):
        lp_norm(np.ones(g.sizes), g, 0.5)


# -- derived fields ---------------------------------------------------------------


def test_derived_uniform_flow():
    g = PeriodicGrid((16, 16))
    rho = np.ones(g.sizes)
    mom = np.stack([2.0 * np.ones(g.sizes), np.zeros(g.sizes)])
    d = derived(State(0.0, rho, mom), g, 1e-10)
    assert np.allclose(d.u[0], 2.0) and np.allclose(d.u[1], 0.0)
    assert np.allclose(d.sqrt_rho_u[0], 2.0)
    assert d.cutoff_count == 0


def test_derived_vacuum_conventions():
    g = PeriodicGrid((16,))
    rho = np.ones(g.sizes)
    mom = np.ones((1, *g.sizes))
    rho[3] = 0.0
    mom[0, 3] = 0.0  # clean vacuum: no suppression
    rho[5] = 1e-20
    mom[0, 5] = 1e-15  # momentum below the cutoff: suppressed and counted
    d = derived(State(0.0, rho, mom), g, 1e-10)
    assert d.u[0, 3] == 0.0 and d.sqrt_rho_u[0, 3] == 0.0
    assert d.u[0, 5] == 0.0 and d.sqrt_rho_u[0, 5] == 0.0
    assert d.cutoff_count == 1


def test_derived_scaling_consistency():
    g = PeriodicGrid((32,))
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * g.axis_coords(0))
    mom = (0.3 * np.cos(2 * np.pi * g.axis_coords(0)))[np.newaxis]
    d1 = derived(State(0.0, rho, mom), g, 1e-10)
    d2 = derived(State(0.0, rho, 4.0 * mom), g, 1e-10)
    np.testing.assert_allclose(d2.u, 4.0 * d1.u, rtol=1e-14)
    np.testing.assert_allclose(d2.sqrt_rho_u, 4.0 * d1.sqrt_rho_u, rtol=1e-14)


def test_derived_requires_positive_cutoff():
    g = PeriodicGrid((16,))
    with pytest.raises(ValueError):
        derived(State(0.0, np.ones(g.sizes), np.zeros((1, 16))), g, 0.0)


# -- checkpoints -------------------------------------------------------------------


def test_checkpoint_round_trip_bit_exact(tmp_path):
    g = PeriodicGrid((16, 24), (1.0, 2.0))
    rng = np.random.default_rng(13)
    state = State(0.625, rng.random(g.sizes), rng.random((2, *g.sizes)))
    path = tmp_path / "state.bdns"
    save_checkpoint(path, state, g)
    loaded, g2 = load_checkpoint(path)
    assert g2 == g
    assert loaded.t == state.t
    assert np.array_equal(loaded.rho, state.rho)
    assert np.array_equal(loaded.mom, state.mom)


def test_checkpoint_magic_bytes(tmp_path):
    g = PeriodicGrid((16,))
    path = tmp_path / "state.bdns"
    save_checkpoint(path, State(0.0, np.ones(g.sizes), np.zeros((1, 16))), g)
    assert open(path, "rb").read(4) == b"BDNS"
    bad = tmp_path / "bad.bdns"
    bad.write_bytes(b"XXXX" + b"\0" * 32)
    with pytest.raises(ValueError):
        load_checkpoint(bad)
