import numpy as np
import pytest

from lowlight import (AtmosphericLightMap, DimensionError, DomainError,
                      ImageGrid, ScatterParams, TransmissionMap, degrade,
                      enhance, synth_atmospheric_light)


def _grids(h=4, w=4, j=0.8, t=0.5, a=0.6):
    return (ImageGrid(np.full((h, w, 3), j)),
            TransmissionMap(np.full((h, w), t)),
            AtmosphericLightMap.constant(h, w, a))


class TestScatterParams:
    def test_alpha_range(self):
        with pytest.raises(DomainError):
            ScatterParams(alpha=1.5)
        with pytest.raises(DomainError):
            ScatterParams(alpha=-0.1)


class TestSynthAtmosphericLight:
    def test_alpha_zero_is_exactly_one(self):
        a = synth_atmospheric_light(8, 8, ScatterParams(alpha=0.0, seed=1))
        assert np.all(a.values == 1.0)

    def test_alpha_half_range(self):
        a = synth_atmospheric_light(64, 64, ScatterParams(alpha=0.5, seed=1))
        assert a.values.min() >= 0.5
        assert a.values.max() <= 1.0

    def test_monte_carlo_mean(self):
        # analytic mean of 1 - alpha*u is 1 - alpha/2 = 0.75
        a = synth_atmospheric_light(400, 250, ScatterParams(alpha=0.5, seed=9))
        assert abs(a.values.mean() - 0.75) < 0.01

    def test_seed_reproducible(self):
        p = ScatterParams(alpha=0.5, seed=42)
        a1 = synth_atmospheric_light(8, 8, p)
        a2 = synth_atmospheric_light(8, 8, p)
        assert np.array_equal(a1.values, a2.values)

    def test_different_seeds_differ(self):
        a1 = synth_atmospheric_light(4, 4, ScatterParams(alpha=0.5, seed=1))
        a2 = synth_atmospheric_light(4, 4, ScatterParams(alpha=0.5, seed=2))
        assert not np.array_equal(a1.values, a2.values)


class TestDegrade:
    def test_full_transmission_is_identity(self):
        j, _, a = _grids()
        t = TransmissionMap(np.ones((4, 4)))
        out = degrade(j, t, a)
        assert np.array_equal(out.data, j.data)

    def test_dark_scene_at_floor(self):
        # I = 0*0.1 + 0.6*0.9 = 0.54
        j, _, a = _grids(j=0.0)
        t = TransmissionMap(np.full((4, 4), 0.1))
        out = degrade(j, t, a)
        np.testing.assert_allclose(out.data, 0.54)

    def test_direct_substitution(self):
        # I = 0.8*0.5 + 0.6*0.5 = 0.7
        j, t, a = _grids()
        np.testing.assert_allclose(degrade(j, t, a).data, 0.7)

    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(0)
        j = ImageGrid(rng.random((6, 5, 3)))
        t = TransmissionMap(0.1 + 0.9 * rng.random((6, 5)))
        a = AtmosphericLightMap(rng.random((6, 5)))
        i = degrade(j, t, a)
        lo = np.minimum(j.data, a.values[:, :, None])
        hi = np.maximum(j.data, a.values[:, :, None])
        assert np.all(i.data >= lo - 1e-12)
        assert np.all(i.data <= hi + 1e-12)

    def test_dimension_mismatch(self):
        j, t, _ = _grids()
        with pytest.raises(DimensionError):
            degrade(j, t, AtmosphericLightMap.constant(3, 3, 0.5))


class TestEnhance:
    def test_full_transmission_is_identity(self):
        i, _, a = _grids(j=0.3)
        t = TransmissionMap(np.ones((4, 4)))
        assert np.array_equal(enhance(i, t, a).data, i.data)

    def test_inverse_of_degrade_example(self):
        # J = (0.7 - 0.6*0.5) / 0.5 = 0.8
        i, t, a = _grids(j=0.7)
        np.testing.assert_allclose(enhance(i, t, a).data, 0.8)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(20):
            j = ImageGrid(rng.random((8, 8, 3)))
            t = TransmissionMap(0.1 + 0.9 * rng.random((8, 8)))
            a = AtmosphericLightMap(rng.random((8, 8)))
            back = enhance(degrade(j, t, a), t, a)
            worst = max(worst, float(np.abs(back.data - j.data).max()))
        assert worst <= 1e-5

    def test_dimension_mismatch(self):
        i, _, a = _grids()
        with pytest.raises(DimensionError):
            enhance(i, TransmissionMap(np.ones((3, 3))), a)


class TestTypeInvariants:
    def test_transmission_floor_enforced(self):
        with pytest.raises(ValueError):
            TransmissionMap(np.full((2, 2), 0.05), t_min=0.1)

    def test_transmission_t_min_range(self):
        with pytest.raises(DomainError):
            TransmissionMap(np.ones((2, 2)), t_min=0.0)

    def test_light_map_range(self):
        with pytest.raises(ValueError):
            AtmosphericLightMap(np.full((2, 2), 1.2))
