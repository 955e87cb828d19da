import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indicatrix.circle_set import InvalidInputError
from indicatrix.plane_incidence import (
    RasterSet,
    cantor_product,
    default_h_list,
    dimension_estimates,
    disk,
    inclusion_chain,
    neighborhood_measures,
    plane_reports,
    rasterize,
    read_pgm,
    shape_from_literal,
    square,
    tau_directional,
    write_pgm,
)


def offset_disks_symdiff(r, d):
    """|D symdiff (D + d e1)| for a disk of radius r, from the lens area."""
    lens = 2 * r * r * math.acos(d / (2 * r)) - d / 2 * math.sqrt(4 * r * r - d * d)
    return 2 * (math.pi * r * r - lens)


class TestRaster:
    def test_disk_area(self):
        assert disk(0.25, 512).area == pytest.approx(math.pi / 16, rel=0.01)

    def test_trivial_predicates(self):
        assert rasterize(lambda x, y: x < -1, 64).area == 0
        assert rasterize(lambda x, y: x < 2, 64).area == 1

    def test_scalar_predicate(self):
        E = rasterize(lambda x, y: x < 0.5 and y < 0.5, 32)
        assert E.area == 0.25

    @pytest.mark.parametrize("R", [8, 100, 48])
    def test_resolution(self, R):
        with pytest.raises(InvalidInputError):
            RasterSet(R, np.zeros((R, R), bool))

    def test_immutable(self):
        E = disk(0.25, 64)
        with pytest.raises(ValueError):
            E.cells[0, 0] = True

    def test_literals(self):
        assert shape_from_literal("square:0.5", 64).area == 0.25
        with pytest.raises(InvalidInputError):
            shape_from_literal("blob:1", 64)
        with pytest.raises(InvalidInputError):
            shape_from_literal("disk:x", 64)


class TestTau:
    def test_disk_closed_form(self):
        got = tau_directional(disk(0.25, 1024), 1 / 8)
        assert got == pytest.approx(offset_disks_symdiff(0.25, 0.125), rel=0.02)
        assert offset_disks_symdiff(0.25, 0.125) == pytest.approx(0.1237, abs=5e-4)

    def test_square_slab(self):
        R = 512
        got = tau_directional(square(0.5, R), 1 / 16)
        assert abs(got - 1 / 16) <= 2 * 0.5 / R

    def test_zero(self):
        assert tau_directional(disk(0.25, 128), 0) == 0

    def test_negative(self):
        with pytest.raises(InvalidInputError):
            tau_directional(disk(0.25, 128), -0.1)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(-64, 64), st.integers(-64, 64), st.floats(0, 0.3), st.floats(0, 2 * math.pi))
    def test_translation_invariance(self, di, dj, h, theta):
        E = disk(0.2, 128, centre=(0.4, 0.55))
        v = (math.cos(theta), math.sin(theta))
        assert tau_directional(E.shifted(di, dj), h, v) == tau_directional(E, h, v)

    def test_symmetric_in_direction(self):
        E = square(0.3, 256)
        assert tau_directional(E, 0.1, (0.6, 0.8)) == tau_directional(E, 0.1, (-0.6, -0.8))


class TestNeighbourhoods:
    def test_square_sausage(self):
        R, h = 512, 1 / 16
        _, gamma = neighborhood_measures(square(0.5, R), h)
        assert gamma == pytest.approx(4 * h + (math.pi - 4) * h * h, abs=8 / R)

    def test_disk_annulus(self):
        R, r, h = 1024, 0.25, 1 / 16
        kh, _ = neighborhood_measures(disk(r, R), h)
        assert kh == pytest.approx(2 * math.pi * r * h - math.pi * h * h, rel=0.02)

    def test_zero(self):
        assert neighborhood_measures(disk(0.25, 256), 0) == (0.0, 0.0)
        assert neighborhood_measures(square(0.5, 256), 0) == (0.0, 0.0)

    @pytest.mark.parametrize("shape", ["disk:0.25", "square:0.5", "cantor:1/4"])
    @pytest.mark.parametrize("h", [1 / 64, 1 / 16, 1 / 8])
    def test_chain(self, shape, h):
        E = shape_from_literal(shape, 256)
        for v in ((1.0, 0.0), (0.6, 0.8), (0.0, 1.0)):
            c = inclusion_chain(E, h, v)
            assert c.holds
            assert c.tau <= 2 * c.kh and c.kh <= c.gamma

    def test_literal_inclusion_can_fail(self):
        # points of K with x + hv in E lie outside K(h) minus K
        c = inclusion_chain(square(0.5, 256), 1 / 16)
        assert c.e_side_in_kh and not c.disagreement_in_kh


class TestDimensions:
    def test_square(self):
        est = dimension_estimates(square(0.5, 512), default_h_list(512))
        assert est.d_X == pytest.approx(1.0, abs=0.1) and est.d_B == pytest.approx(1.0, abs=0.1)

    def test_disk(self):
        est = dimension_estimates(disk(0.25, 512), default_h_list(512))
        assert est.d_X == pytest.approx(1.0, abs=0.1) and est.d_B == pytest.approx(1.0, abs=0.1)
        assert est.d_X <= est.d_B + 0.05

    def test_cantor(self):
        est = dimension_estimates(cantor_product(0.25, 512), default_h_list(512))
        assert est.d_X == pytest.approx(1.5, abs=0.1)

    def test_needs_four(self):
        with pytest.raises(InvalidInputError):
            dimension_estimates(disk(0.25, 64), [0.1, 0.2, 0.3])

    def test_grid_scale(self):
        with pytest.raises(InvalidInputError):
            dimension_estimates(disk(0.25, 64), [0.01, 0.1, 0.2, 0.3])

    def test_cantor_stage_fixed_across_resolutions(self):
        a, b = cantor_product(0.25, 512), cantor_product(0.25, 1024)
        assert a.area == pytest.approx(b.area, abs=2 / 512)


class TestPGM:
    def test_round_trip(self, tmp_path):
        E = disk(0.3, 64, centre=(0.3, 0.6))
        p = write_pgm(E, tmp_path / "d.pgm")
        assert (tmp_path / "d.pgm.json").exists()
        F = read_pgm(p)
        assert F.resolution == 64 and np.array_equal(F.cells, E.cells)

    def test_header(self, tmp_path):
        write_pgm(square(0.5, 32), tmp_path / "s.pgm")
        assert (tmp_path / "s.pgm").read_bytes().startswith(b"P5\n32 32\n1\n")

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.pgm").write_bytes(b"P2\n16 16\n1\n" + bytes(256))
        with pytest.raises(InvalidInputError):
            read_pgm(tmp_path / "x.pgm")

    def test_sidecar_mismatch(self, tmp_path):
        p = write_pgm(square(0.5, 32), tmp_path / "s.pgm")
        (tmp_path / "s.pgm.json").write_text('{"resolution": 64}')
        with pytest.raises(InvalidInputError):
            read_pgm(p)


def test_plane_reports_small():
    reps = plane_reports(resolutions=(512,), hs=(1 / 16,))
    names = [r.name for r in reps]
    assert names[:3] == ["chain disk:0.25 R=512", "literal inclusion disk:0.25 R=512", "dimension disk:0.25 R=512"]
    assert all(r.passed for r in reps if not r.name.startswith("literal"))
    assert not any(r.passed for r in reps if r.name.startswith("literal"))
