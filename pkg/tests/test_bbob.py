import numpy as np
import pytest

from probesel import bbob
from probesel.ela import SobolGenerator
from probesel.util import InvalidArgumentError

ALL_FIDS = range(1, 25)


@pytest.mark.parametrize("dimension", [2, 5, 10])
def test_optimum_attained_everywhere(dimension):
    for fid in ALL_FIDS:
        inst = bbob.make_instance(fid, 1, dimension)
        assert abs(bbob.evaluate(inst, inst.x_opt) - inst.f_opt) < 1e-9, fid


@pytest.mark.parametrize("dimension", [2, 10])
def test_rotations_orthogonal(dimension):
    eye = np.eye(dimension)
    for fid in ALL_FIDS:
        inst = bbob.make_instance(fid, 3, dimension)
        for rot in (inst.rotation_r, inst.rotation_q):
            assert np.max(np.abs(rot.T @ rot - eye)) < 1e-10


def test_translation_and_target_bounds():
    for fid in ALL_FIDS:
        for iid in (1, 2, 5):
            inst = bbob.make_instance(fid, iid, 10)
            assert np.all(np.abs(inst.x_opt) <= 4.0)
            assert abs(inst.f_opt) <= 1000.0


def test_instance_determinism_bit_for_bit():
    a = bbob.make_instance(8, 3, 10)
    b = bbob.make_instance(8, 3, 10)
    assert a.seed == b.seed
    assert a.f_opt == b.f_opt
    assert np.array_equal(a.x_opt, b.x_opt)
    assert np.array_equal(a.rotation_r, b.rotation_r)
    assert np.array_equal(a.rotation_q, b.rotation_q)
    x = np.linspace(-5, 5, 10)
    assert bbob.evaluate(a, x) == bbob.evaluate(b, x)


def test_sphere_unit_step():
    inst = bbob.make_instance(1, 1, 10)
    e1 = np.zeros(10)
    e1[0] = 1.0
    assert bbob.evaluate(inst, inst.x_opt + e1) == pytest.approx(inst.f_opt + 1.0, abs=1e-12)


def test_rastrigin_sobol_scan_respects_optimum():
    # brute-force lower-bound scan at quasi-random points
    inst = bbob.make_instance(3, 1, 10)
    pts = -5.0 + 10.0 * SobolGenerator(10).next_points(1000)
    vals = bbob.evaluate_batch(inst, pts)
    assert np.all(np.isfinite(vals))
    assert vals.min() >= inst.f_opt - 1e-9


@pytest.mark.parametrize("dimension", [2, 5])
def test_optimality_probe_random_scan(dimension):
    rng = np.random.default_rng(99)
    pts = rng.uniform(-5, 5, (100_000, dimension))
    for fid in ALL_FIDS:
        inst = bbob.make_instance(fid, 2, dimension)
        vals = bbob.evaluate_batch(inst, pts)
        assert vals.min() >= inst.f_opt - 1e-9, fid


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        bbob.make_instance(25, 1, 10)
    with pytest.raises(InvalidArgumentError):
        bbob.make_instance(0, 1, 10)
    with pytest.raises(InvalidArgumentError):
        bbob.make_instance(1, 0, 10)
    with pytest.raises(InvalidArgumentError):
        bbob.make_instance(1, 1, 1)


def test_evaluate_input_checks():
    inst = bbob.make_instance(1, 1, 5)
    with pytest.raises(InvalidArgumentError):
        bbob.evaluate(inst, np.zeros(4))
    with pytest.raises(InvalidArgumentError):
        bbob.evaluate(inst, np.array([np.nan, 0, 0, 0, 0]))


def test_evaluate_pure_and_batch_consistent():
    inst = bbob.make_instance(6, 2, 5)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-5, 5, (20, 5))
    batch = bbob.evaluate_batch(inst, pts)
    # repeated same-shape calls are bit-identical (solver determinism rests on this)
    assert np.array_equal(batch, bbob.evaluate_batch(inst, pts))
    # single-point evaluation agrees up to BLAS summation-order rounding
    singles = np.array([bbob.evaluate(inst, p) for p in pts])
    np.testing.assert_allclose(singles, batch, rtol=1e-9)


def test_list_suite():
    suite = bbob.list_suite(5, 10)
    assert len(suite) == 120
    keys = [(i.function_id, i.instance_id) for i in suite]
    assert keys == sorted(keys)
    small = bbob.list_suite(1, 2)
    assert len(small) == 24
    assert all(i.dimension == 2 for i in small)
    with pytest.raises(InvalidArgumentError):
        bbob.list_suite(0, 10)


def test_descriptor_roundtrip():
    inst = bbob.make_instance(21, 4, 5)
    doc = bbob.descriptor(inst)
    assert set(doc) == {"function_id", "instance_id", "dimension", "seed"}
    back = bbob.instance_from_descriptor(doc)
    assert np.array_equal(back.x_opt, inst.x_opt)
    assert back.f_opt == inst.f_opt
    x = np.full(5, 0.5)
    assert bbob.evaluate(back, x) == bbob.evaluate(inst, x)
    with pytest.raises(InvalidArgumentError):
        bbob.instance_from_descriptor({**doc, "seed": 123})
