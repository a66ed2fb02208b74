import numpy as np
import pytest

from infoloss import (ConfigurationError, DataError, UniformBox, quantize,
                      quantize_batch, refine, sample, support_diameter,
                      cell_count_bound)
from infoloss._kernels import floor_snap
from infoloss.quantizer import CellGrid


def test_quantize_examples():
    assert quantize(0.37, 10).coords.tolist() == [3]
    assert quantize(-0.25, 4).coords.tolist() == [-1]
    assert quantize([0.5, 0.75], 2).coords.tolist() == [1, 1]


def test_quantize_errors():
    with pytest.raises(DataError):
        quantize(float("nan"), 4)
    with pytest.raises(ConfigurationError):
        quantize(0.5, 0)


def test_refine_examples():
    idx = quantize(0.37, 2)
    assert idx.coords.tolist() == [0]
    assert refine(idx, 0.37).coords.tolist() == [1]
    assert refine(quantize(0.9, 1), 0.9).coords.tolist() == [1]
    assert refine(quantize([0.1, 0.6], 1), [0.1, 0.6]).coords.tolist() == [0, 1]


def test_refine_parent_mismatch_fails():
    bad = quantize(0.9, 2)  # bin of 0.9, not of 0.2
    with pytest.raises(AssertionError):
        refine(bad, 0.2)


def test_boundary_snap():
    # within 1e-12 below an integer -> upper cell; outside the window -> floor
    assert floor_snap(np.array([2.9999999999999996])).tolist() == [3]
    assert floor_snap(np.array([2.9999999])).tolist() == [2]
    assert floor_snap(np.array([-1e-13])).tolist() == [0]
    assert floor_snap(np.array([-0.3])).tolist() == [-1]
    assert quantize(0.125, 8).coords.tolist() == [1]


def test_dyadic_nesting_property():
    rng = np.random.default_rng(123)
    pts = np.concatenate([rng.uniform(-2, 2, 6000),
                          rng.integers(-8, 8, 2000) / 8.0,
                          rng.uniform(-1e-6, 1e-6, 2000)])
    pts = pts.reshape(-1, 2)
    for k in range(0, 12):
        parent = quantize_batch(pts, 1 << k)
        child = quantize_batch(pts, 1 << (k + 1))
        assert np.all((child >> 1) == parent)


def test_bin_count_bound():
    for spec, dim in [(UniformBox([0.0], [1.0]), 1),
                      (UniformBox([-1.0, -1.0], [1.0, 1.0]), 2)]:
        batch = sample(spec, 20_000, seed=9)
        diam = support_diameter(spec)
        for k in (2, 5, 8):
            n = 1 << k
            cells = quantize_batch(batch.points, n)
            distinct = np.unique(cells, axis=0).shape[0]
            assert distinct <= cell_count_bound(diam, n, dim)


def test_cell_grid_pack_roundtrip():
    grid = CellGrid(UniformBox([-1.0, 0.0], [1.0, 2.0]).support_box(), 16)
    rng = np.random.default_rng(5)
    pts = rng.uniform([-1, 0], [1, 2], size=(500, 2))
    coords = quantize_batch(pts, 16)
    keys = grid.pack(coords)
    assert np.array_equal(grid.unpack(keys), coords)
    mids = grid.midpoints(keys)
    assert np.all(quantize_batch(mids, 16) == coords)


def test_cell_grid_overflow_guard():
    box = UniformBox([0.0] * 4, [1.0] * 4).support_box()
    with pytest.raises(ConfigurationError):
        CellGrid(box, 1 << 18)
