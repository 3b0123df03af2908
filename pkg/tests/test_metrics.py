import numpy as np
import pytest

from rytov.errors import DataMismatchError
from rytov.metrics import (centroid_error_cells, evaluate_pair,
                           half_max_support, psnr, support_iou,
                           weighted_centroid)


def test_psnr_exact_match_capped():
    img = np.full((8, 8), 3.0)
    assert psnr(img, img) == 99.0


def test_psnr_peak77_unit_mse():
    truth = np.zeros((10, 10))
    truth[0, 0] = 77.0
    pred = truth + 1.0
    # 10 log10(77^2 / 1) = 37.7299 dB
    assert psnr(pred, truth) == pytest.approx(10 * np.log10(77.0 ** 2),
                                              abs=1e-9)
    assert psnr(pred, truth) == pytest.approx(37.7299, abs=1e-3)


def test_psnr_unit_offset_on_ones():
    truth = np.ones((5, 5))
    assert psnr(truth + 1.0, truth) == pytest.approx(0.0, abs=1e-12)


def test_psnr_shape_mismatch():
    with pytest.raises(DataMismatchError):
        psnr(np.ones((3, 3)), np.ones((4, 4)))


def test_half_max_support_and_centroid():
    img = np.ones((9, 9))
    img[2:5, 3:6] = 5.0
    mask = half_max_support(img, background=1.0)
    assert mask.sum() == 9
    ci, cj = weighted_centroid(img, mask, background=1.0)
    assert ci == pytest.approx(4.0)
    assert cj == pytest.approx(3.0)
    assert weighted_centroid(img, np.zeros_like(mask)) is None
    assert not half_max_support(np.ones((4, 4)), background=1.0).any()


def test_centroid_error_and_iou():
    truth = np.ones((20, 20))
    truth[4:8, 4:8] = 3.0
    pred = np.ones((20, 20))
    pred[5:9, 5:9] = 2.0
    err = centroid_error_cells(pred, truth, pred_background=1.0)
    assert err == pytest.approx(np.hypot(1.0, 1.0))
    iou = support_iou(pred >= 2.0, truth >= 3.0)
    assert iou == pytest.approx(9 / 23)
    assert support_iou(np.zeros((2, 2), bool), np.zeros((2, 2), bool)) == 1.0


def test_evaluate_pair_perfect():
    truth = np.ones((12, 12))
    truth[3:6, 3:6] = 4.0
    r = evaluate_pair(truth.copy(), truth)
    assert r.psnr_db == 99.0
    assert r.centroid_error_cells == pytest.approx(0.0)
    assert r.support_iou == 1.0
