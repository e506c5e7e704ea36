import math

import numpy as np
import pytest

from semdnav.characterize import (CURVE_HEADER, NULL, PREFERRED, RUN_HEADER, GratingSpec,
                                  Response, RunRow, contrast_response, curves_csv,
                                  grating_columns, ingest_rows, michelson_contrast,
                                  population_response, run_grid,
                                  runs_csv, synth_grating_events, tuning_curves)
from semdnav.vision import CameraModel, save_events


@pytest.mark.parametrize("c, m", [(0.0, 0.0), (1.0, 1.0), (0.5, 1 / 3)])
def test_michelson(c, m):
    assert michelson_contrast(c) == pytest.approx(m)


def test_michelson_range():
    with pytest.raises(ValueError):
        michelson_contrast(1.5)


def test_grating_levels_and_period():
    cam = CameraModel()
    spec = GratingSpec(5.0, contrast=0.6)
    cols = grating_columns(spec, 0.0, cam)
    assert set(np.round(cols, 9)) == {1.0, 0.4}
    # one 20 deg period spans about 18.3 columns; a full drift period restores the image
    later = grating_columns(spec, 1.0 / spec.frequency_hz, cam)
    assert np.allclose(cols, later)


def test_area_sampling_gives_intermediate_levels():
    spec = GratingSpec(5.0, sampling="area")
    cols = grating_columns(spec, 0.013)
    assert cols.min() >= 0.0 and cols.max() <= 1.0
    assert len(set(np.round(cols, 6))) > 2


def test_grating_direction_moves_edges_the_right_way():
    cam = CameraModel()
    for d, sign in ((PREFERRED, 1), (NULL, -1)):
        spec = GratingSpec(1.0, direction=d)
        a = grating_columns(spec, 0.0, cam)
        b = grating_columns(spec, 0.1, cam)  # 2 deg, about 1.8 columns
        fall_a = np.nonzero(np.diff(a) < 0)[0][0]
        fall_b = np.nonzero(np.diff(b) < 0)[0][0]
        assert sign * (fall_b - fall_a) in (1, 2)


def test_zero_contrast_is_silent():
    assert synth_grating_events(GratingSpec(5.0, contrast=0.0, duration_s=0.5)).size == 0


def _row(f, c, d, rate, rep=0, n_events=10):
    return RunRow(f, c, d, rep, 0.0, Response(rate, 0.0, n_events, 1.0), n_events == 0 and c > 0)


def test_tuning_normalisation_and_peak():
    rows = [_row(f, 1.0, PREFERRED, r, k) for f, r in [(1, 2.0), (5, 8.0), (10, 4.0)]
            for k in range(2)]
    rows += [_row(f, 1.0, NULL, 1.0) for f in (1, 5, 10)]
    cur = tuning_curves(rows)
    assert cur[PREFERRED].peak_frequency_hz == 5
    assert cur[PREFERRED].value(5) == 1.0
    assert cur[PREFERRED].value(10) == 0.5
    assert np.allclose(cur[NULL].mean_norm, 1.0 / 8.0)


def test_half_crossing_interpolates():
    rows = [_row(5.0, c, PREFERRED, r) for c, r in [(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)]]
    cr = contrast_response(rows)
    # michelson of the prints: 0, 1/3, 1
    assert cr.half_crossing() == pytest.approx((1 / 3 + 1) / 2)


def test_half_crossing_nan_when_never_reached():
    rows = [_row(5.0, 1.0, PREFERRED, 0.0)]
    assert math.isnan(contrast_response(rows).half_crossing())


def test_csv_layout_and_degenerate_comments():
    rows = [_row(1.0, 1.0, PREFERRED, 0.0, n_events=0), _row(1.0, 1.0, NULL, 0.0),
            _row(5.0, 1.0, PREFERRED, 2.0), _row(5.0, 1.0, NULL, 0.5)]
    text = curves_csv(rows, ["tool test"])
    lines = text.splitlines()
    assert lines[0] == "# tool test"
    assert lines[1].startswith("# degenerate: frequency_hz=1 contrast=1 direction=preferred")
    assert lines[2] == CURVE_HEADER
    assert lines[3].startswith("1,1,preferred,0,0,1")
    assert runs_csv(rows).splitlines()[0] == RUN_HEADER
    assert len(runs_csv(rows).splitlines()) == 5


def test_grid_point_is_reproducible_and_directional():
    args = dict(frequencies=[5.0], contrasts=[1.0], reps=1, duration_s=1.0)
    a = run_grid(**args)
    b = run_grid(**args)
    assert [r.response for r in a] == [r.response for r in b]
    pref = next(r for r in a if r.direction == PREFERRED)
    null = next(r for r in a if r.direction == NULL)
    assert pref.rate > 0
    assert null.rate < pref.rate
    # the null grating drives the opposite population instead
    assert null.response.rate_rl > null.response.rate_lr


def test_ingested_recording_matches_synthetic(tmp_path):
    spec = GratingSpec(5.0, duration_s=1.0, sampling="area", phase=0.3)
    ev = synth_grating_events(spec)
    path = tmp_path / "rec.csv"
    save_events(ev, path)
    rows = ingest_rows([(5.0, 1.0, PREFERRED, path)], duration_s=1.0)
    shifted = ev.copy()
    shifted["t"] -= shifted["t"][0]
    assert rows[0].response == population_response(shifted, 1.0)
    assert rows[0].response.rate_lr > 0


def test_default_grid_size():
    from semdnav.characterize import REPS, TABLE_CONTRASTS, TABLE_FREQUENCIES_HZ
    assert len(TABLE_FREQUENCIES_HZ) * len(TABLE_CONTRASTS) * 2 * REPS == 216
