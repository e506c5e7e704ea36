import math

import numpy as np
import pytest

from semdnav.vision import (EVENT_DTYPE, OFF, ON, CameraEvent, CameraModel, EventFileError,
                            Scene, SceneSurface, as_event_list, cast_rays, from_event_list,
                            generate_events, load_events, render_frame, save_events)

CAM = CameraModel()


def test_camera_geometry():
    assert CAM.width == 128 and CAM.height == 40
    assert math.isclose(CAM.pixel_angle_deg, 140.0 / 128)
    assert CAM.cycle_us == 5000
    a = np.rad2deg(CAM.column_angles())
    assert a[0] > 0 > a[-1]
    assert math.isclose(a[0], -a[-1])


def test_events_follow_threshold_and_polarity():
    prev = np.zeros((CAM.height, CAM.width))
    cur = prev.copy()
    cur[0, 3] = 0.5
    cur[1, 4] = -0.5
    cur[2, 5] = CAM.threshold  # not strictly above
    ev = generate_events(prev, cur, 1234, CAM)
    assert as_event_list(ev) == [CameraEvent(1234, 3, 0, ON), CameraEvent(1234, 4, 1, OFF)]


def test_events_are_in_raster_order_and_capped():
    rng = np.random.default_rng(0)
    prev = np.zeros((CAM.height, CAM.width))
    cur = rng.choice([-1.0, 1.0], size=prev.shape)
    ev = generate_events(prev, cur, 0, CAM)
    assert ev.shape[0] == CAM.event_cap
    key = ev["y"].astype(int) * CAM.width + ev["x"]
    assert np.all(np.diff(key) > 0)
    assert key[0] == 0


def test_no_change_no_events():
    f = np.full((CAM.height, CAM.width), 0.3)
    assert generate_events(f, f, 0, CAM).shape[0] == 0


def test_frame_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        generate_events(np.zeros((2, 2)), np.zeros((2, 3)), 0, CAM)


def test_event_file_round_trip(tmp_path):
    ev = from_event_list([(0, 1, 2, 1), (5, 3, 4, 0), (5, 127, 39, 1)])
    path = tmp_path / "ev.csv"
    save_events(ev, path, ["recorded by hand"])
    back = load_events(path)
    assert back.dtype == EVENT_DTYPE
    assert np.array_equal(back, ev)


@pytest.mark.parametrize("body, line", [
    ("t_us,x,y,polarity\n0,1,2\n", 2),
    ("t_us,x,y,polarity\n0,1,2,3\n", 2),
    ("t_us,x,y,polarity\n0,200,2,1\n", 2),
    ("t_us,x,y,polarity\n10,1,2,1\n5,1,2,1\n", 3),
    ("# note\nt_us,x,y,polarity\n-1,1,2,1\n", 3),
    ("t_us,x,y,polarity\n0,a,2,1\n", 2),
])
def test_malformed_event_files_report_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(EventFileError) as exc:
        load_events(path)
    assert exc.value.line == line


def test_saving_unsorted_events_rejected(tmp_path):
    with pytest.raises(ValueError):
        save_events(from_event_list([(5, 0, 0, 1), (1, 0, 0, 1)]), tmp_path / "x.csv")


def test_ray_hits_wall_at_expected_distance():
    scene = Scene([SceneSurface(2.0, -5.0, 2.0, 5.0)])
    _, dist = cast_rays(scene, (0.0, 0.0, 0.0), CAM)
    centre = dist[CAM.width // 2]
    angle = CAM.column_angles()[CAM.width // 2]
    assert math.isclose(centre, 2.0 / math.cos(angle), rel_tol=1e-9)
    assert np.all(np.isfinite(dist[np.abs(CAM.column_angles()) < math.atan(2.5)]))


def test_empty_scene_is_background():
    val, dist = cast_rays(Scene(), (0.0, 0.0, 0.0), CAM)
    assert np.all(np.isinf(dist)) and np.all(val == 0.5)


def test_box_filter_averages_far_grating_to_mean():
    scene = Scene([SceneSurface(200.0, -500.0, 200.0, 500.0, period=0.2)])
    point, dist = cast_rays(scene, (0.0, 0.0, 0.0), CAM, texture_filter="none")
    box, _ = cast_rays(scene, (0.0, 0.0, 0.0), CAM, texture_filter="box")
    hit = np.isfinite(dist)
    assert hit.sum() > 100
    assert set(np.round(point[hit], 6)) <= {0.0, 1.0}
    assert np.all(np.abs(box[hit] - 0.5) < 0.05)


def test_render_is_column_constant_and_deterministic():
    scene = Scene([SceneSurface(1.0, -3.0, 1.0, 3.0)])
    a = render_frame(scene, (0.0, 0.0, 0.2), CAM, texture_filter="box")
    b = render_frame(scene, (0.0, 0.0, 0.2), CAM, texture_filter="box")
    assert a.shape == (CAM.height, CAM.width)
    assert np.array_equal(a, b)
    assert np.all(a == a[0])


def test_translation_produces_events():
    scene = Scene([SceneSurface(1.0, -3.0, 1.0, 3.0), SceneSurface(-3.0, 1.0, 3.0, 1.0)])
    cam = CameraModel(threshold=0.02)
    f0 = render_frame(scene, (0.0, 0.0, 0.0), cam, texture_filter="box")
    f1 = render_frame(scene, (0.01, 0.0, 0.0), cam, texture_filter="box")
    assert generate_events(f0, f1, 5000, cam).shape[0] > 0


def test_bad_surface_rejected():
    with pytest.raises(ValueError):
        SceneSurface(0, 0, 1, 0, period=0.0)
    with pytest.raises(ValueError):
        cast_rays(Scene(), (0.0, 0.0, 0.0), CAM, texture_filter="gauss")
