"""Science handlers exercised through a live host process."""

from __future__ import annotations

from pyruntime import handler_path
from pyruntime.gridio import GRID_CONTENT_TYPE, parse_grid, read_grid

from test_blur_numerics import max_delta, oracle_convolve
from wirehelp import invoke, spawn_host, specialize


def test_flag_zeroes_above_threshold(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("flag"))
        status, body, _, _ = invoke(ep, {"Input-MS": "obs1.ms", "threshold": 50.0})
        assert (status, body) == (200, b"/data/obs1-flagged")
        out = read_grid(workdir / "obs1-flagged")
        expected = [0.0 if abs(v) > 50.0 else v for v in seeded_grid.pixels]
        assert out.pixels == expected


def test_flag_without_threshold_is_identity(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("flag"))
        status, body, _, _ = invoke(ep, {"Input-MS": "obs1.ms"})
        assert status == 200
        assert read_grid(workdir / "obs1-flagged").pixels == seeded_grid.pixels


def test_calibrate_scales_pixels(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("calibrate"))
        status, body, _, _ = invoke(ep, {"Input-MS": "obs1.ms", "gain": 2.0})
        assert (status, body) == (200, b"/data/obs1-cal")
        out = read_grid(workdir / "obs1-cal")
        assert out.pixels == [v * 2.0 for v in seeded_grid.pixels]


def test_tclean_blurs_into_named_output(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("tclean_mock"))
        status, body, _, _ = invoke(
            ep, {"Input-MS": "obs1.ms", "Output-MS": "img1", "niter": 100})
        assert (status, body) == (200, b"/data/img1")  # extra keys are ignored
        out = read_grid(workdir / "img1")
        assert max_delta(out.pixels, oracle_convolve(seeded_grid)) < 1e-9


def test_tclean_missing_parameters(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("tclean_mock"))
        status, body, _, _ = invoke(ep, {"Input-MS": "obs1.ms"})
        assert (status, body) == (500, b"MissingParameter: Output-MS")
        status, body, _, _ = invoke(ep, {"Output-MS": "img1"})
        assert (status, body) == (500, b"MissingParameter: Input-MS")


def test_missing_input_file_surfaces_as_error(workdir):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("flag"))
        status, body, _, _ = invoke(ep, {"Input-MS": "ghost.ms"})
        assert status == 500
        assert body.startswith(b"FileNotFoundError")


def test_malformed_input_surfaces_as_error(workdir):
    (workdir / "junk.ms").write_text("not a grid\n")
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("calibrate"))
        status, body, _, _ = invoke(ep, {"Input-MS": "junk.ms"})
        assert status == 500
        assert body.startswith(b"MalformedGrid")


def test_handlers_accept_data_prefixed_paths(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("flag"))
        status, body, _, _ = invoke(
            ep, {"Input-MS": "/data/obs1.ms", "threshold": 50.0})
        assert (status, body) == (200, b"/data/obs1-flagged")


def test_gaussian_blur_returns_binary_grid(workdir, seeded_grid):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("gaussian_blur"))
        status, body, content_type, _ = invoke(ep, {"file": "obs1.ms"})
        assert status == 200
        assert content_type == GRID_CONTENT_TYPE
        payload = parse_grid(body.decode("utf-8"))
        assert max_delta(payload.pixels, oracle_convolve(seeded_grid)) < 1e-9
        # and the same grid was written beside the input
        assert (workdir / "obs1-blur").read_bytes() == body


def test_gaussian_blur_requires_file_parameter(workdir):
    with spawn_host(workdir) as ep:
        specialize(ep, handler_path("gaussian_blur"))
        status, body, _, _ = invoke(ep, {})
        assert (status, body) == (500, b"MissingParameter: file")
