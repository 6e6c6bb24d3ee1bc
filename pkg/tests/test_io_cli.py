"""File I/O and command-line tests: PGM parsing against hand-built bytes,
dump round-trips, exit codes, config merging, and CSV schemas."""

import csv

import numpy as np
import pytest

from walshreg import imageio
from walshreg.bench import synthetic_image
from walshreg.cli import (
    BENCH_HEADER,
    EXIT_IO,
    EXIT_OK,
    EXIT_PARAMETER,
    EXIT_REGISTRATION,
    REPORT_HEADER,
    main,
    read_config,
)
from walshreg.errors import ImageIOError, ParameterError
from walshreg.geometry import GrayImage, RigidParams, warp
from walshreg.structure_codes import encode_image


def write_pgm(path, pixels, comment=False):
    h, w = pixels.shape
    header = b"P5\n"
    if comment:
        header += b"# a comment line\n"
    header += f"{w} {h}\n255\n".encode()
    path.write_bytes(header + pixels.tobytes())


class TestPGM:
    def test_round_trip(self, tmp_path, rng):
        img = GrayImage(pixels=rng.integers(0, 256, size=(9, 7)).astype(np.uint8))
        path = tmp_path / "img.pgm"
        imageio.save_image(img, str(path))
        back = imageio.load_image(str(path))
        assert np.array_equal(back.pixels, img.pixels)

    def test_hand_built_file_with_comment(self, tmp_path):
        pixels = np.arange(6, dtype=np.uint8).reshape(2, 3)
        path = tmp_path / "hand.pgm"
        write_pgm(path, pixels, comment=True)
        back = imageio.load_image(str(path))
        assert np.array_equal(back.pixels, pixels)

    def test_rejects_16_bit(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(ImageIOError):
            imageio.load_image(str(path))

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(ImageIOError):
            imageio.load_image(str(path))

    def test_rejects_ascii_pgm(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0\n")
        with pytest.raises(ImageIOError):
            imageio.load_image(str(path))

    def test_rejects_missing_file(self, tmp_path):
        with pytest.raises(ImageIOError):
            imageio.load_image(str(tmp_path / "nope.pgm"))

    def test_rejects_unknown_extension(self, tmp_path):
        path = tmp_path / "img.jpg"
        path.write_bytes(b"")
        with pytest.raises(ImageIOError):
            imageio.load_image(str(path))


class TestPNG:
    def test_round_trip(self, tmp_path, rng):
        img = GrayImage(pixels=rng.integers(0, 256, size=(5, 6)).astype(np.uint8))
        path = tmp_path / "img.png"
        imageio.save_image(img, str(path))
        back = imageio.load_image(str(path))
        assert np.array_equal(back.pixels, img.pixels)

    def test_rejects_color(self, tmp_path):
        from PIL import Image

        path = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4), (10, 20, 30)).save(path)
        with pytest.raises(ImageIOError):
            imageio.load_image(str(path))


class TestCodeDump:
    def test_round_trip(self, tmp_path, image64):
        sci = encode_image(image64, backend="walsh3", base=10)
        path = tmp_path / "codes.txt"
        imageio.save_code_dump(sci, str(path))
        codes, base = imageio.load_code_dump(str(path))
        assert base == 10
        assert np.array_equal(codes, sci.codes)

    def test_visualization_is_16_bit_pgm(self, tmp_path, image64):
        sci = encode_image(image64)
        path = tmp_path / "codes.pgm"
        imageio.save_code_visualization(sci, str(path))
        data = path.read_bytes()
        assert data.startswith(b"P5\n64 64\n65535\n")
        assert len(data) == len(b"P5\n64 64\n65535\n") + 64 * 64 * 2


class TestConfig:
    def test_key_value_parsing(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("# comment\nbackend = walsh3\nbase=5\n\nt-range = -4:4\n")
        values = read_config(str(path))
        assert values == {"backend": "walsh3", "base": "5", "t_range": "-4:4"}

    def test_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("backend walsh3\n")
        with pytest.raises(ParameterError):
            read_config(str(path))


@pytest.fixture(scope="module")
def cli_images(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    ref = synthetic_image(48, seed=11)
    mov, _ = warp(ref, RigidParams(t=2, s=-1, theta=0), interp="bilinear")
    ref_path = root / "ref.pgm"
    mov_path = root / "mov.pgm"
    imageio.save_image(ref, str(ref_path))
    imageio.save_image(mov, str(mov_path))
    return str(ref_path), str(mov_path)


class TestCLI:
    def test_encode_writes_outputs(self, cli_images, tmp_path, capsys):
        ref, _ = cli_images
        code = main(["encode", ref, "--out", str(tmp_path), "--backend", "walsh3"])
        assert code == EXIT_OK
        assert (tmp_path / "ref_codes.pgm").exists()
        assert (tmp_path / "ref_codes.txt").exists()

    def test_encode_invariance_at_cli_level(self, tmp_path, rng):
        pixels = (rng.integers(0, 128, size=(16, 16)) // 2).astype(np.uint8)
        imageio.save_image(GrayImage(pixels=pixels), str(tmp_path / "a.pgm"))
        imageio.save_image(GrayImage(pixels=pixels * 2), str(tmp_path / "b.pgm"))
        assert main(["encode", str(tmp_path / "a.pgm"), "--out", str(tmp_path / "oa")]) == EXIT_OK
        assert main(["encode", str(tmp_path / "b.pgm"), "--out", str(tmp_path / "ob")]) == EXIT_OK
        a = (tmp_path / "oa" / "a_codes.txt").read_text()
        b = (tmp_path / "ob" / "b_codes.txt").read_text()
        assert a == b

    def test_register_report_schema(self, cli_images, tmp_path, capsys):
        ref, mov = cli_images
        code = main([
            "register", ref, mov, "--out", str(tmp_path),
            "--t-range=-4:4", "--s-range=-4:4", "--theta-range=-2:2",
        ])
        assert code == EXIT_OK
        assert (tmp_path / "registered.pgm").exists()
        assert (tmp_path / "difference.pgm").exists()
        with open(tmp_path / "report.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == REPORT_HEADER
        assert rows[1][REPORT_HEADER.index("status")] == "ok"
        assert float(rows[1][0]) == -2.0
        assert float(rows[1][1]) == 1.0

    def test_register_determinism_except_elapsed(self, cli_images, tmp_path):
        ref, mov = cli_images
        flags = ["--t-range=-3:3", "--s-range=-3:3", "--theta-range=-1:1"]
        rows = []
        for name in ("one", "two"):
            out = tmp_path / name
            assert main(["register", ref, mov, "--out", str(out)] + flags) == EXIT_OK
            with open(out / "report.csv") as fh:
                rows.append(list(csv.reader(fh))[1])
        drop = REPORT_HEADER.index("elapsed_seconds")
        a = rows[0][:drop] + rows[0][drop + 1 :]
        b = rows[1][:drop] + rows[1][drop + 1 :]
        assert a == b

    def test_register_error_exit_code(self, tmp_path):
        flat = GrayImage(pixels=np.full((32, 32), 9, dtype=np.uint8))
        p = tmp_path / "flat.pgm"
        imageio.save_image(flat, str(p))
        code = main(["register", str(p), str(p), "--out", str(tmp_path / "out"),
                     "--t-range=-2:2", "--s-range=-2:2", "--theta-range=0:0"])
        assert code == EXIT_REGISTRATION
        with open(tmp_path / "out" / "report.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[1][REPORT_HEADER.index("status")] == "error"

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["metrics", "nope.pgm", "also_nope.pgm"]) == EXIT_IO

    def test_bad_parameter_exit_code(self, cli_images):
        ref, mov = cli_images
        assert main(["register", ref, mov, "--steps", "1,2"]) == EXIT_PARAMETER

    def test_metrics_output(self, cli_images, capsys):
        ref, _ = cli_images
        assert main(["metrics", ref, ref]) == EXIT_OK
        out = capsys.readouterr().out
        assert "cc=1.000000" in out

    def test_diff_writes_difference(self, cli_images, tmp_path):
        ref, mov = cli_images
        assert main(["diff", ref, mov, "--out", str(tmp_path)]) == EXIT_OK
        d = imageio.load_image(str(tmp_path / "difference.pgm"))
        assert d.pixels.shape == (48, 48)

    def test_config_file_merging(self, cli_images, tmp_path):
        ref, mov = cli_images
        cfg = tmp_path / "cfg"
        cfg.write_text("t-range=-3:3\ns-range=-3:3\ntheta-range=0:0\nbackend=walsh3\n")
        out = tmp_path / "out"
        assert main(["register", ref, mov, "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        assert (out / "report.csv").exists()

    def test_unknown_config_key(self, cli_images, tmp_path):
        ref, mov = cli_images
        cfg = tmp_path / "cfg"
        cfg.write_text("warp_speed=9\n")
        assert main(["register", ref, mov, "--config", str(cfg)]) == EXIT_PARAMETER

    def test_benchmark_csv_schema(self, cli_images, tmp_path, capsys):
        ref, _ = cli_images
        triples = tmp_path / "triples.txt"
        triples.write_text("2 -1 0\n0 0 0\n")
        out = tmp_path / "bench"
        code = main([
            "benchmark", ref, "--perturbations", str(triples), "--out", str(out),
            "--t-range=-3:3", "--s-range=-3:3", "--theta-range=0:0",
        ])
        assert code == EXIT_OK
        with open(out / "benchmark.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == BENCH_HEADER
        assert len(rows) == 1 + 2 * 2  # two triples x two backends
        backends = {r[BENCH_HEADER.index("backend")] for r in rows[1:]}
        assert backends == {"walsh3", "fwht4"}
        with open(out / "benchmark_summary.csv") as fh:
            srows = list(csv.reader(fh))
        assert "encoding_speedup_fast_over_naive" in srows[0]
        assert "time_ratio_walsh3_over_fwht4" in srows[0]
