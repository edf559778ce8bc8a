import numpy as np
import pytest

from bandfec.cli import main
from bandfec.codec import read_symbols, write_symbols
from bandfec.qc import load_code


def run(argv):
    return main([str(a) for a in argv])


class TestGen:
    def test_writes_code_file(self, tmp_path, capsys):
        path = tmp_path / "code.txt"
        assert run(["gen", "--ensemble", "band", "--k", "240", "--seed", "3",
                    "--out", path]) == 0
        out = capsys.readouterr().out
        assert "z=24" in out and "n=360" in out and "k=240" in out
        code = load_code(path)
        assert code.k == 240 and code.n == 360

    def test_rate_consistency_check(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["gen", "--k", "240", "--rate", "0.5", "--out", tmp_path / "c.txt"])
        assert exc.value.code == 2

    def test_indivisible_k(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["gen", "--k", "241", "--out", tmp_path / "c.txt"])
        assert exc.value.code == 2


class TestEncodeDecode:
    @pytest.fixture
    def code_file(self, tmp_path):
        path = tmp_path / "code.txt"
        run(["gen", "--ensemble", "band", "--k", "240", "--seed", "1", "--out", path])
        return path

    def test_lossless_roundtrip(self, tmp_path, code_file):
        payload = bytes(range(256)) * 3
        (tmp_path / "in.bin").write_bytes(payload)
        assert run(["encode", "--code", code_file, "--in", tmp_path / "in.bin",
                    "--out", tmp_path / "syms.bin", "--symbol-size", "16"]) == 0
        assert run(["decode", "--code", code_file, "--in", tmp_path / "syms.bin",
                    "--out", tmp_path / "out.bin"]) == 0
        out = (tmp_path / "out.bin").read_bytes()
        assert out[:len(payload)] == payload
        assert out == payload + b"\x00" * (240 * 16 - len(payload))

    def test_erasure_recovery(self, tmp_path, code_file, capsys):
        payload = b"hello " * 100
        (tmp_path / "in.bin").write_bytes(payload)
        run(["encode", "--code", code_file, "--in", tmp_path / "in.bin",
             "--out", tmp_path / "syms.bin", "--symbol-size", "8"])
        n, k, L, present = read_symbols(tmp_path / "syms.bin")
        rng = np.random.default_rng(0)
        for j in rng.choice(n, size=int(0.3 * n), replace=False):
            del present[int(j)]
        write_symbols(tmp_path / "lossy.bin", n, k, L, present)
        assert run(["decode", "--code", code_file, "--in", tmp_path / "lossy.bin",
                    "--out", tmp_path / "out.bin"]) == 0
        assert "status=success" in capsys.readouterr().out
        assert (tmp_path / "out.bin").read_bytes()[:len(payload)] == payload

    def test_it_only_stall_exits_3(self, tmp_path, code_file):
        (tmp_path / "in.bin").write_bytes(b"x" * 100)
        run(["encode", "--code", code_file, "--in", tmp_path / "in.bin",
             "--out", tmp_path / "syms.bin", "--symbol-size", "4"])
        n, k, L, present = read_symbols(tmp_path / "syms.bin")
        rng = np.random.default_rng(1)
        for j in rng.choice(n, size=int(0.3 * n), replace=False):
            del present[int(j)]
        write_symbols(tmp_path / "lossy.bin", n, k, L, present)
        assert run(["decode", "--code", code_file, "--in", tmp_path / "lossy.bin",
                    "--out", tmp_path / "out.bin", "--it-only"]) == 3

    def test_unrecoverable_exits_4(self, tmp_path, code_file):
        (tmp_path / "in.bin").write_bytes(b"y" * 50)
        run(["encode", "--code", code_file, "--in", tmp_path / "in.bin",
             "--out", tmp_path / "syms.bin", "--symbol-size", "4"])
        n, k, L, present = read_symbols(tmp_path / "syms.bin")
        rng = np.random.default_rng(2)
        for j in rng.choice(n, size=n // 2, replace=False):  # beyond redundancy
            del present[int(j)]
        write_symbols(tmp_path / "lossy.bin", n, k, L, present)
        assert run(["decode", "--code", code_file, "--in", tmp_path / "lossy.bin",
                    "--out", tmp_path / "out.bin"]) == 4

    def test_payload_too_large(self, tmp_path, code_file):
        (tmp_path / "in.bin").write_bytes(b"z" * (240 * 4 + 1))
        with pytest.raises(SystemExit) as exc:
            run(["encode", "--code", code_file, "--in", tmp_path / "in.bin",
                 "--out", tmp_path / "syms.bin", "--symbol-size", "4"])
        assert exc.value.code == 2


class TestSim:
    def test_bler_stdout(self, capsys):
        assert run(["sim", "bler", "--ensemble", "band", "--k", "240",
                    "--losses", "0:50:50", "--trials", "4", "--seed", "2"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "experiment,ensemble,k,rate,x,mean,stderr,trials,master_seed"
        assert len(lines) == 3
        assert lines[1].startswith("bler,band,240,")

    def test_ineff_csv_file(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert run(["sim", "ineff", "--ensemble", "unconstrained",
                    "--ks", "240,480", "--trials", "3", "--seed", "5",
                    "--out", out]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 7  # header + 3 curves x 2 points
        assert {l.split(",")[0] for l in lines[1:]} == \
            {"ineff_it", "ineff_ml", "ineff_failures"}

    def test_ops_k_prints_slope(self, capsys):
        assert run(["sim", "ops-k", "--ensemble", "band", "--ks", "240,480",
                    "--trials", "3", "--seed", "6"]) == 0
        assert "loglog_slope=" in capsys.readouterr().out

    def test_rerun_byte_identical(self, tmp_path):
        outs = []
        for name in ("x.csv", "y.csv"):
            run(["sim", "ops-loss", "--ensemble", "band", "--k", "240",
                 "--losses", "10:30:10", "--trials", "3", "--seed", "8",
                 "--out", tmp_path / name])
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]

    def test_constant_band_alias(self, capsys):
        assert run(["sim", "bler", "--ensemble", "constant-band", "--k", "2000",
                    "--m0", "10", "--loss", "0", "--trials", "2", "--seed", "1"]) == 0
        assert ",constant_band," in capsys.readouterr().out
