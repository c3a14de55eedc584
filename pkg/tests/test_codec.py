"""Codec constructions, validation and the custom-codec file format."""

import math

import numpy as np
import pytest

from errfilt.codec import (Codec, collective_fourier_codec, fourier_codec,
                           hadamard_codec, hadamard_matrix, load_codec,
                           validate_codec)
from errfilt.errors import NumericalCheckError

HADAMARD_4 = np.array([
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
])


class TestFourier:
    def test_t1_is_identity(self):
        codec = fourier_codec(1)
        assert np.allclose(codec.encoder, [[1.0]])
        assert np.allclose(codec.decoder, [[1.0]])

    def test_t2_beamsplitter_pair(self):
        codec = fourier_codec(2)
        assert np.allclose(codec.encoder[:, 0], [1 / math.sqrt(2)] * 2)
        # U_d U_e |1> = |1>, worked by hand for the 2x2 pair
        assert np.allclose(codec.decoder @ codec.encoder, [[1.0], [0.0]])

    def test_t4_product_magnitudes(self):
        codec = fourier_codec(4)
        products = codec.encoder[:, 0] * codec.decoder[0, :]
        assert np.allclose(np.abs(products), 0.25)

    def test_blocks_are_faithful(self):
        codec = fourier_codec(3, sources=4)
        report = validate_codec(codec)
        assert report.faithful and report.optimal
        assert report.reduction_factor == pytest.approx(1 / 3, abs=1e-14)


class TestHadamard:
    def test_displayed_sign_pattern(self):
        assert np.array_equal(hadamard_matrix(4), HADAMARD_4)

    def test_t2_rows(self):
        codec = hadamard_codec(2)
        assert np.allclose(codec.decoder * math.sqrt(2),
                           [[1, 1], [1, -1]])

    def test_t8_satisfies_equal_product_condition(self):
        report = validate_codec(hadamard_codec(8))
        assert report.faithful and report.optimal
        assert report.reduction_factor == pytest.approx(1 / 8, abs=1e-14)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            hadamard_codec(3)


class TestCollective:
    def test_two_into_three(self):
        codec = collective_fourier_codec(2, 3)
        report = validate_codec(codec)
        assert report.faithful
        # every transmission channel carries every source channel
        assert np.all(np.abs(codec.encoder) > 0.1)

    def test_square_case_is_unitary_and_faithful(self):
        codec = collective_fourier_codec(3, 3)
        assert validate_codec(codec).faithful
        gram = codec.encoder.conj().T @ codec.encoder
        assert np.allclose(gram, np.eye(3), atol=1e-12)


class TestValidation:
    def test_trivial_identity_codec(self):
        codec = Codec("custom", np.eye(1), np.eye(1))
        report = validate_codec(codec)
        assert report.faithful and report.optimal
        assert report.reduction_factor == pytest.approx(1.0)

    def test_noise_floor_for_random_faithful_codecs(self):
        # any faithful codec passes at least 1/T of the noise (Schwarz)
        rng = np.random.default_rng(11)
        for _ in range(50):
            t = int(rng.integers(2, 9))
            raw = rng.normal(size=(t, t)) + 1j * rng.normal(size=(t, t))
            q, r = np.linalg.qr(raw)
            u_d = q * (np.diag(r) / np.abs(np.diag(r)))
            u_e = u_d.conj().T[:, :1]
            codec = Codec("custom", u_e, u_d)
            report = validate_codec(codec)
            assert report.faithful
            assert report.reduction_factor >= 1.0 / t - 1e-12

    def test_rejects_non_isometric_encoder(self):
        with pytest.raises(NumericalCheckError):
            Codec("custom", np.array([[0.5], [0.5]]), np.eye(2))


class TestFileFormat:
    def write_codec(self, path, codec):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"codec {codec.s_tot} {codec.t_tot}\n")
            for mat in (codec.encoder, codec.decoder):
                for row in mat:
                    cells = " ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row)
                    fh.write(cells + "\n")

    def test_round_trip(self, tmp_path):
        codec = fourier_codec(4, sources=2)
        path = tmp_path / "codec.txt"
        self.write_codec(path, codec)
        loaded = load_codec(path)
        assert np.allclose(loaded.encoder, codec.encoder, atol=1e-15)
        assert np.allclose(loaded.decoder, codec.decoder, atol=1e-15)
        assert validate_codec(loaded).faithful

    def test_refuses_unfaithful_codec(self, tmp_path):
        # decoder deliberately mismatched to the encoder
        bad = Codec("custom", fourier_codec(2).encoder,
                    np.array([[0, 1], [1, 0]], dtype=complex))
        path = tmp_path / "bad.txt"
        self.write_codec(path, bad)
        with pytest.raises(NumericalCheckError):
            load_codec(path)
        forced = load_codec(path, force=True)
        assert not validate_codec(forced).faithful

    def test_header_errors(self, tmp_path):
        path = tmp_path / "broken.txt"
        path.write_text("codec 2\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_codec(path)
