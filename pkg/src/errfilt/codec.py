"""Encoder/decoder constructions and validation of their noise optimality.

A codec encodes S_tot source channels into T_tot transmission channels
(encoder: a T_tot x S_tot isometry) and decodes with a T_tot x T_tot unitary
arranged so the useful receiver channels are always 1..S_tot; everything else
is a discard port.  Index origin is 1 and the discrete-Fourier phase
conventions are fixed so the standard output state is reproducible
term by term.

A codec is *faithful* when, absent noise, every source channel arrives
exactly at its receiver channel.  For a faithful codec the noise reaching a
useful port is at least |beta|^2/T (Cauchy-Schwarz); equality holds exactly
when all products <j|U_e|i><i|U_d|j> over the support have magnitude 1/T,
which both the Fourier and the Hadamard constructions achieve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalCheckError
from .hilbert import ATOL, DenseOperator

_KINDS = ("fourier", "hadamard", "collective-fourier", "custom")


@dataclass(frozen=True, eq=False)
class Codec:
    """Encoder/decoder pair with useful receiver channels 1..s_tot."""

    kind: str
    encoder: np.ndarray  # (t_tot, s_tot) isometry
    decoder: np.ndarray  # (t_tot, t_tot) unitary

    def __post_init__(self):
        object.__setattr__(self, "encoder", np.asarray(self.encoder, dtype=complex))
        object.__setattr__(self, "decoder", np.asarray(self.decoder, dtype=complex))
        if self.kind not in _KINDS:
            raise ValueError(f"unknown codec kind {self.kind!r}")
        if self.encoder.shape[0] != self.decoder.shape[0]:
            raise ValueError("encoder and decoder transmission dims differ")
        if not DenseOperator(self.encoder).is_isometry():
            raise NumericalCheckError("encoder is not an isometry")
        if not DenseOperator(self.decoder).is_unitary():
            raise NumericalCheckError("decoder is not unitary")

    @property
    def s_tot(self) -> int:
        return self.encoder.shape[1]

    @property
    def t_tot(self) -> int:
        return self.encoder.shape[0]

    @property
    def multiplexing(self) -> int:
        """Transmission channels per source channel (block constructions)."""
        return self.t_tot // self.s_tot

    def extraction(self) -> np.ndarray:
        """Co-isometry keeping the useful receiver channels 1..s_tot."""
        return np.eye(self.t_tot, dtype=complex)[: self.s_tot]


@dataclass(frozen=True)
class CodecReport:
    faithful: bool
    optimal: bool
    reduction_factor: float
    per_channel: tuple[float, ...]


def fourier_codec(t: int, sources: int = 1) -> Codec:
    """Multiplex each of ``sources`` channels into ``t`` lines via the DFT.

    Encoding sends a source channel to the uniform superposition of its block;
    decoding applies the inverse DFT per block, then relabels receivers so the
    useful ports come first.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    return _block_codec("fourier", _inverse_dft(t), t, sources)


def hadamard_codec(t: int, sources: int = 1) -> Codec:
    """Hadamard-transform variant of :func:`fourier_codec`; t must be 2^k."""
    if t < 1 or t & (t - 1):
        raise ValueError("t must be a power of 2")
    return _block_codec("hadamard", hadamard_matrix(t) / np.sqrt(t), t, sources)


def collective_fourier_codec(s_tot: int, t_tot: int) -> Codec:
    """Encode all source channels jointly into t_tot transmission channels.

    Useful when s_tot does not divide t_tot; every transmission channel
    carries amplitude from every source channel.
    """
    if not 1 <= s_tot <= t_tot:
        raise ValueError("need 1 <= s_tot <= t_tot")
    k = np.arange(1, t_tot + 1)
    enc = np.exp(-2j * np.pi * np.outer(k, np.arange(s_tot)) / t_tot) / np.sqrt(t_tot)
    dec = np.exp(+2j * np.pi * np.outer(np.arange(t_tot), k) / t_tot) / np.sqrt(t_tot)
    return Codec("collective-fourier", enc, dec)


def hadamard_matrix(t: int) -> np.ndarray:
    """Symmetric +-1 Hadamard matrix whose rows follow the block sign pattern
    (+ + + +), (+ + - -), (+ - + -), (+ - - +) at t = 4."""
    if t < 1 or t & (t - 1):
        raise ValueError("t must be a power of 2")
    h = np.array([[1.0]])
    while h.shape[0] < t:
        h = np.block([[h, h], [h, -h]])
    bits = t.bit_length() - 1
    perm = [int(format(i, f"0{bits}b")[::-1], 2) if bits else 0 for i in range(t)]
    return h[perm]


def _inverse_dft(t: int) -> np.ndarray:
    """Decoder block: <k|D|j> = exp(2 pi i j (k-1) / t) / sqrt(t), 1-based."""
    j = np.arange(1, t + 1)
    k = np.arange(t)
    return np.exp(2j * np.pi * np.outer(k, j) / t) / np.sqrt(t)


def _block_codec(kind: str, block_decoder: np.ndarray, t: int, sources: int) -> Codec:
    if sources < 1:
        raise ValueError("sources must be at least 1")
    t_tot = t * sources
    enc = np.zeros((t_tot, sources), dtype=complex)
    for i in range(sources):
        enc[i * t:(i + 1) * t, i] = 1.0 / np.sqrt(t)
    dec = np.zeros((t_tot, t_tot), dtype=complex)
    for i in range(sources):
        dec[i * t:(i + 1) * t, i * t:(i + 1) * t] = block_decoder
    # useful rows (one per block) move to the front
    useful = [i * t for i in range(sources)]
    rest = [r for r in range(t_tot) if r not in useful]
    return Codec(kind, enc, dec[useful + rest])


def validate_codec(codec: Codec, atol: float = ATOL) -> CodecReport:
    """Check faithfulness and the equal-magnitude noise-optimality condition.

    ``reduction_factor`` is the worst-case sum over transmission channels of
    |<j|U_e|i><i|U_d|j>|^2; it equals 1/T at the optimum and lower-bounds the
    fraction of noise passed into a useful port.
    """
    s, t = codec.s_tot, codec.t_tot
    composite = codec.decoder @ codec.encoder
    target = np.eye(t, dtype=complex)[:, :s]
    faithful = bool(np.max(np.abs(composite - target)) <= atol)
    factors = []
    optimal = faithful
    for i in range(s):
        x = codec.encoder[:, i] * codec.decoder[i, :]
        mags = np.abs(x)
        support = mags > atol
        count = int(support.sum())
        factors.append(float(np.sum(mags**2)))
        if count == 0 or np.max(np.abs(mags[support] - 1.0 / count)) > atol:
            optimal = False
    return CodecReport(faithful=faithful, optimal=optimal,
                       reduction_factor=max(factors), per_channel=tuple(factors))


def load_codec(path, force: bool = False) -> Codec:
    """Read a custom codec from plain text.

    Format: header line ``codec <S_tot> <T_tot>``, then T_tot rows of the
    encoder followed by T_tot rows of the decoder, each row whitespace-
    separated ``re im`` pairs (S_tot pairs per encoder row, T_tot per decoder
    row).  Unfaithful codecs are refused unless ``force`` is set.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("codec"):
        raise ValueError("missing 'codec <S_tot> <T_tot>' header")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError("malformed codec header")
    s_tot, t_tot = int(head[1]), int(head[2])
    body = lines[1:]
    if len(body) != 2 * t_tot:
        raise ValueError(f"expected {2 * t_tot} matrix rows, found {len(body)}")

    def parse_row(line: str, cols: int) -> np.ndarray:
        vals = [float(v) for v in line.split()]
        if len(vals) != 2 * cols:
            raise ValueError(f"row has {len(vals)} numbers, expected {2 * cols}")
        arr = np.array(vals).reshape(cols, 2)
        return arr[:, 0] + 1j * arr[:, 1]

    enc = np.array([parse_row(ln, s_tot) for ln in body[:t_tot]])
    dec = np.array([parse_row(ln, t_tot) for ln in body[t_tot:]])
    codec = Codec("custom", enc, dec)
    report = validate_codec(codec)
    if not report.faithful and not force:
        raise NumericalCheckError(
            "custom codec is not faithful; pass force=True to use it anyway")
    return codec
