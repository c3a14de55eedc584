"""Dense complex linear algebra over small labeled tensor-product spaces.

States live on a product of factors: one or more *system* axes carrying
channel indices, followed by *environment* registers appended one per noise
segment.  Register outcome 0 means "undisturbed"; outcome j records an error
on channel j.  Everything is stored densely as complex128; the spaces in
scope stay well below :data:`DIM_CAP`.

All values are immutable after construction and all operations are pure
functions, so they are safe to use concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, NumericalCheckError

#: Default cap on the composite dimension of any constructed tensor.
DIM_CAP = 2**20

#: Absolute tolerance for unitarity / hermiticity / normalization checks.
ATOL = 1e-12

#: Eigenvalues of a density matrix may undershoot zero by at most this much.
EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class EnvRegister:
    """One environment register, created by a single noise segment."""

    segment: str
    dim: int


@dataclass(frozen=True)
class BasisLabel:
    """Label of one basis vector: channel indices plus register outcomes.

    ``channels`` holds one 1-based index per system axis.  ``env`` holds
    ``(segment, outcome)`` pairs in the same order as the state's registers.
    """

    channels: tuple[int, ...]
    env: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if len({seg for seg, _ in self.env}) != len(self.env):
            raise ValueError("duplicate segment id in basis label")


class DenseOperator:
    """Thin wrapper around a dense complex matrix with validation helpers."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2:
            raise ValueError("operator must be a 2-d matrix")
        self.mat = mat

    @property
    def rows(self) -> int:
        return self.mat.shape[0]

    @property
    def cols(self) -> int:
        return self.mat.shape[1]

    @classmethod
    def identity(cls, n: int) -> "DenseOperator":
        return cls(np.eye(n, dtype=complex))

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.mat.conj().T)

    def __matmul__(self, other):
        return DenseOperator(self.mat @ _as_matrix(other))

    def is_isometry(self, atol: float = ATOL) -> bool:
        """True when O†O equals the identity on the domain within ``atol``."""
        gram = self.mat.conj().T @ self.mat
        return bool(np.max(np.abs(gram - np.eye(self.cols))) <= atol)

    def is_unitary(self, atol: float = ATOL) -> bool:
        return self.rows == self.cols and self.is_isometry(atol)

    def is_projector(self, atol: float = ATOL) -> bool:
        """True when the matrix is idempotent within ``atol``."""
        if self.rows != self.cols:
            return False
        return bool(np.max(np.abs(self.mat @ self.mat - self.mat)) <= atol)


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, DenseOperator):
        return op.mat
    mat = np.asarray(op, dtype=complex)
    if mat.ndim != 2:
        raise ValueError("operator must be a 2-d matrix")
    return mat


class LabeledState:
    """Complex amplitude tensor over labeled system and environment axes.

    The first ``system_axes`` axes of ``amps`` are system factors (channel
    indices); the remaining axes are environment registers in the order they
    were appended.  Sub-normalized states are allowed (post-selection shrinks
    the norm) but the squared norm may never exceed 1 + tolerance.
    """

    __slots__ = ("amps", "system_axes", "env")

    def __init__(self, amps, system_axes: int = 1, env: tuple[EnvRegister, ...] = (),
                 dim_cap: int | None = None):
        amps = np.asarray(amps, dtype=complex)
        env = tuple(env)
        if amps.ndim != system_axes + len(env):
            raise ValueError(
                f"amplitude tensor has {amps.ndim} axes, expected "
                f"{system_axes} system + {len(env)} environment")
        for reg, size in zip(env, amps.shape[system_axes:]):
            if reg.dim != size:
                raise ValueError(f"register {reg.segment!r} dim mismatch")
        cap = DIM_CAP if dim_cap is None else dim_cap
        if amps.size > cap:
            raise DimensionCapError(
                f"composite dimension {amps.size} exceeds cap {cap}")
        n2 = float(np.vdot(amps, amps).real)
        if n2 > 1.0 + 1e-9:
            raise NumericalCheckError(f"squared norm {n2} exceeds 1")
        self.amps = amps
        self.system_axes = system_axes
        self.env = env

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_amplitudes(cls, vec) -> "LabeledState":
        """State over a single system axis with no environment."""
        return cls(np.asarray(vec, dtype=complex), system_axes=1)

    @classmethod
    def basis(cls, system_shape, channels, env: tuple[EnvRegister, ...] = ()
              ) -> "LabeledState":
        """Basis state at 1-based ``channels`` with all registers at outcome 0."""
        if isinstance(channels, int):
            channels = (channels,)
        system_shape = tuple(system_shape)
        if len(channels) != len(system_shape):
            raise ValueError("one channel index per system axis required")
        shape = system_shape + tuple(r.dim for r in env)
        amps = np.zeros(shape, dtype=complex)
        idx = tuple(c - 1 for c in channels) + (0,) * len(env)
        amps[idx] = 1.0
        return cls(amps, system_axes=len(system_shape), env=env)

    # -- accessors ---------------------------------------------------------

    @property
    def system_shape(self) -> tuple[int, ...]:
        return self.amps.shape[:self.system_axes]

    @property
    def system_dim(self) -> int:
        return int(math.prod(self.system_shape))

    @property
    def dim(self) -> int:
        return int(self.amps.size)

    def amplitude(self, label: BasisLabel) -> complex:
        """Amplitude at a single labeled basis vector."""
        if len(label.channels) != self.system_axes:
            raise ValueError("label has wrong number of channel indices")
        if len(label.env) != len(self.env):
            raise ValueError("label must name every environment register")
        idx = []
        for c, d in zip(label.channels, self.system_shape):
            if not 1 <= c <= d:
                raise ValueError(f"channel index {c} outside 1..{d}")
            idx.append(c - 1)
        for (seg, out), reg in zip(label.env, self.env):
            if seg != reg.segment:
                raise ValueError(f"register order mismatch at {seg!r}")
            if not 0 <= out < reg.dim:
                raise ValueError(f"outcome {out} outside register {seg!r}")
            idx.append(out)
        return complex(self.amps[tuple(idx)])

    def norm2(self) -> float:
        """Total squared norm."""
        return float(np.vdot(self.amps, self.amps).real)

    def no_error_component(self) -> np.ndarray:
        """System-shaped amplitudes with every register at outcome 0."""
        idx = (slice(None),) * self.system_axes + (0,) * len(self.env)
        return np.array(self.amps[idx])

    def no_error_norm2(self) -> float:
        comp = self.no_error_component()
        return float(np.vdot(comp, comp).real)

    def normalized(self) -> "LabeledState":
        n2 = self.norm2()
        if n2 <= 0.0:
            raise ValueError("cannot normalize a zero state")
        return LabeledState(self.amps / math.sqrt(n2), self.system_axes, self.env)


class DensityMatrix:
    """Dense Hermitian, positive-semidefinite matrix with trace at most one."""

    __slots__ = ("mat", "dim")

    def __init__(self, mat, *, check: bool = True):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        if check:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev > ATOL:
                raise NumericalCheckError(f"hermiticity violated by {dev:.3e}")
            eigs = np.linalg.eigvalsh(mat)
            if eigs.min() < EIG_FLOOR:
                raise NumericalCheckError(
                    f"negative eigenvalue {eigs.min():.3e} below floor")
            tr = mat.trace()
            if tr.real > 1.0 + ATOL or abs(tr.imag) > ATOL:
                raise NumericalCheckError(f"trace {tr} exceeds 1")
        self.mat = mat
        self.dim = mat.shape[0]

    def trace(self) -> float:
        return float(self.mat.trace().real)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues sorted ascending, with tiny negatives clipped to zero."""
        return np.clip(np.linalg.eigvalsh(self.mat), 0.0, None)


# -- operations -------------------------------------------------------------


def tensor(a, b, dim_cap: int | None = None):
    """Kronecker composite of two states or two operators.

    For states the result keeps all system axes first (a's then b's) followed
    by the environment registers of ``a`` then ``b``; segment ids must be
    disjoint.  For operators this is the plain Kronecker product.
    """
    if isinstance(a, LabeledState) and isinstance(b, LabeledState):
        if {r.segment for r in a.env} & {r.segment for r in b.env}:
            raise ValueError("environment segment ids must be disjoint")
        cap = DIM_CAP if dim_cap is None else dim_cap
        if a.amps.size * b.amps.size > cap:
            raise DimensionCapError(
                f"composite dimension {a.amps.size * b.amps.size} exceeds cap {cap}")
        outer = np.multiply.outer(a.amps, b.amps)
        # outer axes: a_sys, a_env, b_sys, b_env -> group system axes first
        na, nb = a.amps.ndim, b.amps.ndim
        perm = (list(range(a.system_axes))
                + [na + i for i in range(b.system_axes)]
                + [a.system_axes + i for i in range(len(a.env))]
                + [na + b.system_axes + i for i in range(len(b.env))])
        return LabeledState(outer.transpose(perm),
                            system_axes=a.system_axes + b.system_axes,
                            env=a.env + b.env, dim_cap=cap)
    ma, mb = _as_matrix(a), _as_matrix(b)
    cap = DIM_CAP if dim_cap is None else dim_cap
    if ma.size * mb.size > cap * cap:
        raise DimensionCapError("operator Kronecker product exceeds cap")
    return DenseOperator(np.kron(ma, mb))


def apply_operator(state: LabeledState, op, axis: int = 0) -> LabeledState:
    """Apply a matrix to one system axis; the axis dimension may change."""
    mat = _as_matrix(op)
    if not 0 <= axis < state.system_axes:
        raise ValueError(f"axis {axis} is not a system axis")
    if mat.shape[1] != state.amps.shape[axis]:
        raise ValueError(
            f"operator acts on dim {mat.shape[1]}, axis has {state.amps.shape[axis]}")
    out = np.tensordot(mat, state.amps, axes=([1], [axis]))
    out = np.moveaxis(out, 0, axis)
    return LabeledState(out, system_axes=state.system_axes, env=state.env)


def partial_trace_env(state: LabeledState) -> DensityMatrix:
    """Trace out every environment register.

    Returns the reduced density matrix over the flattened system factors; its
    trace equals the squared norm of the input state.
    """
    d = state.system_dim
    flat = state.amps.reshape(d, -1)
    return DensityMatrix(flat @ flat.conj().T)


def fidelity(rho: DensityMatrix, target) -> float:
    """Overlap Tr(rho |psi><psi|) with a normalized pure target state."""
    if isinstance(target, LabeledState):
        if target.env:
            raise ValueError("target must be a pure system state (no registers)")
        vec = target.amps.reshape(-1)
    else:
        vec = np.asarray(target, dtype=complex).reshape(-1)
    n2 = float(np.vdot(vec, vec).real)
    if abs(n2 - 1.0) > 1e-10:
        raise ValueError(f"target state is not normalized (norm^2 = {n2})")
    if vec.size != rho.dim:
        raise ValueError("dimension mismatch between state and density matrix")
    val = float(np.vdot(vec, rho.mat @ vec).real)
    return min(max(val, 0.0), 1.0)


def project(state: LabeledState, projector) -> tuple[LabeledState, float]:
    """Apply an idempotent operator on the flattened system space.

    Returns the unnormalized projected state together with its squared norm
    (the post-selection success probability).
    """
    mat = _as_matrix(projector)
    if not DenseOperator(mat).is_projector():
        raise ValueError("operator is not idempotent within tolerance")
    d = state.system_dim
    if mat.shape != (d, d):
        raise ValueError("projector dimension does not match system")
    flat = state.amps.reshape(d, -1)
    out = (mat @ flat).reshape(state.amps.shape)
    projected = LabeledState(out, system_axes=state.system_axes, env=state.env)
    return projected, projected.norm2()


def keep_channels_projector(dim: int, channels) -> DenseOperator:
    """Diagonal projector keeping the given 1-based channels of a single axis."""
    diag = np.zeros(dim, dtype=complex)
    for c in channels:
        if not 1 <= c <= dim:
            raise ValueError(f"channel {c} outside 1..{dim}")
        diag[c - 1] = 1.0
    return DenseOperator(np.diag(diag))


def channel_extraction(dim: int, channels) -> DenseOperator:
    """Co-isometry mapping the kept 1-based channels onto a smaller axis."""
    channels = tuple(channels)
    rows = np.zeros((len(channels), dim), dtype=complex)
    for i, c in enumerate(channels):
        if not 1 <= c <= dim:
            raise ValueError(f"channel {c} outside 1..{dim}")
        rows[i, c - 1] = 1.0
    return DenseOperator(rows)
