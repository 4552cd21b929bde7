"""Complex dense linear algebra and the exact entanglement oracle.

Everything downstream (state generation, dataset labeling, experiment
validation) trusts this module for ground truth: partial transposition,
trace norm, negativity, purity and numerical rank of density matrices.
Matrices are plain ``numpy.ndarray`` of complex128; the small wrapper
types below only add physical invariants (Hermiticity, unit trace,
positivity, normalization) and the qubit count.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Global numerical tolerances.  Density-matrix invariants are dominated by
# double-precision accumulation at the 4x4 / 8x8 sizes used here.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
# Symmetry tolerance accepted by the eigensolver (looser: callers may pass
# matrices assembled from many floating-point terms).
EIG_HERMITICITY_TOL = 1e-8
# Cyclic Jacobi convergence: off-diagonal Frobenius norm target and sweep cap.
JACOBI_OFFDIAG_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class NotHermitian(ValueError):
    """Matrix handed to the Hermitian eigensolver is not Hermitian."""


class NoConvergence(RuntimeError):
    """Eigensolver hit its iteration cap before reaching tolerance."""


class DimensionMismatch(ValueError):
    """Subsystem dimensions are inconsistent with the matrix size."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector of an N-qubit system.

    ``vec`` holds the 2^N computational-basis amplitudes; qubit 0 is the
    most significant bit of the basis index.
    """

    vec: np.ndarray
    num_qubits: int

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=complex).reshape(-1)
        object.__setattr__(self, "vec", v)
        if v.shape[0] != 2 ** self.num_qubits:
            raise DimensionMismatch(
                f"state vector length {v.shape[0]} != 2^{self.num_qubits}"
            )

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def validate(self, tol: float = HERMITICITY_TOL) -> "PureState":
        if not np.all(np.isfinite(self.vec.view(float))):
            raise ValueError("state vector has non-finite entries")
        nrm2 = float(np.vdot(self.vec, self.vec).real)
        if abs(nrm2 - 1.0) > tol:
            raise ValueError(f"squared norm {nrm2!r} deviates from 1 beyond {tol}")
        return self

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.num_qubits)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density operator of an N-qubit system (2^N x 2^N complex matrix)."""

    mat: np.ndarray
    num_qubits: int

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", m)
        d = 2 ** self.num_qubits
        if m.shape != (d, d):
            raise DimensionMismatch(f"matrix shape {m.shape} != ({d}, {d})")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def validate(self) -> "DensityMatrix":
        """Check Hermiticity, unit trace and positivity; raise ValueError."""
        m = self.mat
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("density matrix has non-finite entries")
        herm_err = float(np.max(np.abs(m - m.conj().T)))
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"Hermiticity violated by {herm_err:g}")
        tr_err = abs(complex(np.trace(m)) - 1.0)
        if tr_err > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {tr_err:g}")
        lo = float(hermitian_eigenvalues(m)[-1])
        if lo < -PSD_TOL:
            raise ValueError(f"negative eigenvalue {lo:g}")
        return self


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker (tensor) product of two matrices."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of factors, left to right."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def _embed_real_symmetric(h: np.ndarray) -> np.ndarray:
    # Hermitian H -> real symmetric [[Re H, -Im H], [Im H, Re H]];
    # its spectrum is that of H with every eigenvalue duplicated.
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def jacobi_eigenvalues(h: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Works on the 2n x 2n real symmetric embedding of the complex input;
    the doubled spectrum is deduplicated by taking every second value
    after sorting.  Kept alongside the LAPACK path as an independent,
    dependency-free reference solver.

    Returns eigenvalues in descending order.  Raises NotHermitian or
    NoConvergence.
    """
    a = _check_hermitian(h)
    a = _embed_real_symmetric(a)
    m = a.shape[0]
    for _ in range(JACOBI_MAX_SWEEPS):
        od = a.copy()
        np.fill_diagonal(od, 0.0)
        off = float(np.linalg.norm(od))
        if off <= JACOBI_OFFDIAG_TOL:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[p, q] = a[q, p] = 0.0
    else:
        raise NoConvergence(
            f"off-diagonal norm {off:g} after {JACOBI_MAX_SWEEPS} sweeps"
        )
    eigs = np.sort(np.diag(a))[::-1]
    return np.ascontiguousarray(eigs[::2])


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    err = float(np.max(np.abs(h - h.conj().T)))
    if err > EIG_HERMITICITY_TOL:
        raise NotHermitian(f"max |H - H^dag| = {err:g} exceeds {EIG_HERMITICITY_TOL}")
    return 0.5 * (h + h.conj().T)


def hermitian_eigenvalues(h: np.ndarray, method: str = "lapack") -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, descending.

    ``method`` selects the backend: "lapack" (default, numpy.linalg.eigvalsh)
    or "jacobi" (the cyclic Jacobi reference above).  Both honour the same
    contract: NotHermitian if the symmetry tolerance is violated,
    NoConvergence if the iteration cap is reached.
    """
    if method == "jacobi":
        return jacobi_eigenvalues(h)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver method {method!r}")
    a = _check_hermitian(h)
    try:
        eigs = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return eigs[::-1].copy()


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    if isinstance(rho, PureState):
        return rho.to_density().mat
    return np.asarray(rho, dtype=complex)


def partial_transpose(rho, subsystem: int, dims=None) -> np.ndarray:
    """Transpose one tensor factor of a density matrix.

    ``dims`` lists the subsystem dimensions (defaults to qubits inferred
    from the matrix size); ``subsystem`` is the 0-based factor index.
    Trace-preserving and an involution on the same subsystem.
    """
    m = _as_matrix(rho)
    n = m.shape[0]
    if dims is None:
        nq = int(round(np.log2(n)))
        if 2**nq != n:
            raise DimensionMismatch(f"cannot infer qubit dims for size {n}")
        dims = [2] * nq
    dims = list(dims)
    if int(np.prod(dims)) != n:
        raise DimensionMismatch(f"prod(dims)={np.prod(dims)} != matrix size {n}")
    if not 0 <= subsystem < len(dims):
        raise DimensionMismatch(f"subsystem {subsystem} out of range for {dims}")
    k = len(dims)
    t = m.reshape(dims + dims)
    # Swap the row and column index of the chosen factor only.
    t = np.swapaxes(t, subsystem, k + subsystem)
    return np.ascontiguousarray(t.reshape(n, n))


def trace_norm(a: np.ndarray, method: str = "lapack") -> float:
    """Trace norm (sum of singular values) of a square matrix.

    Hermitian inputs use the eigenvalue route (sum of |eigenvalues|);
    anything else falls back to singular values.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if float(np.max(np.abs(m - m.conj().T))) <= EIG_HERMITICITY_TOL:
        return float(np.sum(np.abs(hermitian_eigenvalues(m, method=method))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def negativity(rho, subsystem: int = 0, dims=None, method: str = "lapack") -> float:
    """Entanglement negativity across the ``subsystem``-vs-rest bipartition.

    (||rho^{T_k}|| - 1) / 2, clipped at zero: PPT states give exactly 0,
    maximally entangled two-qubit states give 0.5.
    """
    pt = partial_transpose(rho, subsystem, dims)
    return max(0.0, 0.5 * (trace_norm(pt, method=method) - 1.0))


def negativity_per_qubit(rho, num_qubits: int, method: str = "lapack") -> np.ndarray:
    """Negativity of every single-qubit-vs-rest bipartition."""
    dims = [2] * num_qubits
    return np.array(
        [negativity(rho, k, dims, method=method) for k in range(num_qubits)]
    )


def purity(rho) -> float:
    """Tr(rho^2); 1 for pure states, 1/2^N for maximally mixed."""
    m = _as_matrix(rho)
    return float(np.trace(m @ m).real)


def numerical_rank(rho, tol: float = 1e-10) -> int:
    """Number of eigenvalues above ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    eigs = hermitian_eigenvalues(_as_matrix(rho))
    return int(np.sum(eigs > tol))
