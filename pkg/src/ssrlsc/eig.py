"""Symmetric and symmetric-definite generalized eigensolvers.

Everything here is in-repo: cyclic Jacobi for the standard problem and a
Cholesky reduction for the pencil ``A v = lambda B v``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .datamodel import SampleSet


class PencilError(np.linalg.LinAlgError):
    """The pencil denominator could not be factorized."""


def check_symmetric(m, name="matrix", rtol=1e-9) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    gap = np.abs(m - m.T)
    if np.any(gap > rtol * np.maximum(1.0, np.abs(m))):
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        raise ValueError(f"{name} is not symmetric: |m[{i},{j}] - m[{j},{i}]| = {gap[i, j]:.3g}")
    return m


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (first on ties) is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    if vectors.size == 0:
        return vectors
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(m, backend=None):
    """Eigen-decomposition of a symmetric matrix.

    Parameters
    ----------
    m : (n, n) array_like
        Symmetric up to a relative 1e-9 elementwise tolerance.
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to the compiled one when built.

    Returns
    -------
    eigenvalues : (n,) ndarray
        Descending.
    eigenvectors : (n, n) ndarray
        Orthonormal columns, signed so each column's largest-magnitude
        entry is positive.
    """
    m = check_symmetric(m)
    m = 0.5 * (m + m.T)
    w, v, _ = _backend.get(backend).jacobi_eigh(m)
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(v[:, order])


def cholesky(b) -> np.ndarray:
    """Lower-triangular ``L`` with ``b = L L^T``; raises :class:`PencilError`."""
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    low = np.zeros_like(b)
    for j in range(n):
        row = low[j, :j]
        d = b[j, j] - row @ row
        if not d > 0.0:
            raise PencilError(f"matrix not positive definite at pivot {j} (d = {d:.3g})")
        ljj = math.sqrt(d)
        low[j, j] = ljj
        low[j + 1 :, j] = (b[j + 1 :, j] - low[j + 1 :, :j] @ row) / ljj
    return low


def solve_lower(low, rhs) -> np.ndarray:
    """Forward substitution for ``low @ x = rhs``."""
    x = np.array(rhs, dtype=np.float64, copy=True)
    for i in range(low.shape[0]):
        x[i] = (x[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x


def solve_upper_t(low, rhs) -> np.ndarray:
    """Back substitution for ``low.T @ x = rhs``."""
    x = np.array(rhs, dtype=np.float64, copy=True)
    n = low.shape[0]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - low[i + 1 :, i] @ x[i + 1 :]) / low[i, i]
    return x


@dataclass(frozen=True)
class Projection:
    """Top generalized eigenvectors of a pencil, columns in descending order.

    ``jitter`` is the multiple of the identity that was added to the
    denominator before factorization; the basis is orthonormal with respect
    to that conditioned matrix.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    jitter: float = 0.0

    def __post_init__(self):
        basis = np.array(self.basis, dtype=np.float64, copy=True)
        if basis.ndim == 1:
            basis = basis[:, None]
        eig = np.array(self.eigenvalues, dtype=np.float64, copy=True).reshape(-1)
        if basis.shape[1] != eig.shape[0]:
            raise ValueError("one eigenvalue per basis column required")
        if not 1 <= basis.shape[1] <= basis.shape[0]:
            raise ValueError(f"output_dim must be in 1..{basis.shape[0]}, got {basis.shape[1]}")
        basis.setflags(write=False)
        eig.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def input_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def output_dim(self) -> int:
        return self.basis.shape[1]

    def truncate(self, d: int) -> "Projection":
        if not 1 <= d <= self.output_dim:
            raise ValueError(f"cannot truncate a {self.output_dim}-column projection to {d}")
        return Projection(self.basis[:, :d], self.eigenvalues[:d], self.jitter)


def solve_pencil(a, b, d, tau=1e-8, max_tau=1e-2, backend=None) -> Projection:
    """Top-``d`` solutions of ``a v = lambda b v`` for symmetric ``a`` and PSD ``b``.

    ``b`` is always shifted by ``tau * trace(b) / n`` before the Cholesky
    factorization; ``tau`` grows tenfold up to ``max_tau`` while the
    factorization fails.
    """
    a = check_symmetric(a, "numerator")
    b = check_symmetric(b, "denominator")
    if a.shape != b.shape:
        raise ValueError(f"pencil shape mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"d must be in 1..{n}, got {d}")
    a = 0.5 * (a + a.T)
    b = 0.5 * (b + b.T)
    scale = np.trace(b) / n
    if not scale > 0:
        raise PencilError(f"denominator has non-positive trace {np.trace(b):.3g}")

    eye = np.eye(n)
    t = tau
    while True:
        jitter = t * scale
        try:
            low = cholesky(b + jitter * eye)
            break
        except PencilError:
            t *= 10.0
            if t > max_tau * (1 + 1e-12):
                smallest = sym_eig(b, backend=backend)[0][-1]
                raise PencilError(
                    f"denominator not factorizable with jitter up to {max_tau:g}*trace/n; "
                    f"smallest eigenvalue estimate {smallest:.6g}"
                ) from None
    if t > tau:
        warnings.warn(f"pencil denominator conditioned with tau={t:g}", RuntimeWarning, stacklevel=2)

    half = solve_lower(low, a)
    reduced = solve_lower(low, half.T)
    w, q = sym_eig(0.5 * (reduced + reduced.T), backend=backend)
    # Back-transform every column, then slice, so that a top-d solve equals
    # the truncation of a larger one bit for bit.
    v = solve_upper_t(low, q)
    return Projection(v[:, :d], w[:d], float(jitter))


def project(samples: SampleSet, proj: Projection) -> SampleSet:
    """Map every sample ``x`` to ``V^T x``."""
    if samples.dim != proj.input_dim:
        raise ValueError(f"samples have {samples.dim} features, projection expects {proj.input_dim}")
    return samples.with_features(samples.features @ proj.basis)


# --------------------------------------------------------------------------
# text serialization, shared with the classifier model


def format_floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).reshape(-1))


def parse_floats(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.split()], dtype=np.float64)


def read_sections(path) -> tuple[dict, list[str]]:
    """Split a model file into ``key: value`` header fields and body lines."""
    fields, body, in_body = {}, [], False
    for line in Path(path).read_text().splitlines():
        if in_body:
            if line.strip():
                body.append(line)
            continue
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        key = key.strip()
        if key in ("basis", "weights"):
            in_body = True
            continue
        fields[key] = value.strip()
    return fields, body


def save_projection(proj: Projection, path) -> None:
    """Header fields, then one line per basis column (column-major)."""
    lines = [
        "# ssrlsc projection",
        f"input_dim: {proj.input_dim}",
        f"output_dim: {proj.output_dim}",
        f"jitter: {proj.jitter!r}",
        f"eigenvalues: {format_floats(proj.eigenvalues)}",
        "basis:",
    ]
    lines += [format_floats(col) for col in proj.basis.T]
    Path(path).write_text("\n".join(lines) + "\n")


def load_projection(path) -> Projection:
    fields, body = read_sections(path)
    try:
        n, d = int(fields["input_dim"]), int(fields["output_dim"])
        eig = parse_floats(fields["eigenvalues"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing field {exc.args[0]!r}") from None
    cols = [parse_floats(line) for line in body]
    if len(cols) != d or any(len(c) != n for c in cols):
        raise ValueError(f"{path}: basis does not match declared {n}x{d}")
    return Projection(np.array(cols).T, eig, float(fields.get("jitter", 0.0)))
