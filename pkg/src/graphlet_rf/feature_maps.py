"""Graphlet-level feature maps and their kernel oracles.

Four maps from a size-k graphlet to R^m:

* ``match``: exact one-hot over isomorphism classes (m forced to N_k);
* ``gaussian``: random Fourier features of the Gaussian kernel applied
  to the flattened k x k adjacency, phi_j(x) = sqrt(2/m) cos(w_j.x + b_j)
  with w ~ N(0, sigma2 I), b ~ U[0, 2pi); inner products approximate
  exp(-sigma2 ||x - y||^2 / 2);
* ``gaussian_eig``: the same Fourier features applied to the sorted
  eigenvalue vector of the adjacency (permutation-invariant, but blind
  to co-spectral pairs);
* ``opu``: simulated optical features phi_j(x) = |w_j.x + b_j|^2 / sqrt(m)
  with complex Gaussian w (unit E|w_i|^2) and, by default, zero bias.
  With zero bias the expected kernel has the closed form
  ||x||^2 ||y||^2 + (x.y)^2.

Realized parameters are a pure function of the spec, so embeddings are
reproducible across machines; they can also be round-tripped through a
binary file.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from .atlas import Atlas, match_index
from .errors import InputError
from .graphs import GraphletCode, flatten_adjacency
from .rng import RngStream

MATCH = "match"
GAUSSIAN = "gaussian"
GAUSSIAN_EIG = "gaussian_eig"
OPU = "opu"
KINDS = (MATCH, GAUSSIAN, GAUSSIAN_EIG, OPU)

MAP_MAGIC = b"GRFMAP1"
_KIND_BYTE = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: str
    k: int
    m: int
    sigma2: float = 0.01
    seed: int = 0
    opu_bias_var: float = 0.0  # variance of the optional complex Gaussian bias

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown feature map kind {self.kind!r}")
        if self.m < 1:
            raise InputError(f"feature dimension must be >= 1, got {self.m}")
        if self.kind in (GAUSSIAN, GAUSSIAN_EIG) and self.sigma2 <= 0:
            raise InputError(f"sigma2 must be positive, got {self.sigma2}")
        if self.opu_bias_var < 0:
            raise InputError("opu_bias_var must be non-negative")

    @property
    def input_dim(self) -> int:
        return self.k if self.kind == GAUSSIAN_EIG else self.k * self.k

    def hash(self) -> str:
        key = (
            f"{self.kind}|k={self.k}|m={self.m}|sigma2={self.sigma2!r}"
            f"|seed={self.seed}|bvar={self.opu_bias_var!r}"
        )
        return hashlib.sha256(key.encode()).hexdigest()[:16]


class RealizedMap:
    """A feature map with its random parameters drawn; immutable."""

    def __init__(self, spec, weights=None, biases=None, atlas=None):
        self.spec = spec
        self.weights = weights
        self.biases = biases
        self.atlas = atlas
        if weights is not None:
            self.weights.setflags(write=False)
        if biases is not None:
            self.biases.setflags(write=False)

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def spec_hash(self) -> str:
        return self.spec.hash()


def realize(spec: FeatureMapSpec, atlas: Atlas | None = None) -> RealizedMap:
    """Draw the map's parameters deterministically from its spec."""
    if spec.kind == MATCH:
        if atlas is None:
            raise InputError("match map requires an atlas")
        if atlas.k != spec.k:
            raise InputError(f"atlas k={atlas.k} does not match spec k={spec.k}")
        if spec.m != len(atlas):
            raise InputError(
                f"match map dimension must be N_k={len(atlas)}, got m={spec.m}"
            )
        return RealizedMap(spec, atlas=atlas)
    d = spec.input_dim
    rng = RngStream(spec.seed, stream=0)
    if spec.kind in (GAUSSIAN, GAUSSIAN_EIG):
        w = rng.normal(spec.m * d).reshape(spec.m, d) * math.sqrt(spec.sigma2)
        b = rng.uniform(spec.m) * (2.0 * math.pi)
        return RealizedMap(spec, weights=w, biases=b)
    # OPU: complex Gaussian weights, E[|w_i|^2] = 1
    re = rng.normal(spec.m * d).reshape(spec.m, d)
    im = rng.normal(spec.m * d).reshape(spec.m, d)
    w = (re + 1j * im) * math.sqrt(0.5)
    if spec.opu_bias_var > 0:
        bre = rng.normal(spec.m)
        bim = rng.normal(spec.m)
        b = (bre + 1j * bim) * math.sqrt(spec.opu_bias_var / 2.0)
    else:
        b = np.zeros(spec.m, dtype=np.complex128)
    return RealizedMap(spec, weights=w, biases=b)


def phi_match(rmap: RealizedMap, code: GraphletCode) -> np.ndarray:
    """Dense one-hot class indicator; use match_index for the sparse form."""
    if rmap.spec.kind != MATCH:
        raise InputError("phi_match requires a match map")
    out = np.zeros(rmap.m)
    out[match_index(rmap.atlas, code)] = 1.0
    return out


def phi_gaussian(rmap: RealizedMap, x: np.ndarray) -> np.ndarray:
    """sqrt(2/m) cos(Wx + b); accepts a single vector or a (n, d) batch."""
    if rmap.spec.kind not in (GAUSSIAN, GAUSSIAN_EIG):
        raise InputError("phi_gaussian requires a gaussian-kind map")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != rmap.weights.shape[1]:
        raise InputError(
            f"input dimension {x.shape[-1]} != map dimension {rmap.weights.shape[1]}"
        )
    proj = x @ rmap.weights.T + rmap.biases
    return math.sqrt(2.0 / rmap.m) * np.cos(proj)


def phi_opu_sim(rmap: RealizedMap, x) -> np.ndarray:
    """|Wx + b|^2 / sqrt(m); accepts a GraphletCode, vector, or (n, d) batch."""
    if rmap.spec.kind != OPU:
        raise InputError("phi_opu_sim requires an opu map")
    if isinstance(x, GraphletCode):
        x = flatten_adjacency(x)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != rmap.weights.shape[1]:
        raise InputError(
            f"input dimension {x.shape[-1]} != map dimension {rmap.weights.shape[1]}"
        )
    proj = x @ rmap.weights.T + rmap.biases
    return (np.square(proj.real) + np.square(proj.imag)) / math.sqrt(rmap.m)


def opu_kernel_closed_form(x: np.ndarray, y: np.ndarray) -> float:
    """Expected zero-bias OPU kernel: ||x||^2 ||y||^2 + (x.y)^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise InputError(f"length mismatch: {x.shape} vs {y.shape}")
    dot = float(x @ y)
    return float(x @ x) * float(y @ y) + dot * dot


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, (a * a).sum() - (np.diagonal(a) ** 2).sum()))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol / (n * n):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
    return np.sort(np.diagonal(a).copy())


def sorted_eigenvalues(code: GraphletCode) -> np.ndarray:
    """Ascending adjacency eigenvalues; identical for isomorphic codes."""
    return jacobi_eigenvalues(code.adjacency())


def save_map(rmap: RealizedMap, path) -> None:
    """Binary export: magic, spec fields, then f64 LE weight and bias arrays.

    Complex (opu) weights and biases are stored as interleaved
    (real, imaginary) pairs.  Match maps carry no arrays; reattach the
    atlas on load.
    """
    spec = rmap.spec
    with open(path, "wb") as fh:
        fh.write(MAP_MAGIC)
        fh.write(struct.pack("<BBQ", _KIND_BYTE[spec.kind], spec.k, spec.m))
        fh.write(struct.pack("<ddQ", spec.sigma2, spec.opu_bias_var, spec.seed))
        if spec.kind == MATCH:
            return
        if spec.kind == OPU:
            w = np.empty((spec.m, 2 * spec.input_dim))
            w[:, 0::2] = rmap.weights.real
            w[:, 1::2] = rmap.weights.imag
            b = np.empty(2 * spec.m)
            b[0::2] = rmap.biases.real
            b[1::2] = rmap.biases.imag
        else:
            w = rmap.weights
            b = rmap.biases
        fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_map(path, atlas: Atlas | None = None) -> RealizedMap:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAP_MAGIC))
        if magic != MAP_MAGIC:
            raise InputError(f"{path}: bad map magic {magic!r}")
        kind_b, k, m = struct.unpack("<BBQ", fh.read(10))
        sigma2, bias_var, seed = struct.unpack("<ddQ", fh.read(24))
        kind = KINDS[kind_b]
        spec = FeatureMapSpec(
            kind, int(k), int(m), sigma2=sigma2, seed=int(seed), opu_bias_var=bias_var
        )
        if kind == MATCH:
            return realize(spec, atlas=atlas)
        d = spec.input_dim
        if kind == OPU:
            raw_w = np.frombuffer(fh.read(8 * m * 2 * d), dtype="<f8").reshape(m, 2 * d)
            raw_b = np.frombuffer(fh.read(8 * 2 * m), dtype="<f8")
            w = raw_w[:, 0::2] + 1j * raw_w[:, 1::2]
            b = raw_b[0::2] + 1j * raw_b[1::2]
        else:
            w = np.frombuffer(fh.read(8 * m * d), dtype="<f8").reshape(m, d).copy()
            b = np.frombuffer(fh.read(8 * m), dtype="<f8").copy()
    return RealizedMap(spec, weights=np.ascontiguousarray(w), biases=np.ascontiguousarray(b))
