"""Canonical forms and the table of non-isomorphic k-graphlets.

The canonical form of a bit-packed code is the numerically minimal code
over all k! relabelings of its nodes.  Minimization is done by a single
matrix product: a precomputed (n_bits x k!) weight matrix sends a code's
bit vector to its packed value under every permutation at once, and the
row minimum is the canonical code.  Code values stay below 2**28, so
float64 arithmetic is exact.

The atlas for size k lists every isomorphism class exactly once, sorted
ascending by canonical code value, which fixes a deterministic index
space for the exact-matching feature map.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import InputError, InternalError
from .graphs import MAX_K, GraphletCode, bit_weights, n_pair_bits, pair_positions

ATLAS_MAGIC = b"GATLAS1"

# Known class counts, used only for sanity messages in the CLI.
KNOWN_COUNTS = {2: 2, 3: 4, 4: 11, 5: 34, 6: 156, 7: 1044, 8: 12346}


@lru_cache(maxsize=None)
def _pair_index_matrix(k: int) -> np.ndarray:
    """(i, j) -> packed bit position, for i < j; symmetric fill."""
    m = np.zeros((k, k), dtype=np.int64)
    rows, cols = pair_positions(k)
    pos = np.arange(n_pair_bits(k))
    m[rows, cols] = pos
    m[cols, rows] = pos
    return m


@lru_cache(maxsize=None)
def _perm_weight_matrix(k: int) -> np.ndarray:
    """Weight matrix W (n_bits x k!): bits @ W gives the code under each perm."""
    nbits = n_pair_bits(k)
    perms = np.array(list(permutations(range(k))), dtype=np.int64)
    n_perms = perms.shape[0]
    rows, cols = pair_positions(k)
    pidx = _pair_index_matrix(k)
    # src_pos[p, t]: which source bit lands at target position t under perm p
    src_pos = pidx[perms[:, rows], perms[:, cols]]
    w = np.zeros((nbits, n_perms))
    w[src_pos.ravel(), np.repeat(np.arange(n_perms), nbits)] = np.tile(
        bit_weights(k), n_perms
    )
    return w


def _bits_matrix(k: int, codes: np.ndarray) -> np.ndarray:
    """Unpack code values into a (n, n_bits) float64 0/1 matrix."""
    shifts = np.arange(n_pair_bits(k), dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.float64)


def canonical_values(k: int, codes: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Canonical code value for each entry of `codes` (int64 array)."""
    codes = np.asarray(codes, dtype=np.int64)
    w = _perm_weight_matrix(k)
    out = np.empty(len(codes), dtype=np.int64)
    for lo in range(0, len(codes), chunk):
        hi = min(lo + chunk, len(codes))
        vals = _bits_matrix(k, codes[lo:hi]) @ w
        out[lo:hi] = vals.min(axis=1).astype(np.int64)
    return out


def canonical_code(code: GraphletCode) -> GraphletCode:
    """Numerically minimal code over all k! node permutations; idempotent."""
    return GraphletCode(code.k, int(canonical_values(code.k, np.array([code.bits]))[0]))


def is_isomorphic(c1: GraphletCode, c2: GraphletCode) -> bool:
    if c1.k != c2.k:
        raise InputError(f"cannot compare graphlets of sizes {c1.k} and {c2.k}")
    return canonical_code(c1).bits == canonical_code(c2).bits


@dataclass
class Atlas:
    """All non-isomorphic k-graphlets, indexed by ascending canonical code."""

    k: int
    codes: np.ndarray  # sorted int64 canonical code values
    _index: dict = field(default_factory=dict, repr=False)
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {int(c): i for i, c in enumerate(self.codes)}

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def n_classes(self) -> int:
        return len(self.codes)


def build_atlas(k: int) -> Atlas:
    """Enumerate all isomorphism classes of size-k graphs, incrementally.

    Starting from the two size-2 classes, each (k-1)-class is extended by
    a new node with every subset of the existing nodes as its neighborhood,
    then the candidates are canonicalized and deduplicated.  Every size-k
    class has a size-(k-1) induced subgraph, so the construction is complete.
    """
    if not 2 <= k <= MAX_K:
        raise InputError(f"atlas size must be in [2, {MAX_K}], got {k}")
    codes = np.array([0, 1], dtype=np.int64)
    for kk in range(3, k + 1):
        codes = _extend_classes(kk, codes)
    return Atlas(k, codes)


def _extend_classes(k: int, parent_codes: np.ndarray) -> np.ndarray:
    """All size-k classes from the size-(k-1) classes."""
    kp = k - 1
    # map parent bit positions into the size-k bit layout
    prows, pcols = pair_positions(kp)
    pos_in_k = _pair_index_matrix(k)[prows, pcols]
    parent_bits = _bits_matrix(kp, parent_codes)  # (Np, nbits_{k-1})
    base = (parent_bits * (2.0 ** pos_in_k)).sum(axis=1).astype(np.int64)  # (Np,)
    # bit positions of the pairs (i, k-1), i < k-1
    new_pos = _pair_index_matrix(k)[np.arange(kp), kp]
    patterns = np.arange(1 << kp, dtype=np.int64)
    pattern_bits = ((patterns[:, None] >> np.arange(kp)) & 1).astype(np.float64)
    pattern_vals = (pattern_bits @ (2.0 ** new_pos)).astype(np.int64)  # (2**kp,)
    candidates = (base[:, None] + pattern_vals[None, :]).ravel()
    canon = canonical_values(k, candidates)
    return np.unique(canon)


def match_index(atlas: Atlas, code: GraphletCode) -> int:
    """Isomorphism-class index of `code` in 0..N_k-1; memoized on raw code."""
    if code.k != atlas.k:
        raise InputError(f"code has k={code.k}, atlas has k={atlas.k}")
    hit = atlas._memo.get(code.bits)
    if hit is not None:
        return hit
    canon = canonical_code(code).bits
    try:
        idx = atlas._index[canon]
    except KeyError:
        raise InternalError(f"canonical code {canon} missing from atlas k={atlas.k}")
    atlas._memo[code.bits] = idx
    return idx


def match_index_batch(atlas: Atlas, code_values: np.ndarray) -> np.ndarray:
    """Class indices for an int64 array of raw code values."""
    code_values = np.asarray(code_values, dtype=np.int64)
    uniq, inverse = np.unique(code_values, return_inverse=True)
    uniq_idx = np.empty(len(uniq), dtype=np.int64)
    missing = []
    for i, c in enumerate(uniq.tolist()):
        hit = atlas._memo.get(c)
        if hit is None:
            missing.append(i)
        else:
            uniq_idx[i] = hit
    if missing:
        canon = canonical_values(atlas.k, uniq[missing])
        for i, cv in zip(missing, canon.tolist()):
            idx = atlas._index.get(cv)
            if idx is None:
                raise InternalError(f"canonical code {cv} missing from atlas k={atlas.k}")
            atlas._memo[int(uniq[i])] = idx
            uniq_idx[i] = idx
    return uniq_idx[inverse]


def save_atlas(atlas: Atlas, path) -> None:
    """Write the binary cache: magic, k, N_k (u64 LE), codes (u64 LE each)."""
    with open(path, "wb") as fh:
        fh.write(ATLAS_MAGIC)
        fh.write(struct.pack("<B", atlas.k))
        fh.write(struct.pack("<Q", len(atlas.codes)))
        fh.write(atlas.codes.astype("<u8").tobytes())


def load_atlas(path) -> Atlas:
    with open(path, "rb") as fh:
        magic = fh.read(len(ATLAS_MAGIC))
        if magic != ATLAS_MAGIC:
            raise InputError(f"{path}: bad atlas magic {magic!r}")
        (k,) = struct.unpack("<B", fh.read(1))
        (n,) = struct.unpack("<Q", fh.read(8))
        codes = np.frombuffer(fh.read(8 * n), dtype="<u8").astype(np.int64)
    if len(codes) != n:
        raise InputError(f"{path}: truncated atlas file")
    if not np.all(np.diff(codes) > 0):
        raise InputError(f"{path}: atlas codes not strictly ascending")
    return Atlas(int(k), codes)


def load_or_build_atlas(k: int, cache_dir=None) -> Atlas:
    """Build the k-atlas, reusing `cache_dir/atlas_k{k}.bin` when present."""
    if cache_dir is None:
        return build_atlas(k)
    from pathlib import Path

    path = Path(cache_dir) / f"atlas_k{k}.bin"
    if path.exists():
        atlas = load_atlas(path)
        if atlas.k != k:
            raise InputError(f"{path}: cached atlas has k={atlas.k}, expected {k}")
        return atlas
    atlas = build_atlas(k)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    save_atlas(atlas, tmp)
    tmp.replace(path)
    return atlas
