"""Per-clip patch embeddings: native seeded projection or imported ALDE files.

Downstream code consumes PatchEmbedding without caring which path
produced it; the ALDE interchange file is the contract with external
embedding exporters.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .dsp import LogMelPatchSet
from .errors import (BadMagic, DimensionMismatch, DuplicateUttId, IoFailure,
                     TruncatedFile, UnsupportedVersion)

ALDE_MAGIC = b"ALDE"
ALDE_VERSION = 1
DEFAULT_DIM = 128

_EPS_SIGMA = 1e-8


@dataclass(frozen=True)
class PatchEmbedding:
    utt_id: str
    vectors: np.ndarray  # (n_patches, dim)
    provenance: str = "native"  # native | imported

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class EmbeddingStore:
    dim: int
    entries: dict[str, PatchEmbedding] = field(default_factory=dict)

    def add(self, emb: PatchEmbedding) -> None:
        if emb.utt_id in self.entries:
            raise DuplicateUttId(emb.utt_id)
        if emb.dim != self.dim:
            raise DimensionMismatch(f"{emb.utt_id}: dim {emb.dim} != store dim {self.dim}")
        self.entries[emb.utt_id] = emb

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, utt_id: str) -> PatchEmbedding:
        return self.entries[utt_id]


class ProjectionSpec:
    """Seeded orthonormal random projection (flattened patch -> dim) with
    per-dimension standardization fitted on a corpus."""

    def __init__(self, in_dim: int = 96 * 64, out_dim: int = DEFAULT_DIM, seed: int = 0):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.seed = seed
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((in_dim, out_dim))
        q, _ = np.linalg.qr(g)
        self.matrix = q.T  # (out_dim, in_dim), orthonormal rows
        self.mean = np.zeros(out_dim)
        self.sigma = np.ones(out_dim)
        self.fitted = False

    def fit(self, patch_sets: list[LogMelPatchSet]) -> None:
        """Fit standardization stats over all patches of the corpus."""
        raw = np.concatenate(
            [ps.patches.reshape(len(ps.patches), -1) @ self.matrix.T for ps in patch_sets]
        )
        self.mean = raw.mean(axis=0)
        self.sigma = np.maximum(raw.std(axis=0), _EPS_SIGMA)
        self.fitted = True


def embed_native(patches: LogMelPatchSet, proj: ProjectionSpec) -> PatchEmbedding:
    """Flatten each patch, project, standardize. Deterministic per seed+stats."""
    flat = patches.patches.reshape(len(patches.patches), -1)
    if flat.shape[1] != proj.in_dim:
        raise DimensionMismatch(
            f"{patches.utt_id}: patch size {patches.patches.shape[1:]} incompatible "
            f"with projection input dim {proj.in_dim}")
    raw = flat @ proj.matrix.T
    vecs = (raw - proj.mean) / proj.sigma
    return PatchEmbedding(utt_id=patches.utt_id, vectors=vecs, provenance="native")


def export_embeddings(store: EmbeddingStore, path) -> None:
    """Write an ALDE file: canonical lexicographic utt_id order, bit-reproducible."""
    if not store.entries:
        raise IoFailure("refusing to export an empty store")
    out = bytearray()
    out += ALDE_MAGIC
    out += struct.pack("<III", ALDE_VERSION, store.dim, len(store.entries))
    for utt_id in sorted(store.entries):
        emb = store.entries[utt_id]
        uid = utt_id.encode("utf-8")
        out += struct.pack("<H", len(uid)) + uid
        out += struct.pack("<H", len(emb.vectors))
        out += np.asarray(emb.vectors, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as f:
            f.write(out)
    except OSError as e:
        raise IoFailure(str(e)) from e


def import_embeddings(path) -> EmbeddingStore:
    """Read an ALDE file into an EmbeddingStore."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != ALDE_MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}")
    if len(data) < 16:
        raise TruncatedFile("header incomplete")
    version, dim, count = struct.unpack("<III", data[4:16])
    if version != ALDE_VERSION:
        raise UnsupportedVersion(f"version {version}")
    store = EmbeddingStore(dim=dim)
    pos = 16
    for _ in range(count):
        if pos + 2 > len(data):
            raise TruncatedFile("record header truncated")
        (uid_len,) = struct.unpack("<H", data[pos : pos + 2])
        pos += 2
        if pos + uid_len + 2 > len(data):
            raise TruncatedFile("utt_id truncated")
        utt_id = data[pos : pos + uid_len].decode("utf-8")
        pos += uid_len
        (n_patches,) = struct.unpack("<H", data[pos : pos + 2])
        pos += 2
        nbytes = n_patches * dim * 4
        if pos + nbytes > len(data):
            raise TruncatedFile(f"{utt_id}: patch data truncated")
        vecs = np.frombuffer(data[pos : pos + nbytes], dtype="<f4").astype(np.float64)
        vecs = vecs.reshape(n_patches, dim)
        pos += nbytes
        store.add(PatchEmbedding(utt_id=utt_id, vectors=vecs, provenance="imported"))
    return store
