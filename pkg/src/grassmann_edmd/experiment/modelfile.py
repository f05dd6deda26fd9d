"""
Model files: a JSON header next to a binary matrix payload.

<name>.bin holds dense matrices as consecutive row-major little-endian
float64 blocks. <name>.json lists every block (name, rows, cols, byte
offset) together with the model kind, the dictionary descriptor,
provenance and the SHA-256 checksum of the payload.

Full models store P_inv, P, G_E, S_E, Q11 and K_E. Subspace models store
U and U0 and reference the full model they reduce.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from grassmann_edmd.dictionary.observables import Dictionary
from grassmann_edmd.edmd.transform import TransformedModel
from grassmann_edmd.errors import ModelFileError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f8")

KIND_FULL = "full"
KIND_SUBSPACE = "subspace"

FULL_BLOCKS = ("P_inv", "P", "G_E", "S_E", "Q11", "K_E")
SUBSPACE_BLOCKS = ("U", "U0")


def model_paths(path: str | Path) -> tuple[Path, Path]:
    """Header and payload paths for a model name (with or without suffix)."""
    base = Path(path)
    if base.suffix in (".json", ".bin"):
        base = base.with_suffix("")
    return base.with_name(base.name + ".json"), base.with_name(base.name + ".bin")


def calculate_checksum(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def write_model(path: str | Path, blocks: dict[str, np.ndarray], header: dict) -> Path:
    """
    Write the payload and the header.

    Args:
        path: Model name; ".json" and ".bin" are appended
        blocks: Ordered name -> 2-D matrix
        header: Additional header fields

    Returns:
        Path of the header file
    """
    header_path, payload_path = model_paths(path)
    entries = []
    chunks = []
    offset = 0
    for name, matrix in blocks.items():
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        data = np.ascontiguousarray(matrix, dtype=PAYLOAD_DTYPE).tobytes(order="C")
        rows, cols = matrix.shape
        entries.append({"name": name, "rows": rows, "cols": cols, "offset": offset})
        chunks.append(data)
        offset += len(data)
    payload = b"".join(chunks)

    full_header = {
        "format_version": FORMAT_VERSION,
        **header,
        "payload": payload_path.name,
        "dtype": "float64-le",
        "order": "row-major",
        "blocks": entries,
        "checksum": calculate_checksum(payload),
    }
    payload_path.write_bytes(payload)
    with open(header_path, "w") as f:
        json.dump(full_header, f, indent=2)
    logger.info("Model saved to %s (%d blocks, %d bytes)", header_path, len(entries), len(payload))
    return header_path


def read_model(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """
    Read a header and its payload, verifying the checksum.

    Raises:
        ModelFileError: If a file is missing, malformed or fails its checksum
    """
    header_path, _ = model_paths(path)
    try:
        with open(header_path) as f:
            header = json.load(f)
    except FileNotFoundError as e:
        raise ModelFileError(f"Model header not found: {header_path}") from e
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{header_path}: not valid JSON ({e})") from e

    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFileError(
            f"{header_path}: unsupported format version {header.get('format_version')!r}"
        )
    payload_path = header_path.with_name(header.get("payload", ""))
    try:
        payload = payload_path.read_bytes()
    except OSError as e:
        raise ModelFileError(f"Model payload not readable: {payload_path}") from e

    if calculate_checksum(payload) != header.get("checksum"):
        logger.warning("Checksum mismatch for %s", payload_path)
        raise ModelFileError(f"{payload_path}: checksum mismatch, file may be corrupted")

    blocks = {}
    try:
        for entry in header["blocks"]:
            rows, cols, offset = int(entry["rows"]), int(entry["cols"]), int(entry["offset"])
            count = rows * cols
            if offset + count * PAYLOAD_DTYPE.itemsize > len(payload):
                raise ModelFileError(f"{payload_path}: block {entry['name']!r} exceeds the payload")
            data = np.frombuffer(payload, dtype=PAYLOAD_DTYPE, count=count, offset=offset)
            blocks[entry["name"]] = data.reshape(rows, cols).astype(float)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFileError(f"{header_path}: malformed block table ({e})") from e
    return header, blocks


def _require(blocks: dict, names: tuple[str, ...], path) -> None:
    missing = [name for name in names if name not in blocks]
    if missing:
        raise ModelFileError(f"{path}: missing blocks {missing}")


@dataclass
class FullModel:
    """Transformed EDMD model with its dictionary and provenance."""

    tm: TransformedModel
    dictionary: Dictionary
    provenance: dict = field(default_factory=dict)

    def save(self, path: str | Path) -> Path:
        blocks = {
            "P_inv": self.tm.P_inv,
            "P": self.tm.P,
            "G_E": self.tm.G_E,
            "S_E": self.tm.S_E,
            "Q11": self.tm.Q11,
            "K_E": self.tm.A_E,
        }
        header = {
            "kind": KIND_FULL,
            "M": self.tm.M,
            "n": self.tm.n,
            "s": self.tm.s,
            "dictionary": self.dictionary.to_dict(),
            "provenance": self.provenance,
        }
        return write_model(path, blocks, header)

    @classmethod
    def load(cls, path: str | Path) -> FullModel:
        """
        Raises:
            ModelFileError: On missing blocks, wrong kind or checksum failure
        """
        header, blocks = read_model(path)
        if header.get("kind") != KIND_FULL:
            raise ModelFileError(f"{path}: expected a full model, got kind {header.get('kind')!r}")
        _require(blocks, FULL_BLOCKS, path)
        try:
            dictionary = Dictionary.from_dict(header["dictionary"])
        except (KeyError, ValueError) as e:
            raise ModelFileError(f"{path}: invalid dictionary descriptor ({e})") from e
        tm = TransformedModel.from_blocks(
            G_E=blocks["G_E"],
            S_E=blocks["S_E"],
            P=blocks["P"],
            P_inv=blocks["P_inv"],
            Q11=blocks["Q11"],
            s=header["s"],
            n=header["n"],
            A_E=blocks["K_E"],
        )
        if tm.M != dictionary.M:
            raise ModelFileError(
                f"{path}: model size {tm.M} does not match dictionary size {dictionary.M}"
            )
        return cls(tm=tm, dictionary=dictionary, provenance=header.get("provenance", {}))


@dataclass
class SubspaceModel:
    """
    Optimised subspace of a full model.

    Attributes:
        U: d x r optimised Stiefel representative
        U0: d x r starting point
        full_model: Header file name of the reduced full model
        value_initial: g_N(U0)
        value_final: g_N(U*)
        status: Optimiser status
    """

    U: np.ndarray
    U0: np.ndarray
    full_model: str
    value_initial: float
    value_final: float
    status: str
    provenance: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return self.U.shape[1]

    def save(self, path: str | Path, s: int) -> Path:
        header = {
            "kind": KIND_SUBSPACE,
            "full_model": self.full_model,
            "r": self.r,
            "s": s,
            "value_initial": self.value_initial,
            "value_final": self.value_final,
            "status": self.status,
            "provenance": self.provenance,
        }
        return write_model(path, {"U": self.U, "U0": self.U0}, header)

    @classmethod
    def load(cls, path: str | Path) -> SubspaceModel:
        header, blocks = read_model(path)
        if header.get("kind") != KIND_SUBSPACE:
            raise ModelFileError(
                f"{path}: expected a subspace model, got kind {header.get('kind')!r}"
            )
        _require(blocks, SUBSPACE_BLOCKS, path)
        return cls(
            U=blocks["U"],
            U0=blocks["U0"],
            full_model=header.get("full_model", ""),
            value_initial=float(header["value_initial"]),
            value_final=float(header["value_final"]),
            status=header.get("status", ""),
            provenance=header.get("provenance", {}),
        )
