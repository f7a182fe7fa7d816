"""FTEN tensor files and factor-list serialization.

JSON FTEN document::

    {"version": 1, "order": 4 | 2, "dims": [...], "layout": "row-major",
     "convention": "pqrs-ladder" | "charge-charge" | "hermitian-chemist",
     "dtype": "complex128", "data": [re0, im0, re1, im1, ...]}

Binary FTEN: 8-byte magic ``FTENBIN1``, little-endian u32 order, u32 dims,
then raw little-endian float64 interleaved complex. The binary variant
carries no convention tag; readers take it from the caller.

Factor lists are JSON arrays of
``{"mu": <FTEN 2-array>, "J": <FTEN 2-array>, "tag": str, "weight": 1.0}``
(weights are pre-absorbed into J) plus optional ``sector``,
``simultaneous_group`` and ``real`` annotations.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from sos_compress.errors import ConventionError
from sos_compress.tensors import CHARGE_CHARGE, CONVENTIONS, CoeffTensor4, SOSFactor

BINARY_MAGIC = b"FTENBIN1"


def array_to_ften_dict(array: np.ndarray, convention: str) -> dict:
    if convention not in CONVENTIONS:
        raise ConventionError(f"unknown convention {convention!r}")
    array = np.asarray(array, dtype=complex)
    interleaved = np.empty(2 * array.size)
    interleaved[0::2] = array.real.ravel()
    interleaved[1::2] = array.imag.ravel()
    return {
        "version": 1,
        "order": array.ndim,
        "dims": list(array.shape),
        "layout": "row-major",
        "convention": convention,
        "dtype": "complex128",
        "data": interleaved.tolist(),
    }


def array_from_ften_dict(doc: dict) -> tuple[np.ndarray, str]:
    if doc.get("version") != 1:
        raise ValueError(f"unsupported FTEN version {doc.get('version')!r}")
    if doc.get("layout", "row-major") != "row-major":
        raise ValueError(f"unsupported layout {doc.get('layout')!r}")
    convention = doc["convention"]
    if convention not in CONVENTIONS:
        raise ConventionError(f"unknown convention {convention!r}")
    dims = tuple(int(d) for d in doc["dims"])
    if len(dims) != int(doc["order"]):
        raise ValueError("order field does not match dims")
    flat = np.asarray(doc["data"], dtype=float)
    if flat.size != 2 * int(np.prod(dims)):
        raise ValueError("data length does not match dims")
    array = (flat[0::2] + 1j * flat[1::2]).reshape(dims)
    return array, convention


def write_ften(path, array: np.ndarray, convention: str) -> None:
    Path(path).write_text(json.dumps(array_to_ften_dict(array, convention)))


def write_ften_binary(path, array: np.ndarray) -> None:
    array = np.ascontiguousarray(np.asarray(array, dtype=complex))
    with open(path, "wb") as handle:
        handle.write(BINARY_MAGIC)
        handle.write(struct.pack("<I", array.ndim))
        handle.write(struct.pack(f"<{array.ndim}I", *array.shape))
        interleaved = np.empty(2 * array.size)
        interleaved[0::2] = array.real.ravel()
        interleaved[1::2] = array.imag.ravel()
        handle.write(interleaved.astype("<f8").tobytes())


def read_ften(path, convention: str | None = None) -> tuple[np.ndarray, str]:
    """Read a JSON or binary FTEN file.

    Returns the array and its convention. Binary files carry no
    convention, so one must be supplied; a supplied convention must match
    a JSON file's own tag.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        magic = handle.read(8)
    if magic == BINARY_MAGIC:
        if convention is None:
            raise ConventionError(
                f"{path} is a binary FTEN file, which carries no convention "
                "tag; pass the convention explicitly"
            )
        return _read_binary(path), convention
    try:
        array, tagged = array_from_ften_dict(json.loads(path.read_text()))
    except (KeyError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path} is not a valid FTEN document ({exc})") from exc
    if convention is not None and convention != tagged:
        raise ConventionError(
            f"{path} is tagged {tagged!r} but {convention!r} was requested"
        )
    return array, tagged


def _read_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    offset = len(BINARY_MAGIC)
    (order,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    dims = struct.unpack_from(f"<{order}I", raw, offset)
    offset += 4 * order
    count = 2 * int(np.prod(dims))
    flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return (flat[0::2] + 1j * flat[1::2]).reshape(dims)


def read_coeff_tensor(path, convention: str | None = None) -> CoeffTensor4:
    array, tagged = read_ften(path, convention)
    if array.ndim != 4:
        raise ValueError(f"{path} holds an order-{array.ndim} tensor, expected 4")
    return CoeffTensor4(array, tagged)


def _factor_is_real(factor: SOSFactor) -> bool:
    return (
        float(np.max(np.abs(factor.mu.imag))) < 1e-12
        and float(np.max(np.abs(factor.j.imag))) < 1e-12
    )


def factors_to_json(factors: list[SOSFactor]) -> dict:
    entries = []
    for factor in factors:
        entry = {
            "mu": array_to_ften_dict(factor.mu, CHARGE_CHARGE),
            "J": array_to_ften_dict(factor.j, CHARGE_CHARGE),
            "tag": factor.tag,
            "weight": 1.0,
        }
        if factor.sector is not None:
            entry["sector"] = factor.sector
        if factor.simultaneous_group is not None:
            entry["simultaneous_group"] = factor.simultaneous_group
        if factor.source_term is not None:
            entry["source_term"] = factor.source_term
        if _factor_is_real(factor):
            entry["real"] = True
        entries.append(entry)
    return {"version": 1, "factors": entries}


def factors_from_json(doc: dict) -> list[SOSFactor]:
    if doc.get("version") != 1:
        raise ValueError(f"unsupported factor-file version {doc.get('version')!r}")
    factors = []
    for entry in doc["factors"]:
        mu, _ = array_from_ften_dict(entry["mu"])
        j, _ = array_from_ften_dict(entry["J"])
        j = float(entry.get("weight", 1.0)) * j
        factors.append(
            SOSFactor(
                mu,
                j,
                entry["tag"],
                sector=entry.get("sector"),
                simultaneous_group=entry.get("simultaneous_group"),
                source_term=entry.get("source_term"),
            )
        )
    return factors


def write_factors(path, factors: list[SOSFactor]) -> None:
    Path(path).write_text(json.dumps(factors_to_json(factors)))


def read_factors(path) -> list[SOSFactor]:
    return factors_from_json(json.loads(Path(path).read_text()))
