"""Binary model files.

Layout (all integers little-endian):

    magic b"RDST" | u32 format version | u32 header length | header JSON |
    payload (float64 LE arrays, C order, in header order) | sha256 trailer

The magic, version word and 32-byte sha256 trailer are stable across
format versions so older readers can always give a precise error. Loading
never touches the RNG: every weight matrix is stored in full.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import numpy as np

from ._version import __version__
from .encoder import EncoderModel
from .errors import ModelFileError
from .mappings import RandomMap

MAGIC = b"RDST"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")  # magic, format version, header length


def _map_header(mapping: RandomMap) -> dict:
    return {
        "kind": mapping.kind,
        "in_dim": mapping.in_dim,
        "out_dim": mapping.out_dim,
        "seed": mapping.seed,
        "bandwidth": mapping.bandwidth,
        "density": mapping.density,
    }


def _model_record(model: EncoderModel) -> tuple[dict, list]:
    arrays = [("w", model.w), ("b", model.b)]
    if model.has_decoder:
        arrays.append(("decoder_w", model.decoder_w))
        arrays.append(("decoder_b", model.decoder_b))
    if model.random_map.weights is not None:
        arrays.append(("map_weights", model.random_map.weights))
    if model.random_map.offsets is not None:
        arrays.append(("map_offsets", model.random_map.offsets))
    header = {
        "leaky_slope": model.leaky_slope,
        "map": _map_header(model.random_map),
        "arrays": [[name, list(a.shape)] for name, a in arrays],
    }
    return header, [a for _, a in arrays]


def _write_container(path, header: dict, arrays: list) -> None:
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = bytearray(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)))
    blob += header_bytes
    for a in arrays:
        blob += np.ascontiguousarray(a, dtype="<f8").tobytes()
    blob += hashlib.sha256(blob).digest()
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def _read_container(path) -> tuple[dict, bytes]:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as err:
        raise ModelFileError(f"cannot read {path}: {err}") from err
    if len(blob) < _PREFIX.size + 32:
        raise ModelFileError(f"{path} is truncated ({len(blob)} bytes)")
    magic, version, header_len = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise ModelFileError(f"{path} is not a model file (bad magic {magic!r})")
    if version > FORMAT_VERSION:
        raise ModelFileError(
            f"{path} uses format version {version}, this build reads up to {FORMAT_VERSION}"
        )
    if hashlib.sha256(blob[:-32]).digest() != blob[-32:]:
        raise ModelFileError(f"{path} failed its checksum; the file is corrupted")
    start = _PREFIX.size
    if start + header_len + 32 > len(blob):
        raise ModelFileError(f"{path} is truncated (incomplete header)")
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ModelFileError(f"{path} has a malformed header: {err}") from err
    return header, blob[start + header_len : -32]


def _take_arrays(payload: bytes, specs: list, path) -> tuple[dict, bytes]:
    out = {}
    offset = 0
    for name, shape in specs:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise ModelFileError(f"{path} is truncated (array {name!r} incomplete)")
        a = np.frombuffer(payload[offset : offset + nbytes], dtype="<f8").reshape(shape)
        out[name] = a.astype(np.float64).copy()
        offset += nbytes
    return out, payload[offset:]


def _model_from_record(header: dict, arrays: dict) -> EncoderModel:
    mh = header["map"]
    mapping = RandomMap(
        kind=mh["kind"],
        in_dim=int(mh["in_dim"]),
        out_dim=int(mh["out_dim"]),
        seed=int(mh["seed"]),
        weights=arrays.get("map_weights"),
        offsets=arrays.get("map_offsets"),
        bandwidth=mh["bandwidth"],
        density=mh["density"],
    )
    return EncoderModel(
        w=arrays["w"],
        b=arrays["b"],
        leaky_slope=float(header["leaky_slope"]),
        random_map=mapping,
        decoder_w=arrays.get("decoder_w"),
        decoder_b=arrays.get("decoder_b"),
    )


def save_model(path, model: EncoderModel) -> None:
    record, arrays = _model_record(model)
    header = {"format": "randist-model", "lib_version": __version__, "model": record}
    _write_container(path, header, arrays)


def load_model(path) -> EncoderModel:
    header, payload = _read_container(path)
    if header.get("format") != "randist-model":
        raise ModelFileError(f"{path} holds {header.get('format')!r}, expected a single model")
    arrays, rest = _take_arrays(payload, header["model"]["arrays"], path)
    if rest:
        raise ModelFileError(f"{path} has {len(rest)} unexpected trailing payload bytes")
    return _model_from_record(header["model"], arrays)


def save_ensemble(path, models: list) -> None:
    """All member models in one container, preserving member order."""
    records, arrays = [], []
    for model in models:
        record, model_arrays = _model_record(model)
        records.append(record)
        arrays.extend(model_arrays)
    header = {"format": "randist-ensemble", "lib_version": __version__, "models": records}
    _write_container(path, header, arrays)


def load_ensemble(path) -> list:
    header, payload = _read_container(path)
    if header.get("format") != "randist-ensemble":
        raise ModelFileError(f"{path} holds {header.get('format')!r}, expected an ensemble")
    models = []
    for record in header["models"]:
        arrays, payload = _take_arrays(payload, record["arrays"], path)
        models.append(_model_from_record(record, arrays))
    if payload:
        raise ModelFileError(f"{path} has {len(payload)} unexpected trailing payload bytes")
    return models
