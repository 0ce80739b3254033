"""
LWA1 array container - images, label maps, masks and altitude maps on disk
"""
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import ArrayFormatError

logger = logging.getLogger(__name__)

MAGIC = b"LWA1"
VERSION = 1
DTYPE_FLOAT32 = 0
DTYPE_UINT32 = 1

_HEADER = struct.Struct("<4sIIIII")
_DTYPES = {DTYPE_FLOAT32: np.dtype("<f4"), DTYPE_UINT32: np.dtype("<u4")}


def encode_array(array: np.ndarray) -> bytes:
    """Encode a (height, width, channels) array; 2-D arrays get one channel"""
    array = np.asarray(array)
    if array.ndim == 2:
        array = array[:, :, None]
    if array.ndim != 3:
        raise ValueError(f"LWA1 stores 2-D or 3-D arrays, got shape {array.shape}")
    if np.issubdtype(array.dtype, np.floating):
        code = DTYPE_FLOAT32
    elif np.issubdtype(array.dtype, np.integer) or array.dtype == np.bool_:
        if array.size and array.min() < 0:
            raise ValueError("LWA1 uint32 payload cannot hold negative values")
        code = DTYPE_UINT32
    else:
        raise ValueError(f"unsupported dtype {array.dtype}")
    height, width, channels = array.shape
    header = _HEADER.pack(MAGIC, VERSION, code, height, width, channels)
    payload = np.ascontiguousarray(array, dtype=_DTYPES[code]).tobytes()
    return header + payload


def decode_array(data: bytes) -> np.ndarray:
    """Decode LWA1 bytes into a (height, width, channels) array"""
    if len(data) < _HEADER.size:
        raise ArrayFormatError("LWA1 data shorter than its header")
    magic, version, code, height, width, channels = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ArrayFormatError(f"bad LWA1 magic {magic!r}")
    if version != VERSION:
        raise ArrayFormatError(f"unsupported LWA1 version {version}")
    if code not in _DTYPES:
        raise ArrayFormatError(f"unknown LWA1 dtype code {code}")
    dtype = _DTYPES[code]
    expected = height * width * channels * dtype.itemsize
    payload = data[_HEADER.size:]
    if len(payload) != expected:
        raise ArrayFormatError(f"LWA1 payload has {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(height, width, channels).copy()


def read_header(path: Union[str, Path]) -> Tuple[int, int, int, int]:
    """Return (dtype code, height, width, channels) after validating the header"""
    with open(path, "rb") as handle:
        head = handle.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise ArrayFormatError(f"{path}: truncated LWA1 header")
    magic, version, code, height, width, channels = _HEADER.unpack(head)
    if magic != MAGIC or version != VERSION or code not in _DTYPES:
        raise ArrayFormatError(f"{path}: invalid LWA1 header")
    return code, height, width, channels


def save_array(path: Union[str, Path], array: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(encode_array(array))
    logger.debug(f"Wrote LWA1 array {np.shape(array)} to {path}")
    return path


def load_array(path: Union[str, Path]) -> np.ndarray:
    return decode_array(Path(path).read_bytes())


def save_edge_map(path: Union[str, Path], values: np.ndarray) -> Path:
    """Store a per-edge map as a 1 x |E| x 1 float32 array in canonical edge order"""
    values = np.asarray(values, dtype=np.float64)
    return save_array(path, values.reshape(1, -1, 1))


def load_edge_map(path: Union[str, Path]) -> np.ndarray:
    array = load_array(path)
    if array.shape[0] != 1 or array.shape[2] != 1:
        raise ArrayFormatError(f"{path}: edge maps are stored as 1 x |E| x 1, got {array.shape}")
    return array.reshape(-1).astype(np.float64)
