'''Formato de fio do cabeçalho de congestionamento.

Cinco floats IEEE-754 de 64 bits, little-endian, na ordem
(hdr_bw, hdr_c, hdr_q, hdr_w, hdr_rate). Usado nos despejos de traço.
'''

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from core.exceptions import ProtocolError
from core.services.protocol import CongestionHeader

HEADER_DTYPE = np.dtype("<f8")
HEADER_FIELDS = ("hdr_bw", "hdr_c", "hdr_q", "hdr_w", "hdr_rate")
HEADER_SIZE = HEADER_DTYPE.itemsize * len(HEADER_FIELDS)


def encode_header(hdr: CongestionHeader) -> bytes:
    valores = [getattr(hdr, campo) for campo in HEADER_FIELDS]
    return np.array(valores, dtype=HEADER_DTYPE).tobytes()


def decode_header(data: bytes) -> CongestionHeader:
    if len(data) != HEADER_SIZE:
        raise ProtocolError(
            f"Cabeçalho com {len(data)} bytes; esperado {HEADER_SIZE}"
        )
    valores = np.frombuffer(data, dtype=HEADER_DTYPE)
    return CongestionHeader(*(float(v) for v in valores))


def encode_headers(headers: Iterable[CongestionHeader]) -> bytes:
    return b"".join(encode_header(h) for h in headers)


def iter_headers(data: bytes) -> Iterator[CongestionHeader]:
    if len(data) % HEADER_SIZE:
        raise ProtocolError(f"Despejo truncado: {len(data)} bytes")
    for inicio in range(0, len(data), HEADER_SIZE):
        yield decode_header(data[inicio:inicio + HEADER_SIZE])
