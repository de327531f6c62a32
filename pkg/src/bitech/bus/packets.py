"""Wire framing for the broker/client pair: an MQTT 3.1.1 subset.

Supported control packets: CONNECT, CONNACK, PUBLISH, PUBACK, SUBSCRIBE,
SUBACK, PINGREQ, PINGRESP, DISCONNECT, with QoS 0 and 1 only. Fixed header
is a type nibble plus flags, Remaining Length is the 7-bit-per-byte varint
(at most 4 bytes), strings are length-prefixed UTF-8, packet ids are
big-endian 16-bit.
"""

import struct
from dataclasses import dataclass, field
from enum import IntEnum


MAX_REMAINING_LENGTH = 268_435_455
PROTOCOL_NAME = b"MQTT"
PROTOCOL_LEVEL = 4


class PacketError(Exception):
    pass


class Malformed(PacketError):
    """Structurally invalid frame; the offending session must be closed."""


class NeedMoreBytes(PacketError):
    """The buffer holds only part of a frame; read more and retry."""


class Oversize(PacketError):
    """Remaining length exceeds the 4-byte varint ceiling."""


class PacketType(IntEnum):
    CONNECT = 1
    CONNACK = 2
    PUBLISH = 3
    PUBACK = 4
    SUBSCRIBE = 8
    SUBACK = 9
    PINGREQ = 12
    PINGRESP = 13
    DISCONNECT = 14


_SUPPORTED_TYPES = {t.value for t in PacketType}


@dataclass
class Packet:
    type: PacketType
    dup: bool = False
    qos: int = 0
    client_id: str = ""
    keepalive: int = 60
    session_present: bool = False
    return_code: int = 0
    topic: str = ""
    payload: bytes = b""
    packet_id: int = 0
    filters: tuple = ()   # SUBSCRIBE: ((filter, qos), ...)
    granted: tuple = ()   # SUBACK: granted qos per filter

    @classmethod
    def connect(cls, client_id, keepalive=60):
        return cls(type=PacketType.CONNECT, client_id=client_id, keepalive=keepalive)

    @classmethod
    def connack(cls, return_code=0, session_present=False):
        return cls(type=PacketType.CONNACK, return_code=return_code,
                   session_present=session_present)

    @classmethod
    def publish(cls, topic, payload, qos=0, packet_id=0, dup=False):
        return cls(type=PacketType.PUBLISH, topic=topic, payload=bytes(payload),
                   qos=qos, packet_id=packet_id, dup=dup)

    @classmethod
    def puback(cls, packet_id):
        return cls(type=PacketType.PUBACK, packet_id=packet_id)

    @classmethod
    def subscribe(cls, packet_id, filters):
        return cls(type=PacketType.SUBSCRIBE, packet_id=packet_id,
                   filters=tuple(filters))

    @classmethod
    def suback(cls, packet_id, granted):
        return cls(type=PacketType.SUBACK, packet_id=packet_id,
                   granted=tuple(granted))

    @classmethod
    def pingreq(cls):
        return cls(type=PacketType.PINGREQ)

    @classmethod
    def pingresp(cls):
        return cls(type=PacketType.PINGRESP)

    @classmethod
    def disconnect(cls):
        return cls(type=PacketType.DISCONNECT)


def encode_varint(value):
    if value < 0 or value > MAX_REMAINING_LENGTH:
        raise Oversize(f"remaining length {value} out of range")
    out = bytearray()
    while True:
        digit = value % 128
        value //= 128
        if value:
            digit |= 0x80
        out.append(digit)
        if not value:
            return bytes(out)


def decode_varint(buf, offset):
    """Returns (value, bytes_consumed). Raises NeedMoreBytes / Malformed."""
    value = 0
    for i in range(4):
        if offset + i >= len(buf):
            raise NeedMoreBytes("varint continues past buffer")
        byte = buf[offset + i]
        value |= (byte & 0x7F) << (7 * i)
        if not byte & 0x80:
            return value, i + 1
    raise Malformed("remaining-length varint longer than 4 bytes")


def _encode_string(s):
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise Malformed("string exceeds 65535 bytes")
    return struct.pack(">H", len(raw)) + raw


def _take_string(body, pos):
    if pos + 2 > len(body):
        raise Malformed("truncated string length")
    (length,) = struct.unpack_from(">H", body, pos)
    pos += 2
    if pos + length > len(body):
        raise Malformed("truncated string body")
    try:
        return body[pos:pos + length].decode("utf-8"), pos + length
    except UnicodeDecodeError as exc:
        raise Malformed(f"invalid UTF-8 string: {exc}") from exc


def _take_u16(body, pos):
    if pos + 2 > len(body):
        raise Malformed("truncated 16-bit field")
    return struct.unpack_from(">H", body, pos)[0], pos + 2


def _check_publish_invariants(p):
    if p.qos not in (0, 1):
        raise Malformed(f"qos {p.qos} unsupported")
    if p.qos == 1 and not 1 <= p.packet_id <= 0xFFFF:
        raise Malformed("qos-1 publish requires packet_id in 1..65535")
    if not p.topic:
        raise Malformed("empty topic")
    if "+" in p.topic or "#" in p.topic:
        raise Malformed(f"wildcard in publish topic {p.topic!r}")


def encode_packet(p: Packet) -> bytes:
    """Serialize one packet; inverse of decode_packet on valid frames."""
    flags = 0
    if p.type == PacketType.CONNECT:
        body = (_encode_string("MQTT") + bytes([PROTOCOL_LEVEL, 0x02])
                + struct.pack(">H", p.keepalive) + _encode_string(p.client_id))
    elif p.type == PacketType.CONNACK:
        body = bytes([1 if p.session_present else 0, p.return_code])
    elif p.type == PacketType.PUBLISH:
        _check_publish_invariants(p)
        flags = (0x08 if p.dup else 0) | (p.qos << 1)
        body = _encode_string(p.topic)
        if p.qos:
            body += struct.pack(">H", p.packet_id)
        body += p.payload
    elif p.type == PacketType.PUBACK:
        if not 1 <= p.packet_id <= 0xFFFF:
            raise Malformed("puback requires packet_id in 1..65535")
        body = struct.pack(">H", p.packet_id)
    elif p.type == PacketType.SUBSCRIBE:
        if not p.filters:
            raise Malformed("subscribe requires at least one filter")
        if not 1 <= p.packet_id <= 0xFFFF:
            raise Malformed("subscribe requires packet_id in 1..65535")
        flags = 0x02
        body = struct.pack(">H", p.packet_id)
        for topic_filter, qos in p.filters:
            if qos not in (0, 1):
                raise Malformed(f"subscription qos {qos} unsupported")
            body += _encode_string(topic_filter) + bytes([qos])
    elif p.type == PacketType.SUBACK:
        if not p.granted:
            raise Malformed("suback requires at least one grant")
        body = struct.pack(">H", p.packet_id) + bytes(p.granted)
    elif p.type in (PacketType.PINGREQ, PacketType.PINGRESP, PacketType.DISCONNECT):
        body = b""
    else:
        raise Malformed(f"unsupported packet type {p.type}")
    return bytes([(p.type << 4) | flags]) + encode_varint(len(body)) + body


def decode_packet(buf, offset=0):
    """Decode exactly one frame starting at `offset`.

    Returns (Packet, bytes_consumed). Raises NeedMoreBytes when the buffer
    ends mid-frame and Malformed for structural violations.
    """
    if offset >= len(buf):
        raise NeedMoreBytes("empty buffer")
    first = buf[offset]
    ptype = first >> 4
    flags = first & 0x0F
    if ptype not in _SUPPORTED_TYPES:
        raise Malformed(f"reserved or unsupported packet type {ptype}")
    ptype = PacketType(ptype)
    remaining, var_len = decode_varint(buf, offset + 1)
    start = offset + 1 + var_len
    if start + remaining > len(buf):
        raise NeedMoreBytes("frame body incomplete")
    body = bytes(buf[start:start + remaining])
    consumed = 1 + var_len + remaining

    if ptype == PacketType.PUBLISH:
        if flags & 0x01:
            raise Malformed("retain flag unsupported")
        qos = (flags >> 1) & 0x03
        if qos > 1:
            raise Malformed(f"qos {qos} unsupported")
        topic, pos = _take_string(body, 0)
        packet_id = 0
        if qos:
            packet_id, pos = _take_u16(body, pos)
        p = Packet(type=ptype, dup=bool(flags & 0x08), qos=qos, topic=topic,
                   packet_id=packet_id, payload=body[pos:])
        _check_publish_invariants(p)
        return p, consumed

    if flags != (0x02 if ptype == PacketType.SUBSCRIBE else 0x00):
        raise Malformed(f"bad fixed-header flags {flags:#x} for {ptype.name}")

    if ptype == PacketType.CONNECT:
        name, pos = _take_string(body, 0)
        if name != "MQTT":
            raise Malformed(f"unknown protocol name {name!r}")
        if pos + 2 > len(body):
            raise Malformed("truncated connect header")
        level, connect_flags = body[pos], body[pos + 1]
        if level != PROTOCOL_LEVEL:
            raise Malformed(f"protocol level {level} unsupported")
        if not connect_flags & 0x02:
            raise Malformed("only clean-session connections supported")
        pos += 2
        keepalive, pos = _take_u16(body, pos)
        client_id, pos = _take_string(body, pos)
        if pos != len(body):
            raise Malformed("trailing bytes in connect")
        return Packet(type=ptype, client_id=client_id, keepalive=keepalive), consumed
    if ptype == PacketType.CONNACK:
        if len(body) != 2:
            raise Malformed("connack body must be 2 bytes")
        return Packet(type=ptype, session_present=bool(body[0] & 0x01),
                      return_code=body[1]), consumed
    if ptype == PacketType.PUBACK:
        pid, pos = _take_u16(body, 0)
        if pos != len(body) or pid == 0:
            raise Malformed("bad puback body")
        return Packet(type=ptype, packet_id=pid), consumed
    if ptype == PacketType.SUBSCRIBE:
        pid, pos = _take_u16(body, 0)
        if pid == 0:
            raise Malformed("subscribe packet_id must be nonzero")
        filters = []
        while pos < len(body):
            topic_filter, pos = _take_string(body, pos)
            if pos >= len(body) + 1 or pos == len(body):
                raise Malformed("subscribe filter missing qos byte")
            qos = body[pos]
            pos += 1
            if qos > 1:
                raise Malformed(f"subscription qos {qos} unsupported")
            filters.append((topic_filter, qos))
        if not filters:
            raise Malformed("subscribe with no filters")
        return Packet(type=ptype, packet_id=pid, filters=tuple(filters)), consumed
    if ptype == PacketType.SUBACK:
        pid, pos = _take_u16(body, 0)
        grants = tuple(body[pos:])
        if pid == 0 or not grants or any(g not in (0, 1, 0x80) for g in grants):
            raise Malformed("bad suback body")
        return Packet(type=ptype, packet_id=pid, granted=grants), consumed
    # PINGREQ / PINGRESP / DISCONNECT
    if remaining != 0:
        raise Malformed(f"{ptype.name} must have empty body")
    return Packet(type=ptype), consumed
