"""Byte-exact codecs for the wire formats the lab manipulates.

Ethernet II frames with parsed IPv4/TCP layers, the RFC 1071 Internet
checksum, the IEEE CRC-32 frame check sequence, and classic pcap files.
Everything round-trips: ``parse_frame(data).emit() == data`` for any frame
this module accepts, and a pcap read here and written back is byte-identical.

Frames are immutable value objects.  Mutation happens through the
``with_*`` helpers, which splice new header/payload bytes in and keep the
affected checksums (and the FCS, when the frame carries one) consistent.
"""

from __future__ import annotations

import struct
import sys
import zlib
from array import array
from dataclasses import dataclass, replace
from typing import BinaryIO, Union

ETHERTYPE_IPV4 = 0x0800
PROTO_TCP = 6
ETH_HEADER_LEN = 14
IPV4_MIN_HEADER = 20
TCP_MIN_HEADER = 20

# IPv4 flag bits (3-bit field, MSB first: reserved, DF, MF).
IP_FLAG_MF = 0b001
IP_FLAG_DF = 0b010

# TCP control bits.  Nine of them: NS lives above the classic eight.
TCP_FIN = 0x001
TCP_SYN = 0x002
TCP_RST = 0x004
TCP_PSH = 0x008
TCP_ACK = 0x010
TCP_URG = 0x020
TCP_ECE = 0x040
TCP_CWR = 0x080
TCP_NS = 0x100

SEQ_MOD = 1 << 32


class WireError(Exception):
    """Base class for wire-format parse/emit failures."""


class TruncatedFrame(WireError):
    """Frame bytes are shorter than a declared or minimum size."""


class BadVersion(WireError):
    """Ethertype promised IPv4 but the IP version nibble disagrees."""


class BadMagic(WireError):
    """pcap global header is missing or carries an unknown magic number."""


class UnsupportedLinktype(WireError):
    """pcap linktype is not Ethernet (1)."""


class TruncatedRecord(WireError):
    """pcap record header or body ends before its declared length."""


# ---------------------------------------------------------------------------
# checksums


def internet_checksum(data: bytes) -> int:
    """One's-complement checksum over 16-bit big-endian words (RFC 1071).

    Odd-length input is padded with a virtual zero byte.  The words are
    summed in native order for speed and the result is byte-swapped at the
    end on little-endian hosts; one's-complement addition commutes with the
    swap, so the value equals the big-endian word-loop definition.
    """
    if len(data) & 1:
        data = bytes(data) + b"\x00"
    total = sum(array("H", bytes(data)))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    total = ~total & 0xFFFF
    if sys.byteorder == "little":
        total = ((total << 8) | (total >> 8)) & 0xFFFF
    return total


def fcs32(data: bytes) -> int:
    """Ethernet frame check sequence: reflected CRC-32 of the frame bytes."""
    return zlib.crc32(data) & 0xFFFFFFFF


# ---------------------------------------------------------------------------
# header value objects


def _check_range(name: str, value: int, bits: int) -> None:
    if not 0 <= value < (1 << bits):
        raise ValueError(f"{name} out of range for {bits} bits: {value!r}")


@dataclass(frozen=True)
class Ipv4Header:
    """Parsed IPv4 header.  ``emit()`` returns exactly ``ihl * 4`` bytes."""

    version: int
    ihl: int
    tos: int
    total_length: int
    identification: int
    flags: int          # 3 bits: reserved | DF | MF
    frag_offset: int    # 13 bits
    ttl: int
    protocol: int
    header_checksum: int
    src_ip: int
    dst_ip: int
    options: bytes = b""

    def __post_init__(self) -> None:
        _check_range("version", self.version, 4)
        _check_range("ihl", self.ihl, 4)
        _check_range("tos", self.tos, 8)
        _check_range("total_length", self.total_length, 16)
        _check_range("identification", self.identification, 16)
        _check_range("flags", self.flags, 3)
        _check_range("frag_offset", self.frag_offset, 13)
        _check_range("ttl", self.ttl, 8)
        _check_range("protocol", self.protocol, 8)
        _check_range("header_checksum", self.header_checksum, 16)
        _check_range("src_ip", self.src_ip, 32)
        _check_range("dst_ip", self.dst_ip, 32)
        if self.ihl < 5:
            raise ValueError(f"ihl below minimum header size: {self.ihl}")
        if len(self.options) != (self.ihl - 5) * 4:
            raise ValueError("options length inconsistent with ihl")

    @property
    def header_len(self) -> int:
        return self.ihl * 4

    def emit(self) -> bytes:
        head = struct.pack(
            "!BBHHHBBHII",
            (self.version << 4) | self.ihl,
            self.tos,
            self.total_length,
            self.identification,
            (self.flags << 13) | self.frag_offset,
            self.ttl,
            self.protocol,
            self.header_checksum,
            self.src_ip,
            self.dst_ip,
        )
        return head + self.options


@dataclass(frozen=True)
class TcpHeader:
    """Parsed TCP header.  ``emit()`` returns exactly ``data_offset * 4`` bytes."""

    src_port: int
    dst_port: int
    seq: int
    ack: int
    data_offset: int
    flags: int          # 9 control bits, NS at bit 8
    window: int
    checksum: int
    urgent_ptr: int
    options: bytes = b""
    reserved: int = 0   # 3 bits between data_offset and NS, normally zero

    def __post_init__(self) -> None:
        _check_range("src_port", self.src_port, 16)
        _check_range("dst_port", self.dst_port, 16)
        _check_range("seq", self.seq, 32)
        _check_range("ack", self.ack, 32)
        _check_range("data_offset", self.data_offset, 4)
        _check_range("flags", self.flags, 9)
        _check_range("window", self.window, 16)
        _check_range("checksum", self.checksum, 16)
        _check_range("urgent_ptr", self.urgent_ptr, 16)
        _check_range("reserved", self.reserved, 3)
        if self.data_offset < 5:
            raise ValueError(f"data_offset below minimum: {self.data_offset}")
        if len(self.options) != (self.data_offset - 5) * 4:
            raise ValueError("options length inconsistent with data_offset")

    @property
    def header_len(self) -> int:
        return self.data_offset * 4

    def emit(self) -> bytes:
        head = struct.pack(
            "!HHIIHHHH",
            self.src_port,
            self.dst_port,
            self.seq,
            self.ack,
            (self.data_offset << 12) | (self.reserved << 9) | self.flags,
            self.window,
            self.checksum,
            self.urgent_ptr,
        )
        return head + self.options


@dataclass(frozen=True)
class EthernetFrame:
    """Ethernet II frame with optional parsed IPv4/TCP views.

    ``payload`` holds the raw L2 payload bytes and is authoritative; ``ip``
    and ``tcp`` are views parsed out of it.  Construct frames through
    :func:`parse_frame` or :func:`build_tcp_frame` so the views stay
    consistent.  ``fcs``, when present, covers header plus payload and is
    appended little-endian by ``emit()``.
    """

    dst_mac: bytes
    src_mac: bytes
    ethertype: int
    payload: bytes
    fcs: Union[int, None] = None
    ip: Union[Ipv4Header, None] = None
    tcp: Union[TcpHeader, None] = None

    def __post_init__(self) -> None:
        if len(self.dst_mac) != 6 or len(self.src_mac) != 6:
            raise ValueError("MAC addresses must be 6 bytes")
        _check_range("ethertype", self.ethertype, 16)
        if self.fcs is not None:
            _check_range("fcs", self.fcs, 32)

    @property
    def tcp_payload(self) -> bytes:
        """TCP segment payload, empty when no TCP layer was parsed."""
        if self.ip is None or self.tcp is None:
            return b""
        start = self.ip.header_len + self.tcp.header_len
        return self.payload[start:self.ip.total_length]

    @property
    def ip_payload(self) -> bytes:
        """IPv4 payload bytes (TCP header included, L2 trailer excluded)."""
        if self.ip is None:
            return b""
        return self.payload[self.ip.header_len:self.ip.total_length]

    @property
    def trailer(self) -> bytes:
        """L2 padding past the IP total length (kept verbatim)."""
        if self.ip is None:
            return b""
        return self.payload[self.ip.total_length:]

    def emit(self) -> bytes:
        head = struct.pack("!6s6sH", self.dst_mac, self.src_mac, self.ethertype)
        if self.fcs is None:
            return head + self.payload
        return head + self.payload + struct.pack("<I", self.fcs)


# ---------------------------------------------------------------------------
# parsing


def _parse_tcp(segment: bytes) -> TcpHeader:
    if len(segment) < TCP_MIN_HEADER:
        raise TruncatedFrame("TCP header shorter than 20 bytes")
    sport, dport, seq, ack, off_bits, window, cksum, urg = struct.unpack(
        "!HHIIHHHH", segment[:TCP_MIN_HEADER]
    )
    data_offset = off_bits >> 12
    if data_offset < 5:
        raise TruncatedFrame(f"TCP data offset below minimum: {data_offset}")
    header_len = data_offset * 4
    if header_len > len(segment):
        raise TruncatedFrame("TCP data offset beyond segment end")
    return TcpHeader(
        src_port=sport,
        dst_port=dport,
        seq=seq,
        ack=ack,
        data_offset=data_offset,
        flags=off_bits & 0x1FF,
        window=window,
        checksum=cksum,
        urgent_ptr=urg,
        options=segment[TCP_MIN_HEADER:header_len],
        reserved=(off_bits >> 9) & 0x7,
    )


def _parse_ip_layers(payload: bytes):
    """Parse an IPv4 header (and TCP, when applicable) out of an L2 payload."""
    if len(payload) < IPV4_MIN_HEADER:
        raise TruncatedFrame("IPv4 header shorter than 20 bytes")
    (vi, tos, total_length, ident, flags_frag, ttl, proto, cksum,
     src, dst) = struct.unpack("!BBHHHBBHII", payload[:IPV4_MIN_HEADER])
    version = vi >> 4
    if version != 4:
        raise BadVersion(f"IP version {version}, expected 4")
    ihl = vi & 0x0F
    if ihl < 5:
        raise TruncatedFrame(f"IHL below minimum header size: {ihl}")
    header_len = ihl * 4
    if header_len > len(payload):
        raise TruncatedFrame("IPv4 header length beyond captured bytes")
    if total_length < header_len:
        raise TruncatedFrame("IPv4 total length below header length")
    if total_length > len(payload):
        raise TruncatedFrame("IPv4 total length beyond captured bytes")
    ip = Ipv4Header(
        version=version,
        ihl=ihl,
        tos=tos,
        total_length=total_length,
        identification=ident,
        flags=flags_frag >> 13,
        frag_offset=flags_frag & 0x1FFF,
        ttl=ttl,
        protocol=proto,
        header_checksum=cksum,
        src_ip=src,
        dst_ip=dst,
        options=payload[IPV4_MIN_HEADER:header_len],
    )
    tcp = None
    # Only an unfragmented datagram carries a parseable TCP header.
    if proto == PROTO_TCP and ip.frag_offset == 0 and not (ip.flags & IP_FLAG_MF):
        tcp = _parse_tcp(payload[header_len:total_length])
    return ip, tcp


def parse_frame(data: bytes, has_fcs: bool = False) -> EthernetFrame:
    """Parse raw bytes into an :class:`EthernetFrame`.

    ``has_fcs`` tells the parser whether the last four bytes are a
    little-endian FCS.  The stored FCS is taken verbatim (use
    :func:`fcs_ok` to validate it), so parse/emit round-trips exactly.
    """
    fcs = None
    body = bytes(data)
    if has_fcs:
        if len(body) < ETH_HEADER_LEN + 4:
            raise TruncatedFrame("frame too short to carry an FCS")
        fcs = struct.unpack("<I", body[-4:])[0]
        body = body[:-4]
    if len(body) < ETH_HEADER_LEN:
        raise TruncatedFrame("frame shorter than the Ethernet header")
    dst_mac, src_mac, ethertype = struct.unpack_from("!6s6sH", body)
    payload = body[ETH_HEADER_LEN:]
    ip = tcp = None
    if ethertype == ETHERTYPE_IPV4:
        ip, tcp = _parse_ip_layers(payload)
    return EthernetFrame(
        dst_mac=dst_mac,
        src_mac=src_mac,
        ethertype=ethertype,
        payload=payload,
        fcs=fcs,
        ip=ip,
        tcp=tcp,
    )


# ---------------------------------------------------------------------------
# checksum plumbing and mutation helpers


def ipv4_checksum(ip: Ipv4Header) -> int:
    """Header checksum value for ``ip`` (checksum field treated as zero)."""
    return internet_checksum(replace(ip, header_checksum=0).emit())


def tcp_checksum(ip: Ipv4Header, tcp: TcpHeader, payload: bytes) -> int:
    """TCP checksum over the pseudo-header, TCP header and payload."""
    header = replace(tcp, checksum=0).emit()
    pseudo = struct.pack(
        "!IIBBH", ip.src_ip, ip.dst_ip, 0, ip.protocol, len(header) + len(payload)
    )
    return internet_checksum(pseudo + header + payload)


def ipv4_checksum_ok(frame: EthernetFrame) -> bool:
    """Verify the IPv4 header checksum; vacuously true without an IP layer."""
    if frame.ip is None:
        return True
    return ipv4_checksum(frame.ip) == frame.ip.header_checksum


def tcp_checksum_ok(frame: EthernetFrame) -> bool:
    """Verify the TCP checksum; vacuously true without a TCP view.

    Frames whose covert fields mark them as fragments lose the TCP view by
    design — there is then no reassembled segment to checksum.
    """
    if frame.ip is None or frame.tcp is None:
        return True
    return tcp_checksum(frame.ip, frame.tcp, frame.tcp_payload) == frame.tcp.checksum


def fcs_ok(frame: EthernetFrame) -> bool:
    """Verify the FCS when carried; frames without one have nothing to fail."""
    if frame.fcs is None:
        return True
    head = struct.pack("!6s6sH", frame.dst_mac, frame.src_mac, frame.ethertype)
    return fcs32(head + frame.payload) == frame.fcs


def _with_l2_payload(frame: EthernetFrame, payload: bytes) -> EthernetFrame:
    """New frame with ``payload`` spliced in; views reparsed, FCS recomputed."""
    ip = tcp = None
    if frame.ethertype == ETHERTYPE_IPV4:
        ip, tcp = _parse_ip_layers(payload)
    fcs = None
    if frame.fcs is not None:
        head = struct.pack("!6s6sH", frame.dst_mac, frame.src_mac, frame.ethertype)
        fcs = fcs32(head + payload)
    return EthernetFrame(
        dst_mac=frame.dst_mac,
        src_mac=frame.src_mac,
        ethertype=frame.ethertype,
        payload=payload,
        fcs=fcs,
        ip=ip,
        tcp=tcp,
    )


def with_ip_fields(frame: EthernetFrame, **fields) -> EthernetFrame:
    """Frame with scalar IPv4 header fields replaced and checksum repaired.

    Only fixed-width fields may change (not ``options``/``ihl``), so the
    header length is stable and everything after it is untouched.
    """
    if frame.ip is None:
        raise ValueError("frame has no IPv4 layer")
    if "options" in fields or "ihl" in fields:
        raise ValueError("header-length-changing fields are not supported")
    old_len = frame.ip.header_len
    ip = replace(frame.ip, **fields)
    ip = replace(ip, header_checksum=ipv4_checksum(ip))
    return _with_l2_payload(frame, ip.emit() + frame.payload[old_len:])


def with_tcp_payload(frame: EthernetFrame, payload: bytes) -> EthernetFrame:
    """Frame with its TCP payload replaced (same length) and checksum repaired."""
    if frame.ip is None or frame.tcp is None:
        raise ValueError("frame has no TCP layer")
    if len(payload) != len(frame.tcp_payload):
        raise ValueError("replacement payload must preserve length")
    tcp = replace(frame.tcp, checksum=0)
    tcp = replace(tcp, checksum=tcp_checksum(frame.ip, tcp, payload))
    new_l2 = (
        frame.payload[:frame.ip.header_len]
        + tcp.emit()
        + payload
        + frame.trailer
    )
    return _with_l2_payload(frame, new_l2)


def strip_fcs(frame: EthernetFrame) -> EthernetFrame:
    """Frame without its FCS (captures conventionally store frames bare)."""
    if frame.fcs is None:
        return frame
    return replace(frame, fcs=None)


def ipv4(address: Union[str, int]) -> int:
    """Dotted-quad string (or pass-through int) to a 32-bit address."""
    if isinstance(address, int):
        _check_range("address", address, 32)
        return address
    parts = address.split(".")
    if len(parts) != 4:
        raise ValueError(f"not a dotted quad: {address!r}")
    value = 0
    for part in parts:
        octet = int(part)
        _check_range("octet", octet, 8)
        value = (value << 8) | octet
    return value


def ipv4_str(address: int) -> str:
    return ".".join(str((address >> shift) & 0xFF) for shift in (24, 16, 8, 0))


def mac_str(mac: bytes) -> str:
    return ":".join(f"{b:02x}" for b in mac)


def build_tcp_frame(
    *,
    src_ip: Union[str, int],
    dst_ip: Union[str, int],
    src_port: int,
    dst_port: int,
    seq: int,
    ack: int = 0,
    flags: int = TCP_ACK,
    payload: bytes = b"",
    window: int = 4096,
    urgent_ptr: int = 0,
    ttl: int = 64,
    ip_id: int = 0,
    ip_flags: int = IP_FLAG_DF,
    frag_offset: int = 0,
    tos: int = 0,
    dst_mac: bytes = b"\x02\x00\x00\x00\x00\x02",
    src_mac: bytes = b"\x02\x00\x00\x00\x00\x01",
    with_fcs: bool = False,
) -> EthernetFrame:
    """Assemble a checksummed TCP/IPv4/Ethernet frame from field values."""
    tcp = TcpHeader(
        src_port=src_port,
        dst_port=dst_port,
        seq=seq % SEQ_MOD,
        ack=ack % SEQ_MOD,
        data_offset=5,
        flags=flags,
        window=window,
        checksum=0,
        urgent_ptr=urgent_ptr,
    )
    ip = Ipv4Header(
        version=4,
        ihl=5,
        tos=tos,
        total_length=IPV4_MIN_HEADER + tcp.header_len + len(payload),
        identification=ip_id,
        flags=ip_flags,
        frag_offset=frag_offset,
        ttl=ttl,
        protocol=PROTO_TCP,
        header_checksum=0,
        src_ip=ipv4(src_ip),
        dst_ip=ipv4(dst_ip),
    )
    ip = replace(ip, header_checksum=ipv4_checksum(ip))
    tcp = replace(tcp, checksum=tcp_checksum(ip, tcp, payload))
    l2_payload = ip.emit() + tcp.emit() + payload
    fcs = None
    if with_fcs:
        fcs = fcs32(struct.pack("!6s6sH", dst_mac, src_mac, ETHERTYPE_IPV4) + l2_payload)
    return EthernetFrame(
        dst_mac=dst_mac,
        src_mac=src_mac,
        ethertype=ETHERTYPE_IPV4,
        payload=l2_payload,
        fcs=fcs,
        ip=ip,
        tcp=tcp,
    )


# ---------------------------------------------------------------------------
# classic pcap


PCAP_MAGIC = 0xA1B2C3D4
PCAP_VERSION = (2, 4)
LINKTYPE_ETHERNET = 1
_GLOBAL_HEADER = struct.Struct("<IHHiIII")
_RECORD_HEADER = struct.Struct("<IIII")


@dataclass(frozen=True)
class PcapRecord:
    """One captured frame: microsecond timestamp plus raw bytes (no FCS)."""

    ts_sec: int
    ts_usec: int
    frame_bytes: bytes
    orig_len: Union[int, None] = None

    def __post_init__(self) -> None:
        if self.ts_sec < 0 or not 0 <= self.ts_usec < 1_000_000:
            raise ValueError("timestamp out of range")
        if self.orig_len is None:
            object.__setattr__(self, "orig_len", len(self.frame_bytes))

    @property
    def incl_len(self) -> int:
        return len(self.frame_bytes)


@dataclass(frozen=True)
class PcapFile:
    """A classic pcap: Ethernet records plus the global-header knobs."""

    records: tuple = ()
    snaplen: int = 65535
    linktype: int = LINKTYPE_ETHERNET
    thiszone: int = 0
    sigfigs: int = 0


def ns_to_pcap_ts(t_ns: int) -> tuple:
    """Integer nanoseconds to a (seconds, microseconds) pcap timestamp."""
    return t_ns // 1_000_000_000, (t_ns % 1_000_000_000) // 1_000


def write_pcap(out: Union[str, BinaryIO], pcap) -> None:
    """Write a :class:`PcapFile` (or iterable of records) as little-endian pcap."""
    if not isinstance(pcap, PcapFile):
        pcap = PcapFile(records=tuple(pcap))
        if pcap.snaplen < 1514:
            raise ValueError("snaplen below a full Ethernet frame")
    if pcap.linktype != LINKTYPE_ETHERNET:
        raise UnsupportedLinktype(f"linktype {pcap.linktype}")
    close = False
    if isinstance(out, str):
        out = open(out, "wb")
        close = True
    try:
        out.write(
            _GLOBAL_HEADER.pack(
                PCAP_MAGIC,
                PCAP_VERSION[0],
                PCAP_VERSION[1],
                pcap.thiszone,
                pcap.sigfigs,
                pcap.snaplen,
                pcap.linktype,
            )
        )
        for rec in pcap.records:
            out.write(
                _RECORD_HEADER.pack(rec.ts_sec, rec.ts_usec, rec.incl_len, rec.orig_len)
            )
            out.write(rec.frame_bytes)
    finally:
        if close:
            out.close()


def read_pcap(source: Union[str, bytes, BinaryIO]) -> PcapFile:
    """Read a classic pcap (either byte order); records come back in file order."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()

    if len(data) < 4:
        raise BadMagic("file too short for a pcap magic number")
    magic_le = struct.unpack_from("<I", data)[0]
    if magic_le == PCAP_MAGIC:
        endian = "<"
    elif struct.unpack_from(">I", data)[0] == PCAP_MAGIC:
        endian = ">"
    else:
        raise BadMagic(f"unknown magic 0x{magic_le:08X}")
    if len(data) < _GLOBAL_HEADER.size:
        raise TruncatedRecord("global header truncated")
    header = struct.Struct(endian + "IHHiIII")
    _, _, _, thiszone, sigfigs, snaplen, linktype = header.unpack_from(data)
    if linktype != LINKTYPE_ETHERNET:
        raise UnsupportedLinktype(f"linktype {linktype}")

    record_header = struct.Struct(endian + "IIII")
    records = []
    offset = header.size
    while offset < len(data):
        if offset + record_header.size > len(data):
            raise TruncatedRecord("record header truncated")
        ts_sec, ts_usec, incl_len, orig_len = record_header.unpack_from(data, offset)
        offset += record_header.size
        if offset + incl_len > len(data):
            raise TruncatedRecord("record body truncated")
        records.append(
            PcapRecord(
                ts_sec=ts_sec,
                ts_usec=ts_usec,
                frame_bytes=data[offset:offset + incl_len],
                orig_len=orig_len,
            )
        )
        offset += incl_len
    return PcapFile(
        records=tuple(records),
        snaplen=snaplen,
        linktype=linktype,
        thiszone=thiszone,
        sigfigs=sigfigs,
    )
