"""Wire codec tests.

Every numeric expectation here is produced by an independent oracle written
in this file (naive big-endian checksum loop, bit-serial CRC-32, direct
struct packing) or is a published constant of the algorithm itself
(0xB861 verification vector, 0xCBF43926 CRC check value, 0x2144DF1C CRC
residue).  The implementation under test never computes its own expected
values.
"""

import io
import random
import struct

import pytest
from hypothesis import given, strategies as st

from netsteglab.wirecodec import (
    BadMagic,
    BadVersion,
    EthernetFrame,
    Ipv4Header,
    PcapFile,
    PcapRecord,
    TcpHeader,
    TruncatedFrame,
    TruncatedRecord,
    UnsupportedLinktype,
    build_tcp_frame,
    fcs32,
    fcs_ok,
    internet_checksum,
    ipv4,
    ipv4_checksum,
    ipv4_checksum_ok,
    ipv4_str,
    mac_str,
    ns_to_pcap_ts,
    parse_frame,
    read_pcap,
    strip_fcs,
    tcp_checksum,
    tcp_checksum_ok,
    with_ip_fields,
    with_tcp_payload,
    write_pcap,
)


# ---------------------------------------------------------------------------
# oracles


def checksum_oracle(data: bytes) -> int:
    """One's-complement sum of big-endian 16-bit words, complemented."""
    if len(data) % 2:
        data = data + b"\x00"
    total = 0
    for i in range(0, len(data), 2):
        total += (data[i] << 8) | data[i + 1]
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def crc32_oracle(data: bytes) -> int:
    """Bit-serial reflected CRC-32, polynomial 0xEDB88320."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


def tcp_checksum_oracle(frame: EthernetFrame) -> int:
    """Recompute the TCP checksum from raw bytes via the naive word loop."""
    ip = frame.ip
    segment = bytearray(frame.ip_payload[: ip.total_length - ip.header_len])
    segment[16:18] = b"\x00\x00"  # zero the checksum field
    pseudo = struct.pack(
        "!IIBBH", ip.src_ip, ip.dst_ip, 0, ip.protocol, len(segment)
    )
    return checksum_oracle(pseudo + bytes(segment))


# ---------------------------------------------------------------------------
# internet checksum


def test_checksum_of_zeros_is_all_ones():
    assert internet_checksum(bytes(20)) == 0xFFFF


def test_checksum_classic_header_vector():
    # The widely used worked example of the header checksum algorithm.
    header = bytes.fromhex("450000730000400040110000c0a80001c0a800c7")
    assert checksum_oracle(header) == 0xB861  # oracle agrees with the classic
    assert internet_checksum(header) == 0xB861


def test_checksum_verifies_to_zero_over_checksummed_header():
    header = bytes.fromhex("45000073000040004011b861c0a80001c0a800c7")
    assert internet_checksum(header) == 0


@given(st.binary(max_size=200))
def test_checksum_matches_oracle(data):
    assert internet_checksum(data) == checksum_oracle(data)


@given(st.binary(min_size=2, max_size=120).filter(lambda b: len(b) % 2 == 0))
def test_checksum_appended_verifies_to_zero(data):
    c = internet_checksum(data)
    assert internet_checksum(data + struct.pack("!H", c)) in (0, 0xFFFF)


def test_checksum_odd_length_matches_oracle():
    data = b"\x01\x02\x03"
    assert internet_checksum(data) == checksum_oracle(data)


# ---------------------------------------------------------------------------
# CRC-32 / FCS


def test_crc_check_value():
    assert fcs32(b"123456789") == 0xCBF43926
    assert crc32_oracle(b"123456789") == 0xCBF43926


def test_crc_empty():
    assert fcs32(b"") == 0


def test_crc_matches_bit_serial_oracle_on_random_inputs():
    rng = random.Random(1234)
    for _ in range(1000):
        data = rng.randbytes(rng.randrange(0, 64))
        assert fcs32(data) == crc32_oracle(data)


@given(st.binary(max_size=100))
def test_crc_residue(data):
    # Appending the little-endian CRC always leaves the fixed residue.
    assert fcs32(data + struct.pack("<I", fcs32(data))) == 0x2144DF1C


# ---------------------------------------------------------------------------
# header golden bytes (independent struct packing)


def test_ipv4_header_golden_bytes():
    hdr = Ipv4Header(
        version=4, ihl=5, tos=0x10, total_length=0x0234, identification=0xBEEF,
        flags=0b010, frag_offset=0, ttl=63, protocol=6, header_checksum=0x1234,
        src_ip=ipv4("192.168.0.1"), dst_ip=ipv4("10.1.2.3"),
    )
    expected = struct.pack(
        "!BBHHHBBHII",
        0x45, 0x10, 0x0234, 0xBEEF, (0b010 << 13) | 0, 63, 6, 0x1234,
        0xC0A80001, 0x0A010203,
    )
    assert hdr.emit() == expected


def test_ipv4_flags_and_offset_packing():
    hdr = Ipv4Header(
        version=4, ihl=5, tos=0, total_length=20, identification=0,
        flags=0b101, frag_offset=0x1EEF, ttl=64, protocol=6,
        header_checksum=0, src_ip=0, dst_ip=0,
    )
    word = struct.unpack("!H", hdr.emit()[6:8])[0]
    assert word == (0b101 << 13) | 0x1EEF == 0xBEEF


def test_tcp_header_golden_bytes_with_ns_bit():
    hdr = TcpHeader(
        src_port=0x1F90, dst_port=0x0050, seq=0x11223344, ack=0x55667788,
        data_offset=5, flags=0x1FF, window=0xFFFF, checksum=0xABCD,
        urgent_ptr=7,
    )
    expected = struct.pack(
        "!HHIIHHHH",
        0x1F90, 0x0050, 0x11223344, 0x55667788,
        (5 << 12) | 0x1FF, 0xFFFF, 0xABCD, 7,
    )
    assert hdr.emit() == expected


def test_tcp_reserved_bits_round_trip():
    hdr = TcpHeader(
        src_port=1, dst_port=2, seq=3, ack=4, data_offset=5,
        flags=0x010, window=10, checksum=0, urgent_ptr=0, reserved=0b101,
    )
    word = struct.unpack("!H", hdr.emit()[12:14])[0]
    assert word == (5 << 12) | (0b101 << 9) | 0x010


def test_ipv4_rejects_out_of_range_fields():
    with pytest.raises(ValueError):
        Ipv4Header(
            version=4, ihl=5, tos=0, total_length=20, identification=1 << 16,
            flags=0, frag_offset=0, ttl=64, protocol=6, header_checksum=0,
            src_ip=0, dst_ip=0,
        )
    with pytest.raises(ValueError):
        Ipv4Header(
            version=4, ihl=5, tos=0, total_length=20, identification=0,
            flags=8, frag_offset=0, ttl=64, protocol=6, header_checksum=0,
            src_ip=0, dst_ip=0,
        )


# ---------------------------------------------------------------------------
# frame round-trips


def _random_frame(rng: random.Random, *, with_fcs: bool, payload: bytes = None) -> EthernetFrame:
    if payload is None:
        payload = rng.randbytes(rng.randrange(0, 80))
    return build_tcp_frame(
        src_ip=rng.randrange(1 << 32), dst_ip=rng.randrange(1 << 32),
        src_port=rng.randrange(1 << 16), dst_port=rng.randrange(1 << 16),
        seq=rng.randrange(1 << 32), ack=rng.randrange(1 << 32),
        flags=rng.randrange(1, 1 << 9), payload=payload,
        window=rng.randrange(1, 1 << 16), ttl=rng.randrange(1, 256),
        ip_id=rng.randrange(1 << 16), tos=rng.randrange(256),
        with_fcs=with_fcs,
    )


@given(st.integers(min_value=0, max_value=10_000), st.booleans())
def test_frame_emit_parse_round_trip(seed, with_fcs):
    rng = random.Random(seed)
    frame = _random_frame(rng, with_fcs=with_fcs)
    wire = frame.emit()
    back = parse_frame(wire, has_fcs=with_fcs)
    assert back == frame
    assert back.emit() == wire


def test_parse_emit_is_byte_identity_on_foreign_bytes():
    # Frame bytes not produced by our builder: options and a trailer.
    ip_options = b"\x01\x01\x01\x00"  # NOP NOP NOP EOL
    ip = Ipv4Header(
        version=4, ihl=6, tos=0, total_length=24 + 20 + 5, identification=9,
        flags=0b010, frag_offset=0, ttl=64, protocol=6, header_checksum=0,
        src_ip=ipv4("1.2.3.4"), dst_ip=ipv4("5.6.7.8"), options=ip_options,
    )
    tcp = TcpHeader(
        src_port=80, dst_port=1024, seq=1, ack=2, data_offset=5, flags=0x18,
        window=100, checksum=0, urgent_ptr=0,
    )
    payload = b"hello"
    trailer = b"\x00\x00\x00\x00\x00\x00\x00"  # pad below 64-byte minimum
    wire = (
        b"\xaa\xbb\xcc\xdd\xee\xff" + b"\x11\x22\x33\x44\x55\x66"
        + struct.pack("!H", 0x0800)
        + ip.emit() + tcp.emit() + payload + trailer
    )
    frame = parse_frame(wire)
    assert frame.emit() == wire
    assert frame.ip.options == ip_options
    assert frame.tcp_payload == payload
    assert frame.trailer == trailer


def test_tcp_view_absent_for_fragments_and_non_tcp():
    frame = build_tcp_frame(
        src_ip="1.1.1.1", dst_ip="2.2.2.2", src_port=1, dst_port=2, seq=0,
        payload=b"xy",
    )
    wire = bytearray(frame.emit())
    # Not TCP protocol.
    not_tcp = wire.copy()
    not_tcp[14 + 9] = 17  # UDP
    not_tcp[14 + 10:14 + 12] = b"\x00\x00"
    parsed = parse_frame(bytes(not_tcp))
    assert parsed.ip is not None and parsed.tcp is None
    # Nonzero fragment offset.
    fragged = wire.copy()
    fragged[14 + 6:14 + 8] = struct.pack("!H", (0b010 << 13) | 5)
    assert parse_frame(bytes(fragged)).tcp is None
    # More-fragments flag set.
    mf = wire.copy()
    mf[14 + 6:14 + 8] = struct.pack("!H", (0b001 << 13) | 0)
    assert parse_frame(bytes(mf)).tcp is None


def test_parse_errors():
    frame = build_tcp_frame(
        src_ip="1.1.1.1", dst_ip="2.2.2.2", src_port=1, dst_port=2, seq=0,
    )
    wire = frame.emit()
    with pytest.raises(TruncatedFrame):
        parse_frame(wire[:10])
    with pytest.raises(TruncatedFrame):
        parse_frame(wire[:20])  # ethernet ok, IP header cut
    bad_version = bytearray(wire)
    bad_version[14] = 0x65
    with pytest.raises(BadVersion):
        parse_frame(bytes(bad_version))
    short_total = bytearray(wire)
    short_total[14 + 2:14 + 4] = struct.pack("!H", 19)  # below header length
    with pytest.raises(TruncatedFrame):
        parse_frame(bytes(short_total))


def test_non_ip_ethertype_passes_through():
    wire = b"\x01" * 6 + b"\x02" * 6 + struct.pack("!H", 0x0806) + b"arp-body"
    frame = parse_frame(wire)
    assert frame.ip is None and frame.tcp is None
    assert frame.emit() == wire


# ---------------------------------------------------------------------------
# checksum construction and verification


@given(st.integers(min_value=0, max_value=10_000))
def test_built_frames_have_valid_checksums(seed):
    rng = random.Random(seed)
    frame = _random_frame(rng, with_fcs=True)
    assert ipv4_checksum_ok(frame)
    assert tcp_checksum_ok(frame)
    assert fcs_ok(frame)
    # Independent recomputation from raw bytes.
    raw_ip_header = frame.payload[: frame.ip.header_len]
    assert checksum_oracle(raw_ip_header) == 0
    assert tcp_checksum_oracle(frame) == frame.tcp.checksum


def test_fcs_matches_bit_serial_oracle():
    frame = build_tcp_frame(
        src_ip="1.2.3.4", dst_ip="5.6.7.8", src_port=1, dst_port=2, seq=0,
        payload=b"payload", with_fcs=True,
    )
    wire = frame.emit()
    assert struct.unpack("<I", wire[-4:])[0] == crc32_oracle(wire[:-4])
    # The receiver check: CRC over frame + FCS leaves the residue.
    assert crc32_oracle(wire) == 0x2144DF1C


def test_corrupted_frame_fails_verification():
    frame = build_tcp_frame(
        src_ip="1.2.3.4", dst_ip="5.6.7.8", src_port=9, dst_port=10, seq=11,
        payload=b"abcdef", with_fcs=True,
    )
    wire = bytearray(frame.emit())
    wire[-6] ^= 0x01  # flip a payload bit
    corrupted = parse_frame(bytes(wire), has_fcs=True)
    assert not tcp_checksum_ok(corrupted)
    assert not fcs_ok(corrupted)


# ---------------------------------------------------------------------------
# surgical mutators


def _changed_offsets(a: bytes, b: bytes):
    assert len(a) == len(b)
    return {i for i, (x, y) in enumerate(zip(a, b)) if x != y}


def test_with_ip_fields_changes_only_named_fields_and_checksums():
    frame = build_tcp_frame(
        src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000, dst_port=8080,
        seq=100, payload=b"0123456789", with_fcs=True,
    )
    out = with_ip_fields(frame, ttl=7, identification=0xABCD)
    assert out.ip.ttl == 7 and out.ip.identification == 0xABCD
    assert ipv4_checksum_ok(out) and tcp_checksum_ok(out) and fcs_ok(out)
    changed = _changed_offsets(frame.emit(), out.emit())
    ip0 = 14
    allowed = {ip0 + 4, ip0 + 5, ip0 + 8}  # identification, ttl
    allowed |= {ip0 + 10, ip0 + 11}  # IP header checksum
    wire_len = len(frame.emit())
    allowed |= set(range(wire_len - 4, wire_len))  # FCS
    assert changed <= allowed
    assert out.tcp_payload == frame.tcp_payload


def test_with_ip_fields_ttl_does_not_touch_tcp_checksum():
    frame = build_tcp_frame(
        src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=1, dst_port=2,
        seq=5, payload=b"zz",
    )
    out = with_ip_fields(frame, ttl=1)
    assert out.tcp.checksum == frame.tcp.checksum


def test_with_ip_fields_rejects_structural_changes():
    frame = build_tcp_frame(
        src_ip="1.1.1.1", dst_ip="2.2.2.2", src_port=1, dst_port=2, seq=0,
    )
    with pytest.raises(ValueError):
        with_ip_fields(frame, ihl=6)
    with pytest.raises(ValueError):
        with_ip_fields(frame, options=b"\x01\x01\x01\x00")


def test_with_tcp_payload_repairs_checksum_and_fcs():
    frame = build_tcp_frame(
        src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000, dst_port=8080,
        seq=1000, payload=b"AAAABBBB", with_fcs=True,
    )
    out = with_tcp_payload(frame, b"AAAACBBB")
    assert out.tcp_payload == b"AAAACBBB"
    assert tcp_checksum_ok(out) and fcs_ok(out)
    assert tcp_checksum_oracle(out) == out.tcp.checksum
    changed = _changed_offsets(frame.emit(), out.emit())
    payload_start = 14 + 20 + 20
    wire_len = len(frame.emit())
    allowed = {payload_start + 4}  # the changed byte
    allowed |= {14 + 20 + 16, 14 + 20 + 17}  # TCP checksum
    allowed |= set(range(wire_len - 4, wire_len))  # FCS
    assert changed <= allowed


def test_with_tcp_payload_requires_equal_length():
    frame = build_tcp_frame(
        src_ip="1.1.1.1", dst_ip="2.2.2.2", src_port=1, dst_port=2, seq=0,
        payload=b"abc",
    )
    with pytest.raises(ValueError):
        with_tcp_payload(frame, b"abcd")


def test_strip_fcs():
    frame = build_tcp_frame(
        src_ip="1.1.1.1", dst_ip="2.2.2.2", src_port=1, dst_port=2, seq=0,
        with_fcs=True,
    )
    bare = strip_fcs(frame)
    assert bare.fcs is None
    assert bare.emit() == frame.emit()[:-4]
    assert strip_fcs(bare) is bare


# ---------------------------------------------------------------------------
# address helpers


def test_ipv4_conversions():
    assert ipv4("192.168.0.1") == 0xC0A80001
    assert ipv4(0xC0A80001) == 0xC0A80001
    assert ipv4_str(0xC0A80001) == "192.168.0.1"
    with pytest.raises(ValueError):
        ipv4("256.0.0.1")
    with pytest.raises(ValueError):
        ipv4("1.2.3")


def test_mac_str():
    assert mac_str(b"\x02\x00\x00\x00\x00\x01") == "02:00:00:00:00:01"


# ---------------------------------------------------------------------------
# pcap


def _sample_frames():
    return [
        build_tcp_frame(
            src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000,
            dst_port=8080, seq=i, payload=bytes([i]) * (i + 1),
        ).emit()
        for i in range(3)
    ]


def test_pcap_golden_bytes():
    frames = _sample_frames()
    records = [
        PcapRecord(ts_sec=1, ts_usec=500000, frame_bytes=frames[0]),
        PcapRecord(ts_sec=2, ts_usec=0, frame_bytes=frames[1]),
    ]
    expected = struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, 1)
    expected += struct.pack("<IIII", 1, 500000, len(frames[0]), len(frames[0]))
    expected += frames[0]
    expected += struct.pack("<IIII", 2, 0, len(frames[1]), len(frames[1]))
    expected += frames[1]
    buf = io.BytesIO()
    write_pcap(buf, PcapFile(records=tuple(records)))
    assert buf.getvalue() == expected


def test_pcap_write_read_round_trip():
    frames = _sample_frames()
    records = tuple(
        PcapRecord(ts_sec=i, ts_usec=i * 7, frame_bytes=f)
        for i, f in enumerate(frames)
    )
    original = PcapFile(records=records, snaplen=2048, thiszone=-3600, sigfigs=6)
    buf = io.BytesIO()
    write_pcap(buf, original)
    back = read_pcap(buf.getvalue())
    assert back == original
    # Byte-identical re-serialization.
    buf2 = io.BytesIO()
    write_pcap(buf2, back)
    assert buf2.getvalue() == buf.getvalue()


def test_pcap_reads_big_endian():
    frame = _sample_frames()[0]
    data = struct.pack(">IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, 1)
    data += struct.pack(">IIII", 10, 20, len(frame), len(frame))
    data += frame
    capture = read_pcap(data)
    assert len(capture.records) == 1
    rec = capture.records[0]
    assert (rec.ts_sec, rec.ts_usec) == (10, 20)
    assert rec.frame_bytes == frame


def test_pcap_bad_magic():
    with pytest.raises(BadMagic):
        read_pcap(b"\x00\x01\x02\x03" + bytes(20))


def test_pcap_unsupported_linktype():
    data = struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, 101)
    with pytest.raises(UnsupportedLinktype):
        read_pcap(data)


def test_pcap_truncated_record():
    frame = _sample_frames()[0]
    data = struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, 1)
    data += struct.pack("<IIII", 0, 0, len(frame), len(frame))
    data += frame[:-1]
    with pytest.raises(TruncatedRecord):
        read_pcap(data)
    with pytest.raises(TruncatedRecord):
        read_pcap(data[: 24 + 8])  # record header itself cut


def test_pcap_file_io(tmp_path):
    path = tmp_path / "t.pcap"
    frames = _sample_frames()
    records = tuple(
        PcapRecord(ts_sec=0, ts_usec=i, frame_bytes=f) for i, f in enumerate(frames)
    )
    write_pcap(str(path), PcapFile(records=records))
    back = read_pcap(str(path))
    assert [r.frame_bytes for r in back.records] == frames


def test_ns_to_pcap_ts():
    assert ns_to_pcap_ts(0) == (0, 0)
    assert ns_to_pcap_ts(1_500_000_000) == (1, 500_000)
    assert ns_to_pcap_ts(999) == (0, 0)  # sub-microsecond truncates
