"""In-flight steganographic embedding for BMP payloads inside TCP streams.

A middlebox sits on the path, reassembles just enough of each TCP flow to
recognize a BMP transfer from its first 54 stream bytes, then rewrites the
least significant bit of every carrier byte that crosses it: each pixel's
red byte at 24 bpp, every pixel byte at 8 bpp, row padding never.  The TCP
checksum and (when carried) the Ethernet FCS are repaired, nothing else in
the frame changes.

The bit written at carrier index ``i`` is a pure function of ``i`` and the
policy — never of arrival order — so retransmitted, reordered or
differently-segmented traffic embeds identically, and a receiver holding
the same :class:`StegoPolicy` can extract from the reassembled file alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import floor
from typing import Dict, List, Optional, Sequence, Tuple

from .bmp import BmpInfo, NotBmp, UnsupportedBpp, parse_bmp_info
from .channels import BitMessage
from .wirecodec import (
    EthernetFrame,
    SEQ_MOD,
    TCP_SYN,
    ipv4_str,
    with_tcp_payload,
)

STASH_LEN = 64           # stream bytes kept for classification
CLASSIFY_NEED = 54       # BMP header prefix that must be present

__all__ = [
    "FlowKey",
    "FlowState",
    "FlowReport",
    "StegoPolicy",
    "Interceptor",
    "track",
    "classify_payload",
    "carrier_offsets",
    "embed_in_frame",
    "extract_from_file",
    "process_stream",
    "report_csv",
    "NotBmp",
    "UnsupportedBpp",
]


@dataclass(frozen=True)
class FlowKey:
    """Direction-sensitive TCP flow identity."""

    src_ip: int
    dst_ip: int
    src_port: int
    dst_port: int

    def __str__(self) -> str:
        return (
            f"{ipv4_str(self.src_ip)}:{self.src_port}"
            f"->{ipv4_str(self.dst_ip)}:{self.dst_port}"
        )


@dataclass
class FlowState:
    """Mutable per-flow tracking state (single writer per flow)."""

    base_seq: int
    bytes_seen: int = 0
    bmp: Optional[BmpInfo] = None
    header_stash: bytearray = field(default_factory=lambda: bytearray(STASH_LEN))
    stash_mask: int = 0
    classify_done: bool = False
    frames_seen: int = 0
    frames_modified: int = 0
    carrier_bits: int = 0
    skipped: set = field(default_factory=set)
    pending_ranges: list = field(default_factory=list)


@dataclass(frozen=True)
class FlowReport:
    flow: str
    frames_seen: int
    frames_modified: int
    carrier_bits: int
    skipped_bits: int


@lru_cache(maxsize=128)
def _keystream_block(seed: int, block: int) -> int:
    return random.Random(f"{seed}/{block}").getrandbits(4096)


@dataclass(frozen=True)
class StegoPolicy:
    """What to embed and how densely.

    Exactly one bit source: a finite ``message`` (repeated cyclically past
    its length) or a seeded ``keystream``.  ``coverage`` subsamples carriers
    with a deterministic even spread — carrier ``i`` is touched iff
    ``floor((i+1)*c) > floor(i*c)`` — so selection and bit lookup stay pure
    functions of the carrier index and both ends compute them identically.
    """

    message: Optional[BitMessage] = None
    keystream_seed: Optional[int] = None
    coverage: float = 1.0

    def __post_init__(self) -> None:
        if (self.message is None) == (self.keystream_seed is None):
            raise ValueError("exactly one of message/keystream_seed required")
        if self.message is not None and len(self.message) == 0:
            raise ValueError("message must be non-empty")
        if not 0.0 < self.coverage <= 1.0:
            raise ValueError("coverage must be in (0, 1]")

    def selected(self, index: int) -> bool:
        c = self.coverage
        return c >= 1.0 or floor((index + 1) * c) > floor(index * c)

    def rank(self, index: int) -> int:
        """How many carriers below ``index`` are selected."""
        c = self.coverage
        return index if c >= 1.0 else floor(index * c)

    def source_bit(self, j: int) -> int:
        """The ``j``-th bit of the embedding source."""
        if self.message is not None:
            return self.message[j % len(self.message)]
        return (_keystream_block(self.keystream_seed, j >> 12) >> (j & 0xFFF)) & 1

    def bit_at(self, index: int) -> int:
        """The bit written at carrier index ``index`` (pure in ``index``)."""
        return self.source_bit(self.rank(index))

    def source_bits(self, n: int) -> BitMessage:
        return BitMessage(self.source_bit(j) for j in range(n))


# ---------------------------------------------------------------------------
# flow tracking


def track(
    frame: EthernetFrame, flows: Dict[FlowKey, FlowState]
) -> Tuple[FlowKey, FlowState, Tuple[int, int]]:
    """Match a TCP frame to its flow and return its stream byte range.

    A flow is created on SYN (``base_seq = ISN + 1``) or anchored at the
    first data frame seen.  Offsets are sequence numbers relative to
    ``base_seq`` modulo 2**32, so retransmits map to identical ranges.
    """
    if frame.ip is None or frame.tcp is None:
        raise ValueError("track needs a TCP frame")
    tcp = frame.tcp
    key = FlowKey(frame.ip.src_ip, frame.ip.dst_ip, tcp.src_port, tcp.dst_port)
    state = flows.get(key)
    if state is None:
        if tcp.flags & TCP_SYN:
            state = FlowState(base_seq=(tcp.seq + 1) % SEQ_MOD)
        else:
            state = FlowState(base_seq=tcp.seq)
        flows[key] = state
    if tcp.flags & TCP_SYN:
        return key, state, (0, 0)
    payload_len = len(frame.tcp_payload)
    start = (tcp.seq - state.base_seq) % SEQ_MOD
    end = start + payload_len
    if payload_len:
        state.bytes_seen = max(state.bytes_seen, end)
    return key, state, (start, end)


def classify_payload(state: FlowState) -> Optional[BmpInfo]:
    """Classify a flow from its header stash (stream bytes [0, 54) required).

    Returns the BMP geometry, ``None`` for non-BMP payloads, and raises
    :class:`UnsupportedBpp` for BMPs at depths the engine cannot address.
    """
    need = (1 << CLASSIFY_NEED) - 1
    if state.stash_mask & need != need:
        raise ValueError("header stash incomplete; need stream bytes [0, 54)")
    header = bytes(state.header_stash[:CLASSIFY_NEED])
    try:
        return parse_bmp_info(header)
    except NotBmp:
        return None


# ---------------------------------------------------------------------------
# carrier addressing


def carrier_offsets(bmp: BmpInfo, start: int, end: int) -> List[Tuple[int, int]]:
    """Carrier positions intersecting stream range [start, end).

    Returns ``(stream_position, carrier_index)`` pairs in stream order.
    The carrier index counts carriers from the start of the pixel data
    (row * width + pixel), independent of the queried range.
    """
    start = max(start, bmp.pixel_offset)
    end = min(end, bmp.pixel_data_end)
    if start >= end:
        return []
    stride = bmp.row_stride
    width = bmp.width
    out: List[Tuple[int, int]] = []
    first_row = (start - bmp.pixel_offset) // stride
    last_row = (end - 1 - bmp.pixel_offset) // stride
    for row in range(first_row, last_row + 1):
        row_base = bmp.pixel_offset + row * stride
        if bmp.bytes_per_pixel == 3:
            # red lives at the third byte of each BGR triple
            p_lo = max(0, -((start - row_base - 2) // -3))
            p_hi = min(width, (end - row_base - 3) // 3 + 1)
            base_index = row * width
            for p in range(p_lo, p_hi):
                out.append((row_base + 3 * p + 2, base_index + p))
        else:
            p_lo = max(0, start - row_base)
            p_hi = min(width, end - row_base)
            base_index = row * width
            for p in range(p_lo, p_hi):
                out.append((row_base + p, base_index + p))
    return out


# ---------------------------------------------------------------------------
# embedding


def _embed(
    frame: EthernetFrame, state: FlowState, policy: StegoPolicy
) -> Tuple[EthernetFrame, List[int]]:
    if state.bmp is None:
        return frame, []
    payload = frame.tcp_payload
    if not payload:
        return frame, []
    start = (frame.tcp.seq - state.base_seq) % SEQ_MOD
    positions = carrier_offsets(state.bmp, start, start + len(payload))
    if not positions:
        return frame, []
    buf = bytearray(payload)
    written: List[int] = []
    for pos, index in positions:
        if not policy.selected(index):
            continue
        i = pos - start
        buf[i] = (buf[i] & 0xFE) | policy.bit_at(index)
        written.append(index)
    if not written:
        return frame, []
    new_payload = bytes(buf)
    if new_payload == payload:
        return frame, written  # bits already matched; nothing to rewrite
    return with_tcp_payload(frame, new_payload), written


def embed_in_frame(
    frame: EthernetFrame, state: FlowState, policy: StegoPolicy
) -> EthernetFrame:
    """Embed policy bits into the frame's carrier bytes; repair checksums.

    Pure in (stream offset, policy): the same frame embeds to the same
    bytes no matter when or how often it passes.  Frames overlapping no
    carrier positions come back unchanged (the identical object).
    """
    new_frame, _ = _embed(frame, state, policy)
    return new_frame


# ---------------------------------------------------------------------------
# the middlebox


class Interceptor:
    """Stateful in-path processor: track flows, classify payloads, embed."""

    def __init__(self, policy: StegoPolicy):
        self.policy = policy
        self.flows: Dict[FlowKey, FlowState] = {}

    def process(self, frame: EthernetFrame) -> EthernetFrame:
        """Handle one frame; non-TCP or non-carrier traffic passes untouched."""
        if frame.ip is None or frame.tcp is None:
            return frame
        key, state, (start, end) = track(frame, self.flows)
        state.frames_seen += 1
        has_payload = end > start
        if not state.classify_done and has_payload:
            self._stash(state, start, frame.tcp_payload)
            need = (1 << CLASSIFY_NEED) - 1
            if state.stash_mask & need == need:
                state.classify_done = True
                try:
                    state.bmp = classify_payload(state)
                except UnsupportedBpp:
                    state.bmp = None
                if state.bmp is not None:
                    for lo, hi in state.pending_ranges:
                        for _, index in carrier_offsets(state.bmp, lo, hi):
                            if self.policy.selected(index):
                                state.skipped.add(index)
                state.pending_ranges.clear()
        if state.bmp is None:
            if not state.classify_done and has_payload:
                # Can't tell yet whether this is a carrier: let it through,
                # remember what we may have missed.
                state.pending_ranges.append((start, end))
            return frame
        new_frame, written = _embed(frame, state, self.policy)
        if written:
            state.carrier_bits += len(written)
            if state.skipped:
                state.skipped.difference_update(written)
            if new_frame is not frame:
                state.frames_modified += 1
        return new_frame

    def tap(self, frame: EthernetFrame, direction: str, t_ns: int) -> EthernetFrame:
        """Adapter matching the simulator's in-flight hook signature."""
        return self.process(frame)

    def flow_reports(self) -> List[FlowReport]:
        return [
            FlowReport(
                flow=str(key),
                frames_seen=state.frames_seen,
                frames_modified=state.frames_modified,
                carrier_bits=state.carrier_bits,
                skipped_bits=len(state.skipped),
            )
            for key, state in self.flows.items()
        ]

    @staticmethod
    def _stash(state: FlowState, start: int, payload: bytes) -> None:
        if start >= STASH_LEN:
            return
        take = min(STASH_LEN - start, len(payload))
        state.header_stash[start:start + take] = payload[:take]
        state.stash_mask |= ((1 << take) - 1) << start


def process_stream(
    frames: Sequence[EthernetFrame], policy: StegoPolicy
) -> Tuple[List[EthernetFrame], List[FlowReport]]:
    """Run a frame sequence through a fresh interceptor.

    Frame order and count are preserved; only carrier LSBs (plus repaired
    checksums/FCS) may differ.  Flows that cannot be classified from what
    arrived pass through unmodified.
    """
    interceptor = Interceptor(policy)
    out = [interceptor.process(frame) for frame in frames]
    return out, interceptor.flow_reports()


def report_csv(reports: Sequence[FlowReport]) -> str:
    lines = ["flow,frames_seen,frames_modified,carrier_bits,skipped_bits"]
    for r in reports:
        lines.append(
            f"{r.flow},{r.frames_seen},{r.frames_modified},"
            f"{r.carrier_bits},{r.skipped_bits}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# receiver side


def extract_from_file(data: bytes, policy: StegoPolicy) -> BitMessage:
    """Read embedded bits back from a reassembled file.

    Walks the same carrier positions the embedder addresses, in carrier
    index order, honoring the policy's coverage subsampling.  The result
    holds one bit per selected carrier; compare a prefix against the
    original message.
    """
    info = parse_bmp_info(data)
    end = min(info.pixel_data_end, len(data))
    bits = []
    for pos, index in carrier_offsets(info, info.pixel_offset, end):
        if policy.selected(index):
            bits.append(data[pos] & 1)
    return BitMessage(bits)
