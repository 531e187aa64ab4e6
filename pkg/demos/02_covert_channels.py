#!/usr/bin/env python3
"""Six ways to hide bits in traffic that looks ordinary.

Runs the same short message through every covert channel in the package
and prints what actually changes on the wire in each case: header fields,
initial sequence numbers, inter-packet gaps, send order, and HTTP header
order.  Every channel decodes back to the original bits.
"""

from netsteglab.channels import (
    BitMessage,
    HttpHeaderConfig,
    TimingConfig,
    TtlConfig,
    http_header_decode,
    http_header_encode,
    ip_storage_decode,
    ip_storage_encode,
    isn_decode,
    isn_encode,
    order_decode,
    order_encode,
    timing_decode,
    timing_encode,
    ttl_decode,
    ttl_encode,
)
from netsteglab.wirecodec import TCP_ACK, build_tcp_frame, with_ip_fields

MS = 1_000_000


def carriers(n, base_seq=1000):
    return [
        build_tcp_frame(
            src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000, dst_port=8080,
            seq=base_seq + i, flags=TCP_ACK, ip_id=i + 1,
        )
        for i in range(n)
    ]


def main() -> None:
    message = BitMessage.from_hex("c0de")
    print(f"message: 0x{message.packed_hex()} = {message.to01()} "
          f"({len(message)} bits)\n")

    print("== 1. IP storage: identification + flags + fragment offset ==")
    frames = ip_storage_encode(message[:32], carriers(1))
    ip = frames[0].ip
    print(f"  one frame carries 32 bits: id={ip.identification:#06x} "
          f"flags={ip.flags:03b} frag={ip.frag_offset:#x}")
    print(f"  decoded: {ip_storage_decode(frames).packed_hex()}")

    print("\n== 2. TTL: top k bits of time-to-live ==")
    cfg = TtlConfig(k=4, hop_count=3)
    frames = ttl_encode(message[:8], carriers(2), cfg)
    print(f"  ttls as sent: {[f.ip.ttl for f in frames]} "
          f"(low {8 - cfg.k} bits left as hop budget)")
    hopped = [with_ip_fields(f, ttl=f.ip.ttl - cfg.hop_count) for f in frames]
    print(f"  ttls after {cfg.hop_count} router hops: "
          f"{[f.ip.ttl for f in hopped]}")
    print(f"  decoded at the far observer: {ttl_decode(hopped, cfg).to01()}")

    print("\n== 3. ISN: bits in the initial sequence number ==")
    isn = isn_encode(message[:8], 8, rng_seed="demo/isn")
    print(f"  SYN carries isn={isn:#010x}; top byte spells "
          f"{isn_decode(isn, 8).packed_hex()}")

    print("\n== 4. timing: long gap = 1, short gap = 0 ==")
    tcfg = TimingConfig()
    gaps = timing_encode(message[:6], tcfg)
    print(f"  departure gaps (ms): {[g // MS for g in gaps]}")
    print(f"  decoded: {timing_decode(gaps, tcfg).to01()}")

    print("\n== 5. order: swap a pair to send a 1 ==")
    frames = order_encode(message[:3], carriers(6))
    print(f"  seq numbers as sent: {[f.tcp.seq for f in frames]}")
    print(f"  decoded: {order_decode(frames).to01()}")

    print("\n== 6. HTTP header order: a permutation is a number ==")
    hcfg = HttpHeaderConfig()
    ordering = http_header_encode(message[:hcfg.capacity_bits], hcfg)
    print(f"  {len(hcfg.header_set)} headers give {hcfg.capacity_bits} bits "
          f"per request")
    print("  request headers in this order: " + ", ".join(ordering))
    decoded = http_header_decode(ordering, hcfg, n_bits=hcfg.capacity_bits)
    print(f"  decoded: {decoded.to01()}")


if __name__ == "__main__":
    main()
