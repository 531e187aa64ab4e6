#!/usr/bin/env python3
"""The prisoner's problem: what each kind of warden does to the channels.

A passive warden only watches - nothing changes.  An active warden
normalizes suspicious header fields and re-paces traffic, which is
exactly what kills storage and timing channels.  A malicious warden
rewrites content outright.  This demo measures each effect.
"""

import random

from netsteglab.bmp import make_bmp
from netsteglab.channels import (
    BitMessage,
    TimingConfig,
    TtlConfig,
    timing_decode,
    timing_encode,
    ttl_decode,
    ttl_encode,
)
from netsteglab.netsim import (
    LinkModel,
    WardenConfig,
    apply_warden,
    deliver_schedule,
    simulate_transfer,
)
from netsteglab.wirecodec import TCP_ACK, build_tcp_frame, ipv4_checksum_ok


def carriers(n):
    return [
        build_tcp_frame(
            src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000, dst_port=8080,
            seq=1000 + i, flags=TCP_ACK, ip_id=i + 1,
        )
        for i in range(n)
    ]


def ttl_ber(warden, trials=100):
    cfg = TtlConfig(k=3, hop_count=0)
    errors = total = 0
    for t in range(trials):
        msg = BitMessage.random(15, f"warden-demo/{t}")
        frames = ttl_encode(msg, carriers(5), cfg)
        rng = random.Random(f"warden-demo/rng/{t}")
        seen = [apply_warden(f, warden, rng) for f in frames]
        assert all(ipv4_checksum_ok(f) for f in seen)
        errors += ttl_decode(seen, cfg).bit_errors(msg)
        total += len(msg)
    return errors / total


def main() -> None:
    print("== passive warden: observe only ==")
    payload = make_bmp(16, 8, 24)
    link = LinkModel(seed=5)
    plain = simulate_transfer(payload, link)
    watched = simulate_transfer(
        payload, link, warden=WardenConfig(mode="passive")
    )
    identical = [e.frame.emit() for e in plain.events] == [
        e.frame.emit() for e in watched.events
    ]
    print(f"  byte-diff of the two traces is empty: {identical}")

    print("\n== active warden vs the TTL channel ==")
    passive = None
    active = WardenConfig(mode="active", normalizations=frozenset({"rewrite_ttl"}))
    print(f"  no warden:            BER {ttl_ber(passive):.1%}")
    print(f"  rewrite_ttl enabled:  BER {ttl_ber(active):.1%} "
          "(every TTL forced to 64; checksums still valid)")

    print("\n== active warden vs the timing channel ==")
    tcfg = TimingConfig()
    msg = BitMessage.from_hex("b5")
    gaps = timing_encode(msg, tcfg)
    link = LinkModel(jitter_ms=3.0, seed=11)
    arrival = deliver_schedule(gaps, link)
    smoothed = deliver_schedule(gaps, link, smooth=True)
    jittered = timing_decode(arrival, tcfg)
    repaced = timing_decode(smoothed, tcfg)
    print(f"  sent bits:             {msg.to01()}")
    print(f"  through 3 ms jitter:   {jittered.to01()} "
          f"({jittered.bit_errors(msg)} errors - survives)")
    print(f"  through re-pacing:     {repaced.to01()} "
          f"({repaced.bit_errors(msg)} errors - channel destroyed)")

    print("\n== malicious warden: rewrite the content itself ==")
    malicious = WardenConfig(mode="malicious")
    frame = carriers(1)[0]
    data = build_tcp_frame(
        src_ip="10.0.0.1", dst_ip="10.0.0.2", src_port=40000, dst_port=8080,
        seq=frame.tcp.seq, flags=TCP_ACK, payload=b"secret document",
    )
    mangled = apply_warden(data, malicious, random.Random("warden-demo/mal"))
    print(f"  payload before: {data.tcp_payload!r}")
    print(f"  payload after:  {mangled.tcp_payload!r}")
    print(f"  checksums still valid: {ipv4_checksum_ok(mangled)}")


if __name__ == "__main__":
    main()
