#!/usr/bin/env python3
"""Numbers that put the techniques in perspective.

Prints the benchmark-image capacity table, the recorded direct-versus-
intercepted transfer timings with their difference column recomputed, a
back-of-the-envelope exfiltration projection, and a tour of the
four-class taxonomy that places each technique.
"""

from netsteglab.analytics import (
    DataState,
    ModificationLocus,
    TaxonomyInput,
    classify_taxonomy,
    covert_channel_yield,
    exfil_projection,
    render_capacity_table,
    render_overhead_table,
    transfer_frame_profile,
)


def main() -> None:
    print("== LSB capacity of the benchmark images (red layer only) ==")
    print(render_capacity_table())

    print("== recorded transfer timings, difference column recomputed ==")
    print(render_overhead_table())

    print("== header channels at internet scale ==")
    profile = transfer_frame_profile(786_460)
    print(f"  a 786,460 B upload is {profile.segments} frames of "
          f"{profile.frame_size} B -> {profile.wire_bytes} B on the wire")
    print(f"  8 covert bits per frame over those {profile.segments} frames "
          f"moves {covert_channel_yield(8, profile.segments)} bytes")
    proj = exfil_projection(8, 500_000_000)
    print(f"  8 B/packet x 5e8 packets/day = {proj.bytes_per_day:,} B/day, "
          f"{proj.bytes_per_year:,} B/year\n")

    print("== where does each technique sit in the taxonomy? ==")
    cases = [
        ("classic image stego, file never sent",
         {DataState.DAR}, ModificationLocus.RUNTIME),
        ("embed into a file, then upload it",
         {DataState.DAR, DataState.DIM}, ModificationLocus.PRE_TRANSIT),
        ("browser plugin reorders its own HTTP headers",
         {DataState.DIM, DataState.DIU}, ModificationLocus.RUNTIME),
        ("sender crafts covert TCP headers",
         {DataState.DIM}, ModificationLocus.PRE_TRANSIT),
        ("tap rewrites payload bytes mid-flight",
         {DataState.DIM}, ModificationLocus.IN_TRANSIT),
    ]
    for description, states, locus in cases:
        verdict = classify_taxonomy(TaxonomyInput(frozenset(states), locus))
        print(f"  {description:<48} -> {verdict.label}")


if __name__ == "__main__":
    main()
