"""netsteglab — a laboratory for network steganography.

Byte-exact TCP/IPv4/Ethernet frame handling, six classical covert
channels, a deterministic link simulator with a warden, an in-flight
LSB embedder for BMP payloads crossing TCP streams, and closed-form
capacity/overhead analytics.  The ``stegctl`` console script drives
end-to-end experiments.
"""

from .wirecodec import (
    EthernetFrame,
    Ipv4Header,
    PcapFile,
    PcapRecord,
    TcpHeader,
    WireError,
    build_tcp_frame,
    fcs32,
    internet_checksum,
    parse_frame,
    read_pcap,
    tcp_checksum_ok,
    write_pcap,
)
from .channels import (
    BitMessage,
    CovertChannelError,
    HttpHeaderConfig,
    TimingConfig,
    TtlConfig,
)
from .bmp import BmpInfo, NotBmp, UnsupportedBpp, make_bmp, parse_bmp_info
from .netsim import (
    LinkModel,
    Stalled,
    TcpLiteEndpoint,
    TransferTrace,
    WardenConfig,
    simulate_transfer,
)
from .interceptor import (
    FlowKey,
    FlowState,
    Interceptor,
    StegoPolicy,
    carrier_offsets,
    embed_in_frame,
    extract_from_file,
    process_stream,
)
from .analytics import (
    DataState,
    ModificationLocus,
    StegoClass,
    TaxonomyInput,
    audio_capacity,
    classify_taxonomy,
    covert_channel_yield,
    exfil_projection,
    lsb_capacity,
    overhead_report,
    transfer_frame_profile,
)

__version__ = "0.1.0"

__all__ = [
    "EthernetFrame", "Ipv4Header", "TcpHeader", "PcapFile", "PcapRecord",
    "WireError", "build_tcp_frame", "fcs32", "internet_checksum",
    "parse_frame", "read_pcap", "tcp_checksum_ok", "write_pcap",
    "BitMessage", "CovertChannelError", "HttpHeaderConfig", "TimingConfig",
    "TtlConfig",
    "BmpInfo", "NotBmp", "UnsupportedBpp", "make_bmp", "parse_bmp_info",
    "LinkModel", "Stalled", "TcpLiteEndpoint", "TransferTrace",
    "WardenConfig", "simulate_transfer",
    "FlowKey", "FlowState", "Interceptor", "StegoPolicy", "carrier_offsets",
    "embed_in_frame", "extract_from_file", "process_stream",
    "DataState", "ModificationLocus", "StegoClass", "TaxonomyInput",
    "audio_capacity", "classify_taxonomy", "covert_channel_yield",
    "exfil_projection", "lsb_capacity", "overhead_report",
    "transfer_frame_profile",
    "__version__",
]
