from .broker import Broker, FaultInjector
from .client import Client, DeliveryTimeout, DeliveryToken, Message, NotConnected
from .packets import (
    Malformed,
    NeedMoreBytes,
    Oversize,
    Packet,
    PacketType,
    decode_packet,
    encode_packet,
)
from .topics import InvalidFilter, TopicFilter, topic_matches

__all__ = [
    "Broker", "FaultInjector", "Client", "DeliveryTimeout", "DeliveryToken",
    "Message", "NotConnected", "Malformed", "NeedMoreBytes", "Oversize",
    "Packet", "PacketType", "decode_packet", "encode_packet",
    "InvalidFilter", "TopicFilter", "topic_matches",
]
