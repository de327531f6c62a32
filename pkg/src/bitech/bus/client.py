"""Threaded bus client with QoS-1 delivery tokens.

A single reader thread dispatches inbound packets, so subscription
handlers run serially. Unresolved QoS-1 publishes are re-sent with DUP=1
on reconnect(), which also re-establishes subscriptions (the broker is
clean-session).
"""

import logging
import socket
import threading
import time
from dataclasses import dataclass

from .packets import (
    Malformed,
    NeedMoreBytes,
    Packet,
    PacketType,
    decode_packet,
    encode_packet,
)
from .topics import TopicFilter, topic_matches

log = logging.getLogger(__name__)


class ClientError(Exception):
    pass


class NotConnected(ClientError):
    pass


class DeliveryTimeout(ClientError):
    pass


@dataclass(frozen=True)
class Message:
    topic: str
    payload: bytes
    qos: int
    dup: bool


class DeliveryToken:
    """Resolves when the broker acknowledges the publish (QoS 1)."""

    def __init__(self, packet_id=0):
        self.packet_id = packet_id
        self._event = threading.Event()

    def resolve(self):
        self._event.set()

    @property
    def done(self):
        return self._event.is_set()

    def wait(self, timeout=None):
        return self._event.wait(timeout)

    def result(self, timeout=30.0):
        if not self._event.wait(timeout):
            raise DeliveryTimeout(f"no PUBACK for packet {self.packet_id}")


class Client:
    def __init__(self, client_id, host="127.0.0.1", port=1883, keepalive=60,
                 connect_timeout=5.0):
        self.client_id = client_id
        self.host = host
        self.port = port
        self.keepalive = keepalive
        self.connect_timeout = connect_timeout
        self._sock = None
        self._send_lock = threading.Lock()
        self._state_lock = threading.RLock()
        self._connected = threading.Event()
        self._closing = False
        self._reader = None
        self._pinger = None
        self._pending = {}        # packet_id -> (token, topic, payload)
        self._subs = []           # (filter_text, qos, handler)
        self._sub_acks = {}       # packet_id -> threading.Event
        self._next_pid = 0

    # -- connection lifecycle ---------------------------------------------

    def connect(self):
        with self._state_lock:
            self._closing = False
            self._open_socket()
            self._start_reader()
            self._send(Packet.connect(self.client_id, self.keepalive))
        if not self._connected.wait(self.connect_timeout):
            raise NotConnected("no CONNACK from broker")
        self._start_pinger()
        return self

    def reconnect(self):
        """Re-open the session: CONNECT, re-subscribe, re-send unresolved
        QoS-1 publishes with DUP=1."""
        with self._state_lock:
            self._teardown_socket()
            self._open_socket()
            self._start_reader()
            self._send(Packet.connect(self.client_id, self.keepalive))
        if not self._connected.wait(self.connect_timeout):
            raise NotConnected("no CONNACK on reconnect")
        with self._state_lock:
            subs = list(self._subs)
            pending = list(self._pending.items())
        for filter_text, qos, _handler in subs:
            self._send_subscribe(filter_text, qos)
        for pid, (_token, topic, payload) in pending:
            self._send(Packet.publish(topic, payload, qos=1, packet_id=pid, dup=True))
        self._start_pinger()
        return self

    def disconnect(self):
        with self._state_lock:
            self._closing = True
            if self._connected.is_set():
                try:
                    self._send(Packet.disconnect())
                except OSError:
                    pass
            self._teardown_socket()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.disconnect()

    @property
    def connected(self):
        return self._connected.is_set()

    def _open_socket(self):
        sock = socket.create_connection((self.host, self.port),
                                        timeout=self.connect_timeout)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.settimeout(0.25)
        self._sock = sock

    def _teardown_socket(self):
        self._connected.clear()
        sock, self._sock = self._sock, None
        if sock is not None:
            try:
                sock.close()
            except OSError:
                pass
        if self._reader is not None and self._reader is not threading.current_thread():
            self._reader.join(timeout=1.0)
        self._reader = None

    def _start_reader(self):
        self._reader = threading.Thread(
            target=self._read_loop, args=(self._sock,),
            name=f"client-reader-{self.client_id}", daemon=True)
        self._reader.start()

    def _start_pinger(self):
        if self._pinger is not None and self._pinger.is_alive():
            return
        self._pinger = threading.Thread(
            target=self._ping_loop, name=f"client-ping-{self.client_id}", daemon=True)
        self._pinger.start()

    def _ping_loop(self):
        interval = max(1.0, self.keepalive / 2.0)
        while not self._closing:
            time.sleep(interval)
            if self._closing or not self._connected.is_set():
                continue
            try:
                self._send(Packet.pingreq())
            except OSError:
                pass

    def _send(self, packet):
        sock = self._sock
        if sock is None:
            raise NotConnected("socket closed")
        data = encode_packet(packet)
        with self._send_lock:
            sock.sendall(data)

    # -- publish / subscribe ------------------------------------------------

    def publish(self, topic, payload, qos=0):
        """Publish; returns a DeliveryToken (already resolved for QoS 0)."""
        if not self._connected.is_set():
            raise NotConnected("client is not connected")
        if isinstance(payload, str):
            payload = payload.encode("utf-8")
        if qos == 0:
            token = DeliveryToken()
            self._send(Packet.publish(topic, payload, qos=0))
            token.resolve()
            return token
        with self._state_lock:
            pid = self._alloc_pid()
            token = DeliveryToken(pid)
            self._pending[pid] = (token, topic, payload)
        self._send(Packet.publish(topic, payload, qos=1, packet_id=pid))
        return token

    def subscribe(self, filter_text, qos=1, handler=None):
        """Subscribe and block for the grant. handler(Message) per delivery."""
        if not self._connected.is_set():
            raise NotConnected("client is not connected")
        TopicFilter.parse(filter_text)  # raises InvalidFilter
        with self._state_lock:
            self._subs.append((filter_text, qos, handler))
        return self._send_subscribe(filter_text, qos)

    def _send_subscribe(self, filter_text, qos):
        with self._state_lock:
            pid = self._alloc_pid()
            event = threading.Event()
            holder = {}
            self._sub_acks[pid] = (event, holder)
        self._send(Packet.subscribe(pid, [(filter_text, qos)]))
        if not event.wait(self.connect_timeout):
            raise DeliveryTimeout(f"no SUBACK for {filter_text!r}")
        granted = holder["granted"][0]
        if granted == 0x80:
            raise ClientError(f"subscription refused for {filter_text!r}")
        return granted

    def _alloc_pid(self):
        for _ in range(65535):
            self._next_pid = self._next_pid % 65535 + 1
            if self._next_pid not in self._pending and self._next_pid not in self._sub_acks:
                return self._next_pid
        raise RuntimeError("no free packet ids")

    # -- inbound ------------------------------------------------------------

    def _read_loop(self, sock):
        buf = bytearray()
        while not self._closing and sock is self._sock:
            try:
                chunk = sock.recv(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            if not chunk:
                break
            buf.extend(chunk)
            while True:
                try:
                    packet, consumed = decode_packet(buf)
                except NeedMoreBytes:
                    break
                except Malformed as exc:
                    log.error("malformed frame from broker: %s", exc)
                    self._connected.clear()
                    return
                del buf[:consumed]
                self._handle(packet)
        if sock is self._sock:
            self._connected.clear()

    def _handle(self, packet):
        if packet.type == PacketType.CONNACK:
            if packet.return_code == 0:
                self._connected.set()
            return
        if packet.type == PacketType.PUBACK:
            with self._state_lock:
                entry = self._pending.pop(packet.packet_id, None)
            if entry is not None:
                entry[0].resolve()
            return
        if packet.type == PacketType.SUBACK:
            with self._state_lock:
                waiter = self._sub_acks.pop(packet.packet_id, None)
            if waiter is not None:
                waiter[1]["granted"] = packet.granted
                waiter[0].set()
            return
        if packet.type == PacketType.PUBLISH:
            msg = Message(topic=packet.topic, payload=packet.payload,
                          qos=packet.qos, dup=packet.dup)
            with self._state_lock:
                handlers = [h for f, _q, h in self._subs
                            if h is not None and topic_matches(f, packet.topic)]
            for handler in handlers:
                try:
                    handler(msg)
                except Exception:
                    log.exception("subscription handler failed for %s", packet.topic)
            if packet.qos == 1:
                try:
                    self._send(Packet.puback(packet.packet_id))
                except OSError:
                    pass
            return
        # PINGRESP and anything else informational
