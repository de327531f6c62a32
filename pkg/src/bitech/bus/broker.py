"""Threaded in-memory pub/sub broker.

One reader thread per connection; a connection's inbound packets are
processed serially, so fan-out of one publisher's stream reaches every
subscriber in publish order. Sessions are keyed by client id: a new
connection under a live id evicts the old one, subscriptions follow
clean-session rules, and unacknowledged QoS-1 deliveries survive the
disconnect and are re-sent with DUP=1 when the same id returns.
"""

import logging
import socket
import threading
import time
from collections import OrderedDict

from .packets import (
    Malformed,
    NeedMoreBytes,
    Packet,
    PacketType,
    decode_packet,
    encode_packet,
)
from .topics import InvalidFilter, TopicFilter, topic_matches

log = logging.getLogger(__name__)


class FaultInjector:
    """Override hooks to drop traffic in tests; the default drops nothing."""

    def drop_puback(self, client_id, packet_id):
        """Return True to suppress the PUBACK the broker owes `client_id`."""
        return False


class _Session:
    def __init__(self, client_id):
        self.client_id = client_id
        self.conn = None
        self.subscriptions = []          # (TopicFilter, qos)
        self.unacked = OrderedDict()     # packet_id -> (topic, payload)
        self.lock = threading.RLock()
        self._next_pid = 0

    def alloc_pid(self):
        for _ in range(65535):
            self._next_pid = self._next_pid % 65535 + 1
            if self._next_pid not in self.unacked:
                return self._next_pid
        raise RuntimeError("no free packet ids")


class _Connection:
    def __init__(self, broker, sock, addr):
        self.broker = broker
        self.sock = sock
        self.addr = addr
        self.session = None
        self.keepalive = 60
        self.last_rx = time.monotonic()
        self.alive = True
        self.send_lock = threading.Lock()
        self.thread = threading.Thread(
            target=self._run, name=f"broker-conn-{addr}", daemon=True)

    def send(self, packet):
        data = encode_packet(packet)
        with self.send_lock:
            self.sock.sendall(data)

    def close(self):
        self.alive = False
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass

    def _expired(self):
        if self.keepalive <= 0:
            return False
        return time.monotonic() - self.last_rx > 1.5 * self.keepalive

    def _run(self):
        buf = bytearray()
        self.sock.settimeout(0.25)
        try:
            while self.alive and self.broker.running:
                if self._expired():
                    log.info("keepalive expired for %s", self.addr)
                    break
                try:
                    chunk = self.sock.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not chunk:
                    break
                self.last_rx = time.monotonic()
                buf.extend(chunk)
                stop = False
                while not stop:
                    try:
                        packet, consumed = decode_packet(buf)
                    except NeedMoreBytes:
                        break
                    except Malformed as exc:
                        log.warning("malformed frame from %s: %s", self.addr, exc)
                        stop = True
                        self.alive = False
                        break
                    del buf[:consumed]
                    if not self.broker._dispatch(self, packet):
                        stop = True
                        self.alive = False
                if not self.alive:
                    break
        finally:
            self.broker._detach(self)
            self.close()


class Broker:
    """TCP broker; bind with port=0 to let the OS pick a free port."""

    def __init__(self, host="127.0.0.1", port=0, fault_injector=None):
        self.host = host
        self.port = port
        self.fault_injector = fault_injector or FaultInjector()
        self.running = False
        self._listener = None
        self._accept_thread = None
        self._sessions = {}
        self._registry_lock = threading.Lock()
        self._conns = set()

    def start(self):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.port))
        self._listener.listen(64)
        self.port = self._listener.getsockname()[1]
        self.running = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="broker-accept", daemon=True)
        self._accept_thread.start()
        log.info("broker listening on %s:%d", self.host, self.port)
        return self

    def stop(self):
        self.running = False
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._registry_lock:
            conns = list(self._conns)
        for conn in conns:
            conn.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _accept_loop(self):
        self._listener.settimeout(0.25)
        while self.running:
            try:
                sock, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            conn = _Connection(self, sock, addr)
            with self._registry_lock:
                self._conns.add(conn)
            conn.thread.start()

    # -- packet dispatch -------------------------------------------------

    def _dispatch(self, conn, packet):
        """Handle one inbound packet; False closes the connection."""
        if packet.type == PacketType.CONNECT:
            return self._on_connect(conn, packet)
        if conn.session is None:
            log.warning("%s sent %s before CONNECT", conn.addr, packet.type.name)
            return False
        if packet.type == PacketType.PUBLISH:
            return self._on_publish(conn, packet)
        if packet.type == PacketType.PUBACK:
            with conn.session.lock:
                conn.session.unacked.pop(packet.packet_id, None)
            return True
        if packet.type == PacketType.SUBSCRIBE:
            return self._on_subscribe(conn, packet)
        if packet.type == PacketType.PINGREQ:
            conn.send(Packet.pingresp())
            return True
        if packet.type == PacketType.DISCONNECT:
            return False
        log.warning("unexpected %s from %s", packet.type.name, conn.addr)
        return False

    def _on_connect(self, conn, packet):
        if conn.session is not None:
            return False  # second CONNECT on one socket
        cid = packet.client_id
        if not cid:
            conn.send(Packet.connack(return_code=2))
            return False
        with self._registry_lock:
            session = self._sessions.get(cid)
            if session is None:
                session = _Session(cid)
                self._sessions[cid] = session
        with session.lock:
            old = session.conn
            session.conn = conn
            session.subscriptions = []   # clean session
            pending = list(session.unacked.items())
        conn.session = session
        conn.keepalive = packet.keepalive
        if old is not None and old is not conn:
            log.info("evicting previous connection for %r", cid)
            old.close()
        conn.send(Packet.connack(return_code=0, session_present=False))
        for pid, (topic, payload) in pending:
            try:
                conn.send(Packet.publish(topic, payload, qos=1, packet_id=pid, dup=True))
            except OSError:
                break
        return True

    def _on_subscribe(self, conn, packet):
        grants = []
        with conn.session.lock:
            for filter_text, qos in packet.filters:
                try:
                    parsed = TopicFilter.parse(filter_text)
                except InvalidFilter:
                    grants.append(0x80)
                    continue
                conn.session.subscriptions.append((parsed, qos))
                grants.append(qos)
        conn.send(Packet.suback(packet.packet_id, grants))
        return True

    def _on_publish(self, conn, packet):
        self._route(packet)
        if packet.qos == 1:
            if not self.fault_injector.drop_puback(conn.session.client_id,
                                                   packet.packet_id):
                conn.send(Packet.puback(packet.packet_id))
        return True

    def _route(self, packet):
        """Deliver to every matching subscription of every live session.

        The inbound DUP flag rides along on the fan-out copies so that
        end-to-end duplicates stay visible to subscribers.
        """
        with self._registry_lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            with session.lock:
                target = session.conn
                if target is None:
                    continue
                for topic_filter, sub_qos in session.subscriptions:
                    if not topic_matches(topic_filter, packet.topic):
                        continue
                    effective = min(packet.qos, sub_qos)
                    if effective == 0:
                        out = Packet.publish(packet.topic, packet.payload,
                                             qos=0, dup=packet.dup)
                    else:
                        pid = session.alloc_pid()
                        session.unacked[pid] = (packet.topic, packet.payload)
                        out = Packet.publish(packet.topic, packet.payload, qos=1,
                                             packet_id=pid, dup=packet.dup)
                    try:
                        target.send(out)
                    except OSError:
                        # connection is dying; QoS-1 copies stay queued for
                        # redelivery on reconnect
                        break

    def _detach(self, conn):
        with self._registry_lock:
            self._conns.discard(conn)
        session = conn.session
        if session is not None:
            with session.lock:
                if session.conn is conn:
                    session.conn = None
                    session.subscriptions = []
