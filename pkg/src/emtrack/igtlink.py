"""OpenIGTLink (protocol v1) TRANSFORM messages and a broadcast TCP server.

Wire layout: a 58-byte big-endian header followed by a 48-byte body of
twelve float32 values (the 3x3 rotation column by column, then the
translation in millimeters). The header carries CRC-64/ECMA-182 of the body.
"""
from __future__ import annotations

import collections
import logging
import math
import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import BindFailure, DeviceNameTooLong
from .pose import Pose5DOF

log = logging.getLogger(__name__)

DEFAULT_PORT = 18944
DEFAULT_DEVICE = "Anser"
HEADER_SIZE = 58
TRANSFORM_BODY_SIZE = 48
HEADER_FORMAT = ">H12s20sQQQ"
CLIENT_QUEUE_DEPTH = 8

CRC64_POLY = 0x42F0E1EBA9EA3693
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _crc64_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 56
        for _ in range(8):
            crc = ((crc << 1) ^ CRC64_POLY) if crc & (1 << 63) else (crc << 1)
            crc &= _MASK64
        table.append(crc)
    return table


_CRC64_TABLE = _crc64_table()


def crc64(data: bytes, crc: int = 0) -> int:
    """CRC-64/ECMA-182: MSB-first, init 0, no reflection, no final xor."""
    table = _CRC64_TABLE
    for b in data:
        crc = table[((crc >> 56) ^ b) & 0xFF] ^ ((crc << 8) & _MASK64)
    return crc


def pose_to_matrix(pose: Pose5DOF) -> np.ndarray:
    """4x4 homogeneous transform with translation in millimeters.

    Roll is unobservable for a symmetric coil, so the rotation is the
    smallest one taking +z onto the sensor normal n: Rodrigues' formula about
    z x n, written out in closed form. Its third column is n itself.
    """
    sin_phi = math.sin(pose.phi)
    nx = math.cos(pose.theta) * sin_phi
    ny = math.sin(pose.theta) * sin_phi
    c = math.cos(pose.phi)
    if c <= -1.0 + 1e-12:
        # half turn about x; unreachable for canonical poses
        rot = ((1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, -1.0))
    else:
        w = 1.0 / (1.0 + c)
        rot = (
            (1.0 - nx * nx * w, -nx * ny * w, nx),
            (-nx * ny * w, 1.0 - ny * ny * w, ny),
            (-nx, -ny, c),
        )
    return np.array([
        [*rot[0], pose.x * 1000.0],
        [*rot[1], pose.y * 1000.0],
        [*rot[2], pose.z * 1000.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def timestamp_now() -> tuple[int, int]:
    """Wall-clock time as (seconds, 2**-32 fractions) since the Unix epoch."""
    t = time.time()
    sec = int(t)
    return sec, min(int((t - sec) * 2**32), 2**32 - 1)


@dataclass(frozen=True)
class TransformMessage:
    device_name: str
    timestamp: tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape == (3, 4):
            m = np.vstack([m, [0.0, 0.0, 0.0, 1.0]])
        if m.shape != (4, 4):
            raise ValueError(f"matrix must be 4x4, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def rotation_error(self) -> tuple[float, float]:
        """(max |R^T R - I|, |det R - 1|), both ~0 for a valid rigid transform."""
        r = self.matrix[:3, :3]
        return float(np.max(np.abs(r.T @ r - np.eye(3)))), float(abs(np.linalg.det(r) - 1.0))


@dataclass(frozen=True)
class WireHeader:
    version: int
    type_name: str
    device_name: str
    timestamp: int
    body_size: int
    crc: int

    def pack(self) -> bytes:
        return struct.pack(
            HEADER_FORMAT,
            self.version,
            self.type_name.encode("ascii"),
            self.device_name.encode("ascii"),
            self.timestamp,
            self.body_size,
            self.crc,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "WireHeader":
        version, type_name, device, stamp, size, crc = struct.unpack(HEADER_FORMAT, data[:HEADER_SIZE])
        return cls(
            version,
            type_name.rstrip(b"\0").decode("ascii"),
            device.rstrip(b"\0").decode("ascii"),
            stamp,
            size,
            crc,
        )


def _device_bytes(name: str) -> bytes:
    raw = name.encode("ascii")
    if len(raw) > 20:
        raise DeviceNameTooLong(f"device name {name!r} is {len(raw)} bytes; the limit is 20")
    return raw


def encode_transform(msg: TransformMessage) -> bytes:
    _device_bytes(msg.device_name)
    m = msg.matrix
    body = struct.pack(">12f", *m[:3].T.ravel().tolist())
    sec, frac = msg.timestamp
    header = WireHeader(1, "TRANSFORM", msg.device_name, (int(sec) << 32) | int(frac), len(body), crc64(body))
    return header.pack() + body


def pose_message(pose: Pose5DOF, device_name: str = DEFAULT_DEVICE, timestamp=None) -> bytes:
    """Encoded TRANSFORM for a canonical pose, stamped now unless given."""
    stamp = timestamp if timestamp is not None else timestamp_now()
    return encode_transform(TransformMessage(device_name, stamp, pose_to_matrix(pose)))


class _Client:
    def __init__(self, conn: socket.socket, addr):
        self.conn = conn
        self.addr = addr
        self.queue: collections.deque[bytes] = collections.deque(maxlen=CLIENT_QUEUE_DEPTH)
        self.cond = threading.Condition()
        self.closed = False
        self.sent = 0
        self.dropped = 0
        self.thread = threading.Thread(target=self._run, name=f"igtl-client-{addr}", daemon=True)

    def push(self, data: bytes) -> None:
        with self.cond:
            if len(self.queue) == self.queue.maxlen:
                self.dropped += 1
            self.queue.append(data)
            self.cond.notify()

    def close(self) -> None:
        with self.cond:
            self.closed = True
            self.cond.notify()
        try:
            self.conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.conn.close()

    def _run(self):
        while True:
            with self.cond:
                while not self.queue and not self.closed:
                    self.cond.wait()
                if self.closed:
                    return
                data = self.queue.popleft()
            try:
                self.conn.sendall(data)
                self.sent += 1
            except OSError as exc:
                log.info("client %s disconnected: %s", self.addr, exc)
                self.closed = True
                return


class IGTLinkServer:
    """Broadcasts encoded messages to every connected client.

    Each client has its own sender thread and an 8-deep queue that drops
    the oldest message when full, so a stalled client never blocks the
    caller of :meth:`broadcast` or other clients.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT, device_name: str = DEFAULT_DEVICE):
        _device_bytes(device_name)
        self.host = host
        self.port = port
        self.device_name = device_name
        self._clients: list[_Client] = []
        self._lock = threading.Lock()
        self._sock: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._stopping = threading.Event()
        self.messages_sent = 0

    @property
    def address(self) -> tuple[str, int]:
        return self._sock.getsockname()[:2]

    def start(self) -> "IGTLinkServer":
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((self.host, self.port))
            sock.listen()
        except OSError as exc:
            sock.close()
            raise BindFailure(f"cannot listen on {self.host}:{self.port}: {exc}") from exc
        sock.settimeout(0.1)
        self._sock = sock
        self._accept_thread = threading.Thread(target=self._accept_loop, name="igtl-accept", daemon=True)
        self._accept_thread.start()
        log.info("OpenIGTLink server listening on %s:%d", *self.address)
        return self

    def _accept_loop(self):
        while not self._stopping.is_set():
            try:
                conn, addr = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            client = _Client(conn, addr)
            with self._lock:
                self._clients.append(client)
            client.thread.start()
            log.info("client connected: %s", addr)

    @property
    def client_count(self) -> int:
        with self._lock:
            self._clients = [c for c in self._clients if not c.closed]
            return len(self._clients)

    def broadcast(self, data: bytes) -> None:
        with self._lock:
            clients = list(self._clients)
        for client in clients:
            if client.closed:
                continue
            client.push(data)
        self.messages_sent += 1

    def broadcast_pose(self, pose: Pose5DOF, timestamp=None) -> bytes:
        data = pose_message(pose, self.device_name, timestamp)
        self.broadcast(data)
        return data

    def stop(self) -> None:
        self._stopping.set()
        if self._sock is not None:
            self._sock.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=1.0)
        with self._lock:
            clients, self._clients = self._clients, []
        for client in clients:
            client.close()
            client.thread.join(timeout=1.0)

    def __enter__(self):
        if self._sock is None:
            self.start()
        return self

    def __exit__(self, *exc):
        self.stop()


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    host, _, port = endpoint.rpartition(":")
    return host or "0.0.0.0", int(port)


def serve(endpoint: str, pose_feed: Optional[Iterable[Pose5DOF]] = None,
          device_name: str = DEFAULT_DEVICE) -> IGTLinkServer:
    """Start a server on ``host:port``; if ``pose_feed`` is given, stream it
    from a background thread."""
    host, port = parse_endpoint(endpoint)
    server = IGTLinkServer(host, port, device_name).start()
    if pose_feed is not None:
        def pump():
            for pose in pose_feed:
                if server._stopping.is_set():
                    return
                server.broadcast_pose(pose)

        threading.Thread(target=pump, name="igtl-feed", daemon=True).start()
    return server
