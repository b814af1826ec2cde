"""Run live tracking on a moving simulated sensor and print what a client receives.

Usage: python3 demos/track_and_listen.py [updates]
"""
import socket
import struct
import sys
import threading
import time
from dataclasses import replace

from emtrack.acquisition import motion_preset
from emtrack.config import PipelineConfig
from emtrack.igtlink import HEADER_SIZE, IGTLinkServer, WireHeader
from emtrack.pipeline import run_tracking
from emtrack.pose import Pose5DOF


def listen(address, count, ready):
    with socket.create_connection(address) as sock:
        ready.set()
        buf = b""
        for _ in range(count):
            while len(buf) < HEADER_SIZE + 48:
                buf += sock.recv(4096)
            header = WireHeader.unpack(buf[:HEADER_SIZE])
            vals = struct.unpack(">12f", buf[HEADER_SIZE:HEADER_SIZE + 48])
            buf = buf[HEADER_SIZE + 48:]
            t = vals[9:12]
            normal = vals[6:9]
            print(f"{header.device_name} t=({t[0]:7.2f}, {t[1]:7.2f}, {t[2]:7.2f}) mm  "
                  f"n=({normal[0]:+.3f}, {normal[1]:+.3f}, {normal[2]:+.3f})")


def main(updates=20):
    cfg = PipelineConfig()
    start = Pose5DOF(0.0, 0.0, 0.10, 0.3, 0.5)
    box = ((-0.08, -0.08, 0.05), (0.08, 0.08, 0.15))
    cfg = replace(cfg, trajectory=motion_preset("static", start, box),
                  acquisition=replace(cfg.acquisition, frame_size=2000, noise_sigma=1e-6))
    with IGTLinkServer("127.0.0.1", 0) as server:
        ready = threading.Event()
        client = threading.Thread(target=listen, args=(server.address, updates, ready))
        client.start()
        ready.wait()
        while server.client_count < 1:
            time.sleep(0.01)
        stats = run_tracking(cfg, server=server, max_updates=updates)
        client.join()
    print(f"frames in {stats.frames_in}, solved {stats.solved}, skipped {stats.skipped}, dropped {stats.dropped}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20)
