"""Transports for the wire protocol: stdio and a local unix socket."""
from __future__ import annotations

import os
import socket
import sys
import threading
from typing import Callable, TextIO

from .orchestrator import Session
from .protocol import Dispatcher

SessionFactory = Callable[[], Session]


def serve_stdio(session_factory: SessionFactory,
                stdin: TextIO = None, stdout: TextIO = None) -> None:
    """One session over stdin/stdout, for test harnesses and child processes."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = session_factory()

    def send(line: str) -> None:
        stdout.write(line + "\n")
        stdout.flush()

    dispatcher = Dispatcher(session, send)
    for line in stdin:
        dispatcher.handle_line(line)
    dispatcher.join()
    session.close()


def serve_socket(session_factory: SessionFactory, path: str) -> None:
    """Accept local stream connections; each connection owns its own session."""
    if os.path.exists(path):
        os.unlink(path)
    server = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
    server.bind(path)
    os.chmod(path, 0o600)
    server.listen()
    try:
        while True:
            conn, _ = server.accept()
            thread = threading.Thread(target=_handle_connection,
                                      args=(session_factory, conn), daemon=True)
            thread.start()
    finally:
        server.close()
        if os.path.exists(path):
            os.unlink(path)


def _handle_connection(session_factory: SessionFactory,
                       conn: socket.socket) -> None:
    session = session_factory()
    send_lock = threading.Lock()

    def send(line: str) -> None:
        with send_lock:
            try:
                conn.sendall(line.encode("utf-8") + b"\n")
            except OSError:
                pass  # client went away; session tears down below

    dispatcher = Dispatcher(session, send)
    buffer = b""
    try:
        while True:
            data = conn.recv(65536)
            if not data:
                break
            buffer += data
            while b"\n" in buffer:
                raw, buffer = buffer.split(b"\n", 1)
                dispatcher.handle_line(raw.decode("utf-8", errors="replace"))
    finally:
        dispatcher.join(timeout=5.0)
        session.close()
        conn.close()
