"""Socket transports around the session core.

Two endpoints carry the same JSON payloads: a plain TCP socket with one
message per line, and a browser-compatible WebSocket (text frames). The
server hosts one shared session; every connection may stream frames and
control messages into it and receives the broadcast topics it subscribed
to (all topics by default). Acks and errors go only to the sender.

The WebSocket side implements the server half of RFC 6455 directly
(handshake, masked client frames, text/ping/close opcodes); the package
mirror has no websocket library and the needs here are narrow.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import logging
import struct

from .config import ToolkitConfig
from .service import DIRECT_TYPES, TOPICS, Session, dumps

log = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class _Client:
    def __init__(self, send_text):
        self.send_text = send_text
        self.topics = set(TOPICS)


class TeleopServer:
    """Shared-session server with TCP and WebSocket endpoints."""

    def __init__(self, config: ToolkitConfig, port: int | None = None, ws_port: int | None = None):
        self.config = config
        self.port = config.service.port if port is None else port
        self.ws_port = config.service.ws_port if ws_port is None else ws_port
        self.session = Session(config, start_time=0.0)
        self.clients: set[_Client] = set()
        self._t0 = None
        self._servers = []
        self._tick_task = None

    # --------------------------------------------------------------- timing

    def _now(self) -> float:
        loop = asyncio.get_running_loop()
        if self._t0 is None:
            self._t0 = loop.time()
        return loop.time() - self._t0

    # ------------------------------------------------------------ lifecycle

    async def start(self):
        loop = asyncio.get_running_loop()
        self._t0 = loop.time()
        tcp = await asyncio.start_server(self._serve_tcp, host="127.0.0.1", port=self.port)
        ws = await asyncio.start_server(self._serve_ws, host="127.0.0.1", port=self.ws_port)
        self._servers = [tcp, ws]
        # report bound ports (useful when asked for port 0)
        self.port = tcp.sockets[0].getsockname()[1]
        self.ws_port = ws.sockets[0].getsockname()[1]
        self._tick_task = asyncio.create_task(self._tick_loop())
        log.info("listening on tcp://127.0.0.1:%d and ws://127.0.0.1:%d", self.port, self.ws_port)

    async def stop(self):
        if self._tick_task:
            self._tick_task.cancel()
            try:
                await self._tick_task
            except asyncio.CancelledError:
                pass
        for server in self._servers:
            server.close()
            await server.wait_closed()

    async def serve_forever(self):
        await self.start()
        try:
            await asyncio.gather(*(s.serve_forever() for s in self._servers))
        finally:
            await self.stop()

    async def _tick_loop(self):
        period = self.session.tick_period
        while True:
            due = self.session.next_tick_time()
            now = self._now()
            if due > now:
                await asyncio.sleep(min(due - now, period))
                continue
            self._fan_out(self.session.advance_to(self._now()), sender=None)

    # ------------------------------------------------------------- plumbing

    def _handle_line(self, text: str, client: _Client):
        try:
            msg = json.loads(text)
        except json.JSONDecodeError as exc:
            self._fan_out(
                [{"type": "error", "code": "bad_message", "detail": f"invalid JSON: {exc.msg}"}],
                sender=client,
            )
            return
        now = self._now()
        # ticks due before this message run first, matching replay order
        self._fan_out(self.session.advance_to(now), sender=None)
        if isinstance(msg, dict) and msg.get("type") == "subscribe":
            topics = msg.get("topics")
            if isinstance(topics, list) and all(t in TOPICS for t in topics):
                client.topics = set(topics)
        self._fan_out(self.session.handle(msg, now), sender=client)

    def _fan_out(self, messages: list[dict], sender: _Client | None):
        for msg in messages:
            text = dumps(msg)
            if msg["type"] in DIRECT_TYPES:
                if sender is not None:
                    sender.send_text(text)
                continue
            for client in list(self.clients):
                if msg["type"] in client.topics:
                    client.send_text(text)

    # ------------------------------------------------------------------ tcp

    async def _serve_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        client = _Client(lambda text: self._tcp_send(writer, text))
        self.clients.add(client)
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                text = line.decode("utf-8", errors="replace").strip()
                if text:
                    self._handle_line(text, client)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            self.clients.discard(client)
            writer.close()

    @staticmethod
    def _tcp_send(writer: asyncio.StreamWriter, text: str):
        if not writer.is_closing():
            writer.write(text.encode() + b"\n")

    # ------------------------------------------------------------ websocket

    async def _serve_ws(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        try:
            key = await self._ws_handshake(reader, writer)
        except (ValueError, ConnectionResetError, asyncio.IncompleteReadError):
            writer.close()
            return
        client = _Client(lambda text: self._ws_send(writer, text))
        self.clients.add(client)
        try:
            while True:
                frame = await self._ws_read_frame(reader)
                if frame is None:
                    break
                opcode, payload = frame
                if opcode == 0x8:  # close
                    writer.write(self._ws_frame(0x8, payload[:2]))
                    break
                if opcode == 0x9:  # ping -> pong
                    writer.write(self._ws_frame(0xA, payload))
                    continue
                if opcode in (0x1, 0x2):
                    self._handle_line(payload.decode("utf-8", errors="replace"), client)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            self.clients.discard(client)
            writer.close()

    @staticmethod
    async def _ws_handshake(reader, writer) -> str:
        request = await asyncio.wait_for(reader.readuntil(b"\r\n\r\n"), timeout=10.0)
        headers = {}
        for line in request.decode("latin-1").split("\r\n")[1:]:
            if ":" in line:
                k, _, v = line.partition(":")
                headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if not key or "websocket" not in headers.get("upgrade", "").lower():
            raise ValueError("not a websocket upgrade request")
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()
        ).decode()
        writer.write(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode()
        )
        return key

    @staticmethod
    async def _ws_read_frame(reader) -> tuple[int, bytes] | None:
        try:
            head = await reader.readexactly(2)
        except asyncio.IncompleteReadError:
            return None
        opcode = head[0] & 0x0F
        masked = bool(head[1] & 0x80)
        length = head[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", await reader.readexactly(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", await reader.readexactly(8))[0]
        mask = await reader.readexactly(4) if masked else b"\x00" * 4
        payload = bytearray(await reader.readexactly(length))
        if masked:
            for i in range(length):
                payload[i] ^= mask[i % 4]
        return opcode, bytes(payload)

    @staticmethod
    def _ws_frame(opcode: int, payload: bytes) -> bytes:
        head = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            head += bytes([n])
        elif n < 1 << 16:
            head += bytes([126]) + struct.pack(">H", n)
        else:
            head += bytes([127]) + struct.pack(">Q", n)
        return head + payload

    def _ws_send(self, writer: asyncio.StreamWriter, text: str):
        if not writer.is_closing():
            writer.write(self._ws_frame(0x1, text.encode()))


async def serve(config: ToolkitConfig, port: int | None = None, ws_port: int | None = None):
    server = TeleopServer(config, port=port, ws_port=ws_port)
    await server.serve_forever()


__all__ = ["TeleopServer", "serve"]
