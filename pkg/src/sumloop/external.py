"""External adapter transport: child process stdio or local TCP.

Both transports carry the same newline-delimited framing from
``sumloop.wire``. Requests are strictly sequential; the harness writes
one line, then blocks for exactly one response line. FIT waits without
a deadline by default (training can be slow); PREDICT times out after
ten minutes per batch. Every failure surfaces captured diagnostics:
the last received line plus, for subprocesses, the exit code and a
stderr tail.
"""

from __future__ import annotations

import queue
import socket
import subprocess
import threading
from collections import deque
from typing import Sequence

from .model_adapter import (
    AdapterError,
    AdapterKind,
    ModelHandle,
    ModelHyperparams,
    Prediction,
)
from .corpus import LabelRecord, Sample
from . import wire

DEFAULT_PREDICT_TIMEOUT = 600.0
_EOF = object()


class _StdioTransport:
    """Line framing over a child process's stdin/stdout."""

    def __init__(self, command: Sequence[str]) -> None:
        self.command = list(command)
        try:
            self.process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"failed to spawn adapter {self.command}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._stderr_tail: deque[str] = deque(maxlen=50)
        self.last_received: str | None = None
        threading.Thread(target=self._pump_stdout, daemon=True).start()
        threading.Thread(target=self._pump_stderr, daemon=True).start()

    def _pump_stdout(self) -> None:
        for line in self.process.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _pump_stderr(self) -> None:
        for line in self.process.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def send_line(self, line: str) -> None:
        if self.process.poll() is not None:
            raise AdapterError(f"adapter exited with code {self.process.returncode} | {self.diagnostics()}")
        try:
            self.process.stdin.write(line + "\n")
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError(f"adapter pipe closed while sending: {exc} | {self.diagnostics()}") from exc

    def recv_line(self, timeout: float | None) -> str:
        try:
            item = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise AdapterError(f"adapter response timed out after {timeout}s | {self.diagnostics()}")
        if item is _EOF:
            code = self.process.wait()
            raise AdapterError(
                f"adapter exited (code {code}) before responding | {self.diagnostics()}"
            )
        self.last_received = item.rstrip("\n")
        return self.last_received

    def diagnostics(self) -> str:
        parts = []
        if self.last_received is not None:
            parts.append(f"last line: {self.last_received!r}")
        if self._stderr_tail:
            parts.append("stderr: " + " / ".join(list(self._stderr_tail)[-5:]))
        return "; ".join(parts) or "no output captured"

    def close(self) -> None:
        if self.process.poll() is None:
            try:
                self.process.stdin.close()
            except OSError:
                pass
            try:
                self.process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait()


class _TcpTransport:
    """Line framing over a local TCP connection."""

    def __init__(self, host: str, port: int) -> None:
        try:
            self._sock = socket.create_connection((host, port), timeout=10)
        except OSError as exc:
            raise AdapterError(f"failed to connect to adapter at {host}:{port}: {exc}") from exc
        self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
        self.last_received: str | None = None

    def send_line(self, line: str) -> None:
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise AdapterError(f"adapter socket closed while sending: {exc}") from exc

    def recv_line(self, timeout: float | None) -> str:
        self._sock.settimeout(timeout)
        try:
            line = self._reader.readline()
        except socket.timeout:
            raise AdapterError(f"adapter response timed out after {timeout}s | {self.diagnostics()}")
        except OSError as exc:
            raise AdapterError(f"adapter socket error: {exc} | {self.diagnostics()}") from exc
        if not line:
            raise AdapterError(f"adapter closed the connection | {self.diagnostics()}")
        self.last_received = line.rstrip("\n")
        return self.last_received

    def diagnostics(self) -> str:
        return f"last line: {self.last_received!r}" if self.last_received else "no output captured"

    def close(self) -> None:
        try:
            self._reader.close()
            self._sock.close()
        except OSError:
            pass


class ExternalProcessAdapter:
    """Wire-protocol client for an out-of-process summarizer."""

    kind = AdapterKind.EXTERNAL_PROCESS

    def __init__(
        self,
        command: Sequence[str] | None = None,
        address: tuple[str, int] | None = None,
        fit_timeout: float | None = None,
        predict_timeout: float | None = DEFAULT_PREDICT_TIMEOUT,
    ) -> None:
        if (command is None) == (address is None):
            raise ValueError("provide exactly one of command or address")
        self._command = command
        self._address = address
        self._transport = None
        self.fit_timeout = fit_timeout
        self.predict_timeout = predict_timeout
        self._fitted_run_id: str | None = None

    def _ensure_transport(self):
        if self._transport is None:
            if self._command is not None:
                self._transport = _StdioTransport(self._command)
            else:
                self._transport = _TcpTransport(*self._address)
        return self._transport

    def _roundtrip(self, request: dict, timeout: float | None) -> dict:
        transport = self._ensure_transport()
        transport.send_line(wire.encode_message(request))
        line = transport.recv_line(timeout)
        try:
            return wire.decode_message(line)
        except wire.ProtocolError as exc:
            raise wire.ProtocolError(exc.reason, transport.diagnostics()) from exc

    def fit(
        self,
        labeled: Sequence[tuple[Sample, LabelRecord]],
        hp: ModelHyperparams,
        run_id: str,
        seed: int,
    ) -> ModelHandle:
        if not labeled:
            raise ValueError("fit requires a nonempty labeled set")
        request = wire.fit_request(
            run_id, seed, hp.to_wire(), [(s, r.summary) for s, r in labeled]
        )
        response = self._roundtrip(request, self.fit_timeout)
        wire.check_fit_response(response, run_id)
        self._fitted_run_id = run_id
        return ModelHandle(run_id, self.kind, len(labeled))

    def predict(self, handle: ModelHandle, samples: Sequence[Sample]) -> list[Prediction]:
        if handle.run_id != self._fitted_run_id:
            raise ValueError(f"no fitted model for run {handle.run_id!r}")
        if not samples:
            raise ValueError("predict requires a nonempty sample batch")
        request = wire.predict_request(handle.run_id, samples)
        response = self._roundtrip(request, self.predict_timeout)
        items = wire.check_predictions_response(
            response, handle.run_id, [s.id for s in samples]
        )
        return [
            Prediction(
                sample_id=item["id"],
                summary=item["summary"],
                log_likelihood=float(item["log_likelihood"]),
                token_count=item["token_count"],
            )
            for item in items
        ]

    def close(self) -> None:
        if self._transport is not None:
            self._transport.close()
            self._transport = None
