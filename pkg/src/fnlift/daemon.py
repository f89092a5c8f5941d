"""Long-lived JSON-RPC 2.0 daemon over stdio.

Framing is LSP-style: `Content-Length: N\\r\\n\\r\\n` then N bytes of UTF-8
JSON. Requests are processed strictly serially in arrival order; `cancel` is
the single out-of-band message and may land while a request runs.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from queue import Empty, Queue

from . import __version__
from .config import Config, load_config
from .equiv import VerdictKind
from .errors import MarkerMissing, SelectionInvalid, ToolchainMissing, VersionMismatch
from .pipeline import MODES, run_extraction, run_verification
from .repair import probe_toolchain
from .source import load_default_catalog, parse_unit

# application error codes
E_SELECTION_INVALID = 1001
E_INFERENCE_FAILURE = 1002
E_REPAIR_EXHAUSTED = 1003
E_UNSUPPORTED_FEATURE = 1004
E_VERIFICATION_TIMEOUT = 1005
E_MARKER_MISSING = 1006
E_TOOLCHAIN_MISSING = 1007
E_SESSION_EXPIRED = 1008
E_CANCELLED = -32800

_INSTALL_GUIDANCE = (
    "the object-language toolchain was not found; install it with "
    "`curl https://sh.rustup.rs -sSf | sh` (or your distribution package) "
    "and make sure `rustc` is on PATH, or point repair.check_cmd at it"
)


class RpcError(Exception):
    def __init__(self, code: int, message: str, data=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.data = data


@dataclass
class Session:
    id: str
    pre_text: str
    post_text: str
    mode: str
    timings: dict[str, int] = field(default_factory=dict)


def read_frame(stream) -> bytes | None:
    """One framed message; None at EOF. Headers are ASCII, length in bytes."""
    length = None
    while True:
        line = stream.readline()
        if not line:
            return None
        if line in (b"\r\n", b"\n"):
            break
        if line.lower().startswith(b"content-length:"):
            try:
                length = int(line.split(b":", 1)[1].strip())
            except ValueError:
                return None
    if length is None:
        return None
    data = b""
    while len(data) < length:
        chunk = stream.read(length - len(data))
        if not chunk:
            return None
        data += chunk
    return data


def write_frame(stream, payload: dict) -> None:
    body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    stream.write(b"Content-Length: " + str(len(body)).encode("ascii") + b"\r\n\r\n")
    stream.write(body)
    stream.flush()


class Daemon:
    def __init__(self, stdin, stdout, config: Config | None = None):
        self.stdin = stdin
        self.stdout = stdout
        self.config = config or Config()
        self.catalog = load_default_catalog()
        self.sessions: OrderedDict[str, Session] = OrderedDict()
        self.issued_ids: set[str] = set()
        self.queue: Queue = Queue()
        self.pending: list[dict] = []
        self.cancelled: set = set()
        self.current_id = None
        self.shutting_down = False
        self._write_lock = threading.Lock()

    # -- transport ---------------------------------------------------------

    def _reader(self) -> None:
        while True:
            data = read_frame(self.stdin)
            if data is None:
                self.queue.put(None)
                return
            self.queue.put(data)

    def _respond(self, msg_id, result=None, error: RpcError | None = None) -> None:
        payload: dict = {"jsonrpc": "2.0", "id": msg_id}
        if error is not None:
            payload["error"] = {"code": error.code, "message": error.message}
            if error.data is not None:
                payload["error"]["data"] = error.data
        else:
            payload["result"] = result
        with self._write_lock:
            write_frame(self.stdout, payload)

    def serve(self) -> None:
        reader = threading.Thread(target=self._reader, daemon=True)
        reader.start()
        while not self.shutting_down:
            msg = self._next_message()
            if msg is None:
                return
            self._handle(msg)

    def _next_message(self):
        if self.pending:
            return self.pending.pop(0)
        item = self.queue.get()
        if item is None:
            return None
        return self._decode(item)

    def _decode(self, data: bytes):
        try:
            obj = json.loads(data.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._respond(None, error=RpcError(-32700, "parse error"))
            return {"__skip__": True}
        return obj

    def _drain_cancels(self) -> None:
        """Pull queued messages without blocking; act on cancels, keep the rest."""
        while True:
            try:
                item = self.queue.get_nowait()
            except Empty:
                return
            if item is None:
                self.pending.append({"__eof__": True})
                return
            obj = self._decode(item)
            if isinstance(obj, dict) and obj.get("method") == "cancel":
                params = obj.get("params") or {}
                self.cancelled.add(params.get("id"))
                if "id" in obj:
                    self._respond(obj["id"], result=None)
            else:
                self.pending.append(obj)

    def _should_stop(self) -> bool:
        self._drain_cancels()
        return self.current_id in self.cancelled

    # -- dispatch ----------------------------------------------------------

    def _handle(self, obj) -> None:
        if not isinstance(obj, dict) or obj.get("__skip__"):
            return
        if obj.get("__eof__"):
            self.shutting_down = True
            return
        if obj.get("jsonrpc") != "2.0" or "method" not in obj:
            self._respond(obj.get("id"), error=RpcError(-32600, "invalid request"))
            return
        method = obj["method"]
        msg_id = obj.get("id")
        params = obj.get("params") or {}
        if method == "cancel":
            self.cancelled.add(params.get("id"))
            if msg_id is not None:
                self._respond(msg_id, result=None)
            return
        handler = getattr(self, f"_rpc_{method}", None)
        if handler is None:
            self._respond(msg_id, error=RpcError(-32601, f"method not found: {method}"))
            return
        self.current_id = msg_id
        try:
            result = handler(params)
        except RpcError as exc:
            self._respond(msg_id, error=exc)
        except (SelectionInvalid,) as exc:
            self._respond(msg_id, error=RpcError(E_SELECTION_INVALID, str(exc)))
        except MarkerMissing as exc:
            self._respond(msg_id, error=RpcError(E_MARKER_MISSING, str(exc)))
        except ToolchainMissing as exc:
            self._respond(msg_id, error=RpcError(E_TOOLCHAIN_MISSING, f"{exc}; {_INSTALL_GUIDANCE}"))
        except (ValueError, VersionMismatch) as exc:
            self._respond(msg_id, error=RpcError(-32602, str(exc)))
        except Exception as exc:  # crash isolation: the daemon must survive
            self._respond(msg_id, error=RpcError(-32603, f"internal error: {exc!r}"))
        else:
            if self.current_id in self.cancelled:
                self.cancelled.discard(self.current_id)
                self._respond(msg_id, error=RpcError(E_CANCELLED, "request cancelled"))
            else:
                self._respond(msg_id, result=result)
        finally:
            self.current_id = None

    # -- methods -----------------------------------------------------------

    def _rpc_initialize(self, params) -> dict:
        version = probe_toolchain(self.config)
        status: dict = {"status": "ok", "version": version} if version else {
            "status": "missing",
            "guidance": _INSTALL_GUIDANCE,
        }
        return {
            "serverVersion": __version__,
            "capabilities": {
                "methods": ["initialize", "extract", "verify", "revert", "cancel", "shutdown"],
                "modes": list(MODES),
            },
            "toolchainStatus": status,
        }

    def _rpc_shutdown(self, params) -> None:
        self.shutting_down = True
        return None

    def _rpc_extract(self, params) -> dict:
        file_text = params.get("fileText")
        file_path = params.get("filePath", "<buffer>")
        if file_text is None:
            if "filePath" not in params:
                raise RpcError(-32602, "extract needs filePath or fileText")
            unit = parse_unit(params["filePath"])
        else:
            unit = parse_unit(file_path, file_text)
        name = params.get("functionName")
        if not name:
            raise RpcError(-32602, "extract needs functionName")
        mode = params.get("mode", "Extract")
        if mode not in MODES:
            raise RpcError(-32602, f"unknown mode {mode!r}")
        start = params.get("startByte")
        end = params.get("endByte")

        result = run_extraction(
            unit,
            name,
            mode,
            start=start,
            end=end,
            config=self.config,
            catalog=self.catalog,
            should_stop=self._should_stop,
        )
        if result.outcome.failure is not None:
            fail = result.outcome.failure
            raise RpcError(
                E_INFERENCE_FAILURE,
                str(fail),
                data={"code": fail.code.value, "detail": fail.detail, "flags": sorted(result.outcome.flags)},
            )
        if result.repair_outcome is not None and not result.repair_outcome.compiling:
            status = result.repair_outcome.status.value
            if status == "NonLifetimeError":
                raise RpcError(
                    E_REPAIR_EXHAUSTED,
                    "repair aborted: diagnostics outside the lifetime class",
                    data={"status": status},
                )
            raise RpcError(E_REPAIR_EXHAUSTED, "lifetime repair exhausted its budget", data={"status": status})

        session = Session(
            id=uuid.uuid4().hex,
            pre_text=result.pre_text,
            post_text=result.final_text,
            mode=mode,
            timings={
                "extract": result.raw_ns,
                "repair": result.repair_ns,
                "verify": result.verify_ns,
                "total": result.total_ns,
            },
        )
        self._remember(session)

        out = {
            "sessionId": session.id,
            "edits": [
                {"startByte": s, "endByte": e, "replacement": r}
                for s, e, r in result.outcome.script.edits
            ],
            "fileText": result.final_text,
            "newFunctionText": result.outcome.new_fn_text,
            "flags": sorted(result.outcome.flags),
            "timings": session.timings,
        }
        if result.repair_outcome is not None:
            out["repair"] = {
                "status": result.repair_outcome.status.value,
                "elisionApplied": result.repair_outcome.elision_applied,
            }
        if result.verdict is not None:
            out["verdict"] = result.verdict.to_record()
            out["report"] = result.report
        return out

    def _rpc_verify(self, params) -> dict:
        for key in ("originalText", "refactoredText", "callerName"):
            if key not in params:
                raise RpcError(-32602, f"verify needs {key}")
        config = self.config
        dc = params.get("domainConfig") or {}
        if dc:
            from dataclasses import replace

            config = replace(
                config,
                domain_int_lo=dc.get("intLo", config.domain_int_lo),
                domain_int_hi=dc.get("intHi", config.domain_int_hi),
                domain_budget=dc.get("budget", config.domain_budget),
                domain_fuel=dc.get("fuel", config.domain_fuel),
                verify_timeout_s=dc.get("timeoutSeconds", config.verify_timeout_s),
            )
        verdict, report = run_verification(
            params["originalText"],
            params["refactoredText"],
            params["callerName"],
            config=config,
            should_stop=self._should_stop,
            callee_name=params.get("calleeName"),
        )
        record = verdict.to_record()
        record["report"] = report
        if verdict.kind is VerdictKind.UNSUPPORTED:
            raise RpcError(E_UNSUPPORTED_FEATURE, f"unsupported: {verdict.unsupported_reason}", data=record)
        if verdict.kind is VerdictKind.TIMEOUT:
            raise RpcError(E_VERIFICATION_TIMEOUT, verdict.evidence or "verification timed out", data=record)
        return record

    def _rpc_revert(self, params) -> dict:
        sid = params.get("sessionId")
        if not isinstance(sid, str):
            raise RpcError(-32602, "revert needs sessionId")
        session = self.sessions.get(sid)
        if session is None:
            if sid in self.issued_ids:
                raise RpcError(E_SESSION_EXPIRED, "session evicted from the in-memory cache")
            raise RpcError(-32602, f"unknown sessionId {sid!r}")
        return {"fileText": session.pre_text}

    def _remember(self, session: Session) -> None:
        self.sessions[session.id] = session
        self.issued_ids.add(session.id)
        while len(self.sessions) > self.config.session_cap:
            self.sessions.popitem(last=False)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fnlift-daemon", description="fnlift JSON-RPC daemon on stdio")
    parser.add_argument("--config", help="path to a key=value config file")
    args = parser.parse_args(argv)
    config = load_config(args.config)
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    Daemon(stdin, stdout, config).serve()
    return 0


if __name__ == "__main__":
    sys.exit(main())
