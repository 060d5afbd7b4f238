"""Interactive session protocol: the counterstrategy game plus assumption
review, spoken as newline-delimited JSON over stdio, TCP, or a WebSocket
bridge.

Message kinds: game_init, env_move, user_move, verdict, proposal, accept,
reject, status. Sequence numbers increase per sender; replies carry the
sequence they answer in `reply_to`. Valuations travel at the typed level
(enum values by name, booleans as JSON booleans); comparison atoms appear
as boolean toggles named after their expression.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import sys
import threading
from dataclasses import dataclass, field

from .errors import ProtocolError
from .gr1 import (GameSession, GR1Spec, Realizable, add_assumption,
                  check_realizability, game_step)
from .ltl import to_text
from .mining import Candidate, enumerate_candidates


# ---------------------------------------------------------------------------
# typed valuation adapter


class TypedIO:
    """Maps typed variable valuations onto the spec's propositional atoms."""

    def __init__(self, spec: GR1Spec):
        self.spec = spec
        self.enc = spec.encoding
        input_set = set(spec.inputs)
        self.input_vars: list[str] = []
        self.output_vars: list[str] = []
        for name in sorted(set(self.enc.bools) | set(self.enc.enums)):
            atoms = self.enc.atoms_for_variable(name)
            if not atoms:
                continue
            side = self.input_vars if all(a in input_set for a in atoms) \
                else self.output_vars
            side.append(name)
        for name in sorted(self.enc.cmp_atoms):
            (self.input_vars if name in input_set else self.output_vars).append(name)

    def describe(self, name: str) -> dict:
        if name in self.enc.enums:
            values = list(self.enc.enums[name].patterns)
            return {"name": name, "kind": "enum", "values": values}
        if name in self.enc.cmp_atoms:
            atom = self.enc.cmp_atoms[name]
            return {"name": name, "kind": "bool", "text": to_text(atom)}
        return {"name": name, "kind": "bool"}

    def to_atoms(self, valuation: dict, names: list[str]) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for name in names:
            if name not in valuation:
                raise ProtocolError(f"missing variable {name!r}")
            value = valuation[name]
            if name in self.enc.enums:
                coding = self.enc.enums[name]
                if value not in coding.patterns:
                    raise ProtocolError(f"{name!r} has no value {value!r}")
                for bit, on in zip(coding.bits, coding.patterns[value]):
                    out[bit] = on
            else:
                if not isinstance(value, bool):
                    raise ProtocolError(f"{name!r} expects true/false")
                out[name] = value
        return out

    def from_atoms(self, atoms: dict[str, bool], names: list[str]) -> dict:
        decoded = self.enc.decode(atoms)
        return {name: decoded[name] for name in names if name in decoded}


# ---------------------------------------------------------------------------
# session core


@dataclass
class SessionMessage:
    seq: int
    kind: str
    payload: dict

    def line(self) -> str:
        return json.dumps({"seq": self.seq, "kind": self.kind,
                           "payload": self.payload}, sort_keys=True)


@dataclass
class SessionCore:
    """Transport-independent session state machine."""

    spec: GR1Spec
    counterstrategy: object
    requirements: list[dict] = field(default_factory=list)
    artifact_dir: str = "."
    token: str = ""
    seq: int = 0
    transcript: list[SessionMessage] = field(default_factory=list)
    phase: str = "game"
    mining_spec: GR1Spec | None = None
    candidates: list[Candidate] = field(default_factory=list)
    accepted: list[Candidate] = field(default_factory=list)
    rejected: set[str] = field(default_factory=set)
    game: GameSession | None = None
    saw_violation: bool = False

    def __post_init__(self):
        self.io = TypedIO(self.spec)
        self.game = GameSession(self.counterstrategy, self.spec)
        self.mining_spec = self.spec

    def _msg(self, kind: str, payload: dict) -> SessionMessage:
        self.seq += 1
        msg = SessionMessage(self.seq, kind, payload)
        self.transcript.append(msg)
        return msg

    def hello(self) -> list[SessionMessage]:
        init = self._msg("game_init", {
            "session": self.token,
            "inputs": [self.io.describe(v) for v in self.io.input_vars],
            "outputs": [self.io.describe(v) for v in self.io.output_vars],
            "requirements": self.requirements,
        })
        return [init, self._env_move_msg()]

    def _env_move_msg(self) -> SessionMessage:
        session = self.game
        arena = session.arena
        i_mask = arena.mask_of_inputs(session.current_inputs)
        if session.round == 0:
            replies = arena.initial_positions(i_mask)
        elif session.prev_pid is not None:
            replies = arena.sys_replies(session.prev_pid, i_mask)
        else:
            replies = []
        derived = self._forced_outputs(arena, replies)
        return self._msg("env_move", {
            "round": session.round,
            "inputs": self.io.from_atoms(session.current_inputs, self.io.input_vars),
            "derived": derived,
            "dead": not replies,
        })

    def _forced_outputs(self, arena, replies) -> dict:
        if not replies:
            return {}
        forced: dict[str, bool] = {}
        for i, atom in enumerate(arena.atoms):
            vals = {bool(arena.positions[p] >> i & 1) for p in replies}
            if len(vals) == 1:
                forced[atom] = vals.pop()
        out_names = [v for v in self.io.output_vars]
        decoded = self.io.from_atoms(forced, out_names)
        # only report variables whose every atom is pinned
        full = {}
        for name in out_names:
            atoms = self.io.enc.atoms_for_variable(name) or [name]
            if all(a in forced for a in atoms):
                full[name] = decoded.get(name)
        return full

    def handle(self, raw: dict) -> list[SessionMessage]:
        kind = raw.get("kind")
        payload = raw.get("payload") or {}
        reply_to = raw.get("seq")
        if kind == "user_move":
            return self._on_user_move(payload, reply_to)
        if kind == "accept":
            return self._on_accept(payload, reply_to)
        if kind == "reject":
            return self._on_reject(payload, reply_to)
        if kind == "status":
            if payload.get("action") == "propose":
                return self._start_mining()
            return [self._msg("status", {"reply_to": reply_to,
                                         "phase": self.phase,
                                         "accepted": [to_text(c.formula)
                                                      for c in self.accepted]})]
        raise ProtocolError(f"unexpected message kind {kind!r}")

    def _on_user_move(self, payload: dict, reply_to) -> list[SessionMessage]:
        outputs = payload.get("outputs")
        if not isinstance(outputs, dict):
            raise ProtocolError("user_move payload needs an outputs object")
        try:
            atom_outputs = self.io.to_atoms(outputs, self.io.output_vars)
        except ProtocolError as exc:
            return [self._msg("verdict", {"reply_to": reply_to,
                                          "result": "error", "error": str(exc)})]
        verdict, _next_inputs = game_step(self.counterstrategy, self.game,
                                          atom_outputs)
        out = [self._msg("verdict", {
            "reply_to": reply_to,
            "result": "ok" if verdict.ok else "violation",
            "violated": [{"source": c.origin, "formula": to_text(c.formula)}
                         for c in verdict.violated],
            "round": self.game.round - 1,
        })]
        out.append(self._env_move_msg())
        if not verdict.ok and not self.saw_violation:
            self.saw_violation = True
            out.extend(self._start_mining())
        return out

    def _start_mining(self) -> list[SessionMessage]:
        self.phase = "mining"
        self.candidates = [
            c for c in enumerate_candidates(self.counterstrategy, self.mining_spec)
            if to_text(c.formula) not in self.rejected]
        return self._propose_next()

    def _propose_next(self) -> list[SessionMessage]:
        if not self.candidates:
            return [self._msg("status", {"status": "exhausted",
                                         "accepted": [to_text(c.formula)
                                                      for c in self.accepted]})]
        cand = self.candidates[0]
        return [self._msg("proposal", {"rank": cand.rank,
                                       "formula": to_text(cand.formula),
                                       "english": cand.english})]

    def _find(self, rank) -> Candidate | None:
        for c in self.candidates:
            if c.rank == rank:
                return c
        return None

    def _on_accept(self, payload: dict, reply_to) -> list[SessionMessage]:
        cand = self._find(payload.get("rank"))
        if cand is None:
            raise ProtocolError(f"no pending proposal with rank {payload.get('rank')}")
        self.accepted.append(cand)
        self.mining_spec = add_assumption(self.mining_spec, cand.formula,
                                          origin=f"assumption[{len(self.accepted)}]")
        result = check_realizability(self.mining_spec)
        if isinstance(result, Realizable):
            path = os.path.join(self.artifact_dir, "moore_machine.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(result.machine.to_json(), fh, indent=2, sort_keys=True)
            dot = os.path.join(self.artifact_dir, "moore_machine.dot")
            with open(dot, "w", encoding="utf-8") as fh:
                fh.write(result.machine.to_dot())
            self.phase = "done"
            return [self._msg("status", {
                "status": "realizable", "reply_to": reply_to,
                "accepted": [to_text(c.formula) for c in self.accepted],
                "machine": path,
            })]
        # still unrealizable: continue against the fresh counterstrategy
        self.counterstrategy = result.counterstrategy
        self.game = GameSession(self.counterstrategy, self.mining_spec)
        self.candidates = [
            c for c in enumerate_candidates(self.counterstrategy, self.mining_spec)
            if to_text(c.formula) not in self.rejected]
        return self._propose_next()

    def _on_reject(self, payload: dict, reply_to) -> list[SessionMessage]:
        cand = self._find(payload.get("rank"))
        if cand is None:
            raise ProtocolError(f"no pending proposal with rank {payload.get('rank')}")
        self.rejected.add(to_text(cand.formula))
        self.candidates = [c for c in self.candidates if c.rank != cand.rank]
        return self._propose_next()


# ---------------------------------------------------------------------------
# transports


class SessionServer:
    """Serves one SessionCore per connection; keeps finished transcripts so a
    reconnect can replay a session from sequence zero."""

    def __init__(self, spec: GR1Spec, counterstrategy, requirements,
                 artifact_dir: str = "."):
        self.spec = spec
        self.counterstrategy = counterstrategy
        self.requirements = requirements
        self.artifact_dir = artifact_dir
        self.sessions: dict[str, SessionCore] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def new_core(self) -> SessionCore:
        with self._lock:
            self._counter += 1
            token = f"session-{self._counter}"
        core = SessionCore(self.spec, self.counterstrategy, self.requirements,
                           self.artifact_dir, token=token)
        self.sessions[token] = core
        return core

    def run_stdio(self, stdin=None, stdout=None):
        stdin = stdin or sys.stdin
        stdout = stdout or sys.stdout
        core = self.new_core()

        def send(msgs):
            for m in msgs:
                stdout.write(m.line() + "\n")
            stdout.flush()

        send(core.hello())
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                send([core._msg("status", {"error": f"bad JSON: {exc}"})])
                break
            if raw.get("kind") == "status" and \
                    (raw.get("payload") or {}).get("action") == "resume":
                token = raw["payload"].get("session")
                stored = self.sessions.get(token)
                if stored is None:
                    send([core._msg("status", {"error": "unknown session"})])
                    continue
                core = stored
                send_replay = list(core.transcript)
                for m in send_replay:
                    stdout.write(m.line() + "\n")
                stdout.flush()
                continue
            try:
                send(core.handle(raw))
            except ProtocolError as exc:
                send([core._msg("status", {"error": str(exc)})])
                break

    def serve_tcp(self, port: int, host: str = "127.0.0.1",
                  ready_event: threading.Event | None = None):
        srv = socket.create_server((host, port))
        if ready_event is not None:
            ready_event.set()
        while True:
            conn, _addr = srv.accept()
            threading.Thread(target=self._tcp_client, args=(conn,),
                             daemon=True).start()

    def _tcp_client(self, conn: socket.socket):
        with conn:
            reader = conn.makefile("r", encoding="utf-8")
            writer = conn.makefile("w", encoding="utf-8")
            self.run_stdio(stdin=reader, stdout=writer)

    # -- WebSocket bridge (RFC 6455, text frames only)

    def serve_ws(self, port: int, host: str = "127.0.0.1",
                 ready_event: threading.Event | None = None):
        srv = socket.create_server((host, port))
        if ready_event is not None:
            ready_event.set()
        while True:
            conn, _addr = srv.accept()
            threading.Thread(target=self._ws_client, args=(conn,),
                             daemon=True).start()

    def _ws_client(self, conn: socket.socket):
        with conn:
            try:
                request = b""
                while b"\r\n\r\n" not in request:
                    chunk = conn.recv(4096)
                    if not chunk:
                        return
                    request += chunk
                key = None
                for line in request.decode("latin-1").split("\r\n"):
                    if line.lower().startswith("sec-websocket-key:"):
                        key = line.split(":", 1)[1].strip()
                if key is None:
                    return
                accept = base64.b64encode(hashlib.sha1(
                    (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()
                ).digest()).decode()
                conn.sendall((
                    "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode())
                core = self.new_core()

                def send(msgs):
                    for m in msgs:
                        _ws_send_text(conn, m.line())

                send(core.hello())
                buffer = b""
                while True:
                    text, buffer = _ws_read_text(conn, buffer)
                    if text is None:
                        return
                    raw = json.loads(text)
                    if raw.get("kind") == "status" and \
                            (raw.get("payload") or {}).get("action") == "resume":
                        token = raw["payload"].get("session")
                        stored = self.sessions.get(token)
                        if stored is not None:
                            core = stored
                            for m in core.transcript:
                                _ws_send_text(conn, m.line())
                        continue
                    try:
                        send(core.handle(raw))
                    except ProtocolError as exc:
                        send([core._msg("status", {"error": str(exc)})])
                        return
            except (ConnectionError, json.JSONDecodeError, OSError):
                return


def _ws_send_text(conn: socket.socket, text: str):
    data = text.encode("utf-8")
    header = bytearray([0x81])
    n = len(data)
    if n < 126:
        header.append(n)
    elif n < 65536:
        header.append(126)
        header += struct.pack(">H", n)
    else:
        header.append(127)
        header += struct.pack(">Q", n)
    conn.sendall(bytes(header) + data)


def _ws_read_text(conn: socket.socket, buffer: bytes):
    """Read one complete text message; replies to pings, returns None on close."""
    message = b""
    while True:
        while len(buffer) < 2:
            chunk = conn.recv(4096)
            if not chunk:
                return None, buffer
            buffer += chunk
        b0, b1 = buffer[0], buffer[1]
        fin, opcode = b0 & 0x80, b0 & 0x0F
        masked, length = b1 & 0x80, b1 & 0x7F
        idx = 2
        if length == 126:
            while len(buffer) < idx + 2:
                buffer += conn.recv(4096)
            length = struct.unpack(">H", buffer[idx:idx + 2])[0]
            idx += 2
        elif length == 127:
            while len(buffer) < idx + 8:
                buffer += conn.recv(4096)
            length = struct.unpack(">Q", buffer[idx:idx + 8])[0]
            idx += 8
        mask = b""
        if masked:
            while len(buffer) < idx + 4:
                buffer += conn.recv(4096)
            mask = buffer[idx:idx + 4]
            idx += 4
        while len(buffer) < idx + length:
            chunk = conn.recv(4096)
            if not chunk:
                return None, buffer
            buffer += chunk
        payload = buffer[idx:idx + length]
        buffer = buffer[idx + length:]
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:          # close
            return None, buffer
        if opcode == 0x9:          # ping -> pong
            conn.sendall(bytes([0x8A, len(payload)]) + payload)
            continue
        if opcode in (0x1, 0x0):   # text or continuation
            message += payload
            if fin:
                return message.decode("utf-8"), buffer
            continue
        # ignore binary/pong frames
        if fin and opcode == 0xA:
            continue
