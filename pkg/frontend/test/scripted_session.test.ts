// End-to-end protocol conformance against a live `reqlift serve` process.
// The clash round must name Req MRM 4 (NORMAL reply) and Req MRM 2 (FAILED
// reply), and accepting the rank-1 assumption must reach the realizable
// screen with a machine artifact.

import assert from "node:assert/strict";
import { spawn, type ChildProcess } from "node:child_process";
import { createHash, randomBytes } from "node:crypto";
import { mkdtempSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { after, before, test } from "node:test";
import { fileURLToPath } from "node:url";

import { SessionClient, type ClientState } from "../src/client.js";
import type { SessionMessage } from "../src/protocol.js";
import type { Transport } from "../src/transport.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const REPO = path.resolve(HERE, "..", "..", "..");
const CORPUS = path.join(REPO, "src", "reqlift", "data", "isolette.corpus");
const CONFIG = path.join(REPO, "src", "reqlift", "data", "isolette.config.json");

const PORT = 47360 + (process.pid % 400);
const WS_PORT = PORT + 1;

// Output valuations consistent with the served corpus's wire definitions
// (the engine is deterministic, so these are stable golden data, not logic).
const ROUND0 = {
  Regulator_Mode: "INIT",
  Output_Regulator_Status: "Init",
  Heat_Control: "Off",
  Regulator_Interface_Failure: false,
  Regulator_Status: true,
};
const CLASH_NORMAL = {
  Regulator_Mode: "NORMAL",
  Output_Regulator_Status: "On",
  Heat_Control: "Off",
  Regulator_Interface_Failure: true,
  Regulator_Status: false,
};
const CLASH_FAILED = {
  Regulator_Mode: "FAILED",
  Output_Regulator_Status: "Failed",
  Heat_Control: "Control_Off",
  Regulator_Interface_Failure: true,
  Regulator_Status: false,
};

class TcpLineTransport implements Transport {
  private socket: net.Socket;
  private buffer = "";
  private messageHandler: ((msg: SessionMessage) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private backlog: SessionMessage[] = [];

  constructor(port: number) {
    this.socket = net.createConnection({ host: "127.0.0.1", port });
    this.socket.setEncoding("utf-8");
    this.socket.on("data", (chunk: string) => {
      this.buffer += chunk;
      let idx;
      while ((idx = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, idx).trim();
        this.buffer = this.buffer.slice(idx + 1);
        if (!line) continue;
        const msg = JSON.parse(line) as SessionMessage;
        if (this.messageHandler) this.messageHandler(msg);
        else this.backlog.push(msg);
      }
    });
    this.socket.on("close", () => this.closeHandler?.());
    this.socket.on("error", () => this.closeHandler?.());
  }

  send(message: object): void {
    this.socket.write(JSON.stringify(message) + "\n");
  }
  onMessage(handler: (msg: SessionMessage) => void): void {
    this.messageHandler = handler;
    for (const msg of this.backlog.splice(0)) handler(msg);
  }
  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }
  close(): void {
    this.socket.destroy();
  }
}

function waitFor(client: SessionClient,
                 predicate: (s: ClientState) => boolean,
                 label: string, timeoutMs = 20000): Promise<ClientState> {
  return new Promise((resolve, reject) => {
    if (predicate(client.state)) return resolve(client.state);
    const timer = setTimeout(
      () => reject(new Error(`timeout waiting for ${label}`)), timeoutMs);
    client.onChange((state) => {
      if (predicate(state)) {
        clearTimeout(timer);
        resolve(state);
      }
    });
  });
}

let server: ChildProcess;
let artifactDir: string;

before(async () => {
  artifactDir = mkdtempSync(path.join(os.tmpdir(), "reqlift-ui-"));
  server = spawn("reqlift", [
    "serve", "--corpus", CORPUS, "--config", CONFIG,
    "--port", String(PORT), "--ws-port", String(WS_PORT),
    "--out", artifactDir,
  ], { stdio: ["ignore", "ignore", "pipe"] });
  await new Promise<void>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server never came up")),
                             30000);
    server.stderr!.on("data", (chunk: Buffer) => {
      if (String(chunk).includes("serving")) {
        clearTimeout(timer);
        resolve();
      }
    });
    server.on("exit", (code) =>
      reject(new Error(`server exited early with ${code}`)));
  });
});

after(() => {
  server?.kill();
});

test("clash round: NORMAL reply violates Req MRM 4, FAILED violates Req MRM 2",
     async () => {
  for (const [reply, tag] of [
    [CLASH_NORMAL, "Req MRM 4"],
    [CLASH_FAILED, "Req MRM 2"],
  ] as const) {
    const client = new SessionClient(new TcpLineTransport(PORT));
    await waitFor(client, (s) => s.phase === "playing" && s.round === 0,
                  "first env move");
    assert.equal(client.state.currentInputs.Regulator_Init_Timeout, true);
    assert.equal(client.state.derived.Regulator_Status, true);

    assert.ok(client.submitOutputs(ROUND0));
    await waitFor(client, (s) => s.transcript.length === 1, "round 0 verdict");
    assert.equal(client.state.transcript[0].result, "ok");

    assert.ok(client.submitOutputs(reply));
    await waitFor(client, (s) => s.transcript.length === 2, "clash verdict");
    assert.equal(client.state.transcript[1].result, "violation");
    assert.deepEqual(client.state.transcript[1].violated, [tag]);
    assert.deepEqual(client.state.banner, [tag]);
    client.close();
  }
});

test("accept flow reaches the realizable screen with a machine artifact",
     async () => {
  const client = new SessionClient(new TcpLineTransport(PORT));
  await waitFor(client, (s) => s.phase === "playing", "session start");
  client.requestProposals();
  const reviewing = await waitFor(client, (s) => s.proposal !== null,
                                  "a proposal");
  assert.equal(reviewing.proposal!.rank, 1);
  assert.match(reviewing.proposal!.formula, /Regulator_Init_Timeout/);
  assert.match(reviewing.proposal!.formula, /Regulator_Status/);
  assert.match(reviewing.proposal!.english, /never the case/);
  client.reviewAssumption("accept");
  const done = await waitFor(client, (s) => s.phase === "realizable",
                             "the realizable screen");
  assert.equal(done.accepted.length, 1);
  assert.ok(done.machine && done.machine.endsWith("moore_machine.json"));
  client.close();
});

test("rejecting every proposal exhausts the recommendations", async () => {
  const client = new SessionClient(new TcpLineTransport(PORT));
  await waitFor(client, (s) => s.phase === "playing", "session start");
  client.requestProposals();
  for (let i = 0; i < 10; i += 1) {
    const state = await waitFor(
      client, (s) => s.proposal !== null || s.phase === "exhausted",
      "proposal or exhaustion");
    if (state.phase === "exhausted") break;
    client.reviewAssumption("reject");
  }
  await waitFor(client, (s) => s.phase === "exhausted", "exhaustion");
  client.close();
});

test("reconnect replays the transcript from sequence zero", async () => {
  const transport = new TcpLineTransport(PORT);
  const seen: SessionMessage[] = [];
  transport.onMessage((msg) => seen.push(msg));
  await new Promise((r) => setTimeout(r, 1500));
  const token = (seen[0]!.payload as { session: string }).session;
  assert.equal(seen[0]!.kind, "game_init");

  const again = new TcpLineTransport(PORT);
  const replay: SessionMessage[] = [];
  again.onMessage((msg) => replay.push(msg));
  await new Promise((r) => setTimeout(r, 1000));
  again.send({ seq: 1, kind: "status",
               payload: { action: "resume", session: token } });
  await new Promise((r) => setTimeout(r, 1500));
  const replayed = replay.slice(2); // after the throwaway fresh session pair
  assert.equal(replayed[0]!.seq, 1);
  assert.equal(replayed[0]!.kind, "game_init");
  assert.equal((replayed[0]!.payload as { session: string }).session, token);
  transport.close();
  again.close();
});

// -- the WebSocket bridge speaks the same protocol

function wsConnect(port: number): Promise<{ socket: net.Socket;
                                            first: Promise<SessionMessage> }> {
  return new Promise((resolve, reject) => {
    const key = randomBytes(16).toString("base64");
    const socket = net.createConnection({ host: "127.0.0.1", port }, () => {
      socket.write(
        `GET / HTTP/1.1\r\nHost: 127.0.0.1:${port}\r\n` +
        `Upgrade: websocket\r\nConnection: Upgrade\r\n` +
        `Sec-WebSocket-Key: ${key}\r\nSec-WebSocket-Version: 13\r\n\r\n`);
    });
    socket.on("error", reject);
    let stage: "handshake" | "frames" = "handshake";
    let buffer = Buffer.alloc(0);
    const expected = createHash("sha1")
      .update(key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11")
      .digest("base64");
    let firstResolve: (m: SessionMessage) => void;
    const first = new Promise<SessionMessage>((res) => { firstResolve = res; });
    socket.on("data", (chunk: Buffer) => {
      buffer = Buffer.concat([buffer, chunk]);
      if (stage === "handshake") {
        const end = buffer.indexOf("\r\n\r\n");
        if (end < 0) return;
        const header = buffer.subarray(0, end).toString("latin1");
        assert.match(header, /101 Switching Protocols/);
        assert.ok(header.includes(expected));
        buffer = buffer.subarray(end + 4);
        stage = "frames";
        resolve({ socket, first });
      }
      while (stage === "frames" && buffer.length >= 2) {
        const len0 = buffer[1]! & 0x7f;
        let offset = 2;
        let length = len0;
        if (len0 === 126) {
          if (buffer.length < 4) return;
          length = buffer.readUInt16BE(2);
          offset = 4;
        } else if (len0 === 127) {
          if (buffer.length < 10) return;
          length = Number(buffer.readBigUInt64BE(2));
          offset = 10;
        }
        if (buffer.length < offset + length) return;
        const payload = buffer.subarray(offset, offset + length);
        buffer = buffer.subarray(offset + length);
        firstResolve(JSON.parse(payload.toString("utf-8")) as SessionMessage);
      }
    });
  });
}

test("the WebSocket bridge serves game_init", async () => {
  const { socket, first } = await wsConnect(WS_PORT);
  const message = await first;
  assert.equal(message.kind, "game_init");
  const payload = message.payload as { outputs: { name: string }[] };
  assert.ok(payload.outputs.some((o) => o.name === "Regulator_Mode"));
  socket.destroy();
});
