import assert from "node:assert/strict";
import { test } from "node:test";

import { SessionClient } from "../src/client.js";
import type { SessionMessage } from "../src/protocol.js";
import type { Transport } from "../src/transport.js";

class FakeTransport implements Transport {
  sent: any[] = [];
  handler: ((msg: SessionMessage) => void) | null = null;

  send(message: object): void {
    this.sent.push(message);
  }
  onMessage(handler: (msg: SessionMessage) => void): void {
    this.handler = handler;
  }
  onClose(_handler: () => void): void {}
  close(): void {}
  push(msg: SessionMessage): void {
    this.handler?.(msg);
  }
}

const INIT: SessionMessage = {
  seq: 1,
  kind: "game_init",
  payload: {
    session: "session-1",
    inputs: [{ name: "Regulator_Init_Timeout", kind: "bool" }],
    outputs: [
      { name: "Regulator_Mode", kind: "enum", values: ["INIT", "NORMAL"] },
      { name: "Regulator_Status", kind: "bool" },
    ],
    requirements: [{ id: 13, source: "Req MRM 2", text: "..." }],
  },
};

const MOVE: SessionMessage = {
  seq: 2,
  kind: "env_move",
  payload: {
    round: 0,
    inputs: { Regulator_Init_Timeout: true },
    derived: { Regulator_Status: true },
    dead: false,
  },
};

function bootstrapped(): [SessionClient, FakeTransport] {
  const transport = new FakeTransport();
  const client = new SessionClient(transport);
  transport.push(INIT);
  transport.push(MOVE);
  return [client, transport];
}

test("game_init and env_move populate the view", () => {
  const [client] = bootstrapped();
  assert.equal(client.state.phase, "playing");
  assert.equal(client.state.round, 0);
  assert.equal(client.state.currentInputs.Regulator_Init_Timeout, true);
  assert.equal(client.state.derived.Regulator_Status, true);
});

test("incomplete form is blocked client-side", () => {
  const [client, transport] = bootstrapped();
  const ok = client.submitOutputs({ Regulator_Mode: "INIT" });
  assert.equal(ok, false);
  assert.match(client.state.formError ?? "", /Regulator_Status/);
  assert.equal(transport.sent.length, 0);
});

test("unknown enum value is blocked client-side", () => {
  const [client, transport] = bootstrapped();
  const ok = client.submitOutputs({ Regulator_Mode: "HALT",
                                    Regulator_Status: false });
  assert.equal(ok, false);
  assert.equal(transport.sent.length, 0);
});

test("complete form is sent and the verdict lands in the transcript", () => {
  const [client, transport] = bootstrapped();
  const ok = client.submitOutputs({ Regulator_Mode: "INIT",
                                    Regulator_Status: true });
  assert.equal(ok, true);
  assert.equal(transport.sent[0].kind, "user_move");
  transport.push({
    seq: 3,
    kind: "verdict",
    payload: { result: "violation", round: 0,
               violated: [{ source: "Req MRM 2", formula: "..." }] },
  });
  assert.deepEqual(client.state.banner, ["Req MRM 2"]);
  assert.equal(client.state.transcript.length, 1);
  assert.equal(client.state.transcript[0].outputs.Regulator_Mode, "INIT");
});

test("proposal and accept flow reach the realizable state", () => {
  const [client, transport] = bootstrapped();
  transport.push({
    seq: 3,
    kind: "proposal",
    payload: { rank: 1, formula: "G(NOT(a AND b))", english: "Never a and b." },
  });
  assert.equal(client.state.phase, "reviewing");
  client.reviewAssumption("accept");
  assert.deepEqual(transport.sent.at(-1), {
    seq: 1, kind: "accept", payload: { rank: 1 },
  });
  transport.push({
    seq: 4,
    kind: "status",
    payload: { status: "realizable", accepted: ["G(NOT(a AND b))"],
               machine: "out/moore_machine.json" },
  });
  assert.equal(client.state.phase, "realizable");
  assert.equal(client.state.machine, "out/moore_machine.json");
});

test("replayed transcript after resume resets rather than duplicates", () => {
  const [client, transport] = bootstrapped();
  client.submitOutputs({ Regulator_Mode: "INIT", Regulator_Status: true });
  transport.push({ seq: 3, kind: "verdict",
                   payload: { result: "ok", round: 0, violated: [] } });
  assert.equal(client.state.transcript.length, 1);
  // server replays from seq 1 after a resume request
  transport.push(INIT);
  assert.equal(client.state.transcript.length, 0);
  assert.equal(client.state.phase, "playing");
});
