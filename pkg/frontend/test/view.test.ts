import assert from "node:assert/strict";
import { test } from "node:test";

import type { ClientState } from "../src/client.js";
import {
  renderApp,
  renderBanner,
  renderInputs,
  renderOutputControls,
  renderProposal,
  renderTranscript,
} from "../src/view.js";

function baseState(): ClientState {
  return {
    phase: "playing",
    session: "session-1",
    round: 0,
    inputs: [
      { name: "Regulator_Init_Timeout", kind: "bool" },
      { name: "Lower_Desired_Temperature_Status", kind: "enum",
        values: ["Invalid", "Valid"] },
    ],
    outputs: [
      { name: "Regulator_Mode", kind: "enum",
        values: ["INIT", "NORMAL", "FAILED"] },
      { name: "Regulator_Status", kind: "bool" },
    ],
    requirements: [],
    currentInputs: { Regulator_Init_Timeout: true,
                     Lower_Desired_Temperature_Status: "Valid" },
    derived: { Regulator_Status: true },
    dead: false,
    banner: null,
    formError: null,
    proposal: null,
    accepted: [],
    machine: null,
    transcript: [],
    lastSeq: 2,
  };
}

test("inputs render read-only with derived hints", () => {
  const state = baseState();
  const html = renderInputs(state.inputs, state.currentInputs, state.derived);
  assert.match(html, /Regulator_Init_Timeout/);
  assert.match(html, /toggle readonly on/);
  assert.match(html, /forced by definitions/);
  assert.match(html, /Regulator_Status=true/);
  assert.doesNotMatch(html, /<select/);
});

test("output controls cover exactly the declared atoms", () => {
  const html = renderOutputControls(baseState().outputs, {});
  const selects = html.match(/data-output="([^"]+)"/g) ?? [];
  assert.deepEqual(selects, [
    'data-output="Regulator_Mode"',
    'data-output="Regulator_Status"',
  ]);
  assert.match(html, /<option value="NORMAL">NORMAL<\/option>/);
  assert.match(html, /type="checkbox"/);
});

test("violation banner names the requirement tags", () => {
  const state = baseState();
  state.banner = ["Req MRM 2", "Req MRM 4"];
  const html = renderBanner(state);
  assert.match(html, /banner violation/);
  assert.match(html, /Req MRM 2<\/b> vs <b>Req MRM 4/);
});

test("transcript renders one row per move", () => {
  const state = baseState();
  state.transcript.push({
    round: 0,
    inputs: { Regulator_Init_Timeout: true },
    outputs: { Regulator_Mode: "INIT" },
    result: "ok",
    violated: [],
  });
  state.transcript.push({
    round: 1,
    inputs: { Regulator_Init_Timeout: false },
    outputs: { Regulator_Mode: "NORMAL" },
    result: "violation",
    violated: ["Req MRM 4"],
  });
  const html = renderTranscript(state);
  assert.equal((html.match(/<tr>/g) ?? []).length, 3); // header + 2 rows
  assert.match(html, /violation: Req MRM 4/);
});

test("one proposal visible at a time with accept and reject", () => {
  const state = baseState();
  state.proposal = {
    rank: 1,
    formula: "G(NOT(Regulator_Init_Timeout = true AND Regulator_Status = true))",
    english: "Globally, it is never the case that ...",
  };
  const html = renderProposal(state);
  assert.match(html, /Suggested assumption #1/);
  assert.match(html, /data-action="accept"/);
  assert.match(html, /data-action="reject"/);
});

test("realizable screen links the machine artifact", () => {
  const state = baseState();
  state.phase = "realizable";
  state.machine = "out/moore_machine.json";
  state.accepted = ["G(NOT(a AND b))"];
  const html = renderApp(state);
  assert.match(html, /Specification realizable/);
  assert.match(html, /moore_machine\.json/);
});

test("connection loss shows the retry banner", () => {
  const state = baseState();
  state.phase = "closed";
  assert.match(renderApp(state), /Connection lost/);
});
