// Pure HTML renderers over the client state; no game logic, no DOM access.

import type { ClientState } from "./client.js";
import type { Valuation, VarDescriptor } from "./protocol.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function scalar(value: unknown): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  return String(value);
}

export function renderInputs(vars: VarDescriptor[], values: Valuation,
                             derived: Valuation): string {
  const rows = vars.map((v) => {
    const label = v.text ? `${v.name} (${v.text})` : v.name;
    const value = scalar(values[v.name]);
    const on = values[v.name] === true ? " on" : "";
    return `<tr><td>${esc(label)}</td>` +
      `<td><span class="toggle readonly${on}" data-input="${esc(v.name)}">` +
      `${esc(value)}</span></td></tr>`;
  });
  const hints = Object.entries(derived)
    .map(([k, v]) => `${esc(k)}=${esc(scalar(v))}`)
    .join(", ");
  const hintRow = hints
    ? `<tr class="derived"><td>forced by definitions</td><td>${hints}</td></tr>`
    : "";
  return `<table class="inputs">${rows.join("")}${hintRow}</table>`;
}

export function renderOutputControls(vars: VarDescriptor[],
                                     current: Valuation): string {
  const rows = vars.map((v) => {
    if (v.kind === "enum") {
      const options = (v.values ?? [])
        .map((val) => {
          const sel = current[v.name] === val ? " selected" : "";
          return `<option value="${esc(val)}"${sel}>${esc(val)}</option>`;
        })
        .join("");
      return `<tr><td>${esc(v.name)}</td>` +
        `<td><select data-output="${esc(v.name)}">` +
        `<option value=""></option>${options}</select></td></tr>`;
    }
    const checked = current[v.name] === true ? " checked" : "";
    return `<tr><td>${esc(v.name)}</td>` +
      `<td><input type="checkbox" data-output="${esc(v.name)}"${checked}/></td></tr>`;
  });
  return `<table class="outputs">${rows.join("")}</table>`;
}

export function renderBanner(state: ClientState): string {
  if (state.formError) {
    return `<div class="banner error">${esc(state.formError)}</div>`;
  }
  if (state.banner && state.banner.length) {
    const tags = state.banner.map((s) => `<b>${esc(s)}</b>`).join(" vs ");
    return `<div class="banner violation">Violated: ${tags}</div>`;
  }
  if (state.banner !== null) {
    return `<div class="banner ok">All requirements satisfied.</div>`;
  }
  return "";
}

export function renderTranscript(state: ClientState): string {
  const rows = state.transcript.map((row) => {
    const ins = Object.entries(row.inputs)
      .map(([k, v]) => `${esc(k)}=${esc(scalar(v))}`)
      .join(" ");
    const outs = Object.entries(row.outputs)
      .map(([k, v]) => `${esc(k)}=${esc(scalar(v))}`)
      .join(" ");
    const verdict = row.result === "ok"
      ? "ok"
      : `violation: ${row.violated.map(esc).join(", ")}`;
    return `<tr><td>${row.round}</td><td>${ins}</td>` +
      `<td>${outs}</td><td>${verdict}</td></tr>`;
  });
  return `<table class="transcript"><tr><th>round</th><th>tool inputs</th>` +
    `<th>your outputs</th><th>verdict</th></tr>${rows.join("")}</table>`;
}

export function renderProposal(state: ClientState): string {
  const p = state.proposal;
  if (!p) return "";
  return (
    `<div class="proposal" data-rank="${p.rank}">` +
    `<h3>Suggested assumption #${p.rank}</h3>` +
    `<code>${esc(p.formula)}</code>` +
    `<p>${esc(p.english)}</p>` +
    `<button data-action="accept">Accept</button>` +
    `<button data-action="reject">Reject</button></div>`
  );
}

export function renderDone(state: ClientState): string {
  if (state.phase === "realizable") {
    const machine = state.machine
      ? `<a href="${esc(state.machine)}">${esc(state.machine)}</a>`
      : "written";
    const accepted = state.accepted.map((a) => `<li><code>${esc(a)}</code></li>`);
    return (
      `<div class="done realizable"><h2>Specification realizable</h2>` +
      `<p>Implementation: ${machine}</p>` +
      `<ul>${accepted.join("")}</ul></div>`
    );
  }
  if (state.phase === "exhausted") {
    return `<div class="done exhausted"><h2>All suggestions rejected</h2>` +
      `<p>No template assumption closes the gap.</p></div>`;
  }
  return "";
}

export function renderApp(state: ClientState): string {
  if (state.phase === "connecting") {
    return `<div class="banner retry">Connecting to the session server…</div>`;
  }
  if (state.phase === "closed") {
    return `<div class="banner retry">Connection lost. ` +
      `<button data-action="retry">Retry</button></div>`;
  }
  const done = renderDone(state);
  if (done) return done;
  const sections = [
    `<h2>Round ${state.round}</h2>`,
    renderBanner(state),
    `<h3>Tool inputs</h3>`,
    renderInputs(state.inputs, state.currentInputs, state.derived),
    `<h3>Your outputs</h3>`,
    renderOutputControls(state.outputs, {}),
    `<button data-action="submit">Play outputs</button>`,
    renderProposal(state),
    `<h3>Transcript</h3>`,
    renderTranscript(state),
  ];
  return sections.join("\n");
}
