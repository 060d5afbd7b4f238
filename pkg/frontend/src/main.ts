// Browser entry point: connect to the WebSocket bridge and wire the forms.

import { SessionClient } from "./client.js";
import type { Valuation } from "./protocol.js";
import { WebSocketTransport } from "./transport.js";
import { renderApp } from "./view.js";

const DEFAULT_WS_PORT = 4716;

function connect(root: HTMLElement): void {
  const params = new URLSearchParams(window.location.search);
  const port = params.get("port") ?? String(DEFAULT_WS_PORT);
  const host = window.location.hostname || "127.0.0.1";
  const client = new SessionClient(new WebSocketTransport(`ws://${host}:${port}/`));
  const resume = params.get("session");
  if (resume) client.resume(resume);

  client.onChange(() => {
    root.innerHTML = renderApp(client.state);
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (!action) return;
    if (action === "submit") {
      const valuation: Valuation = {};
      root.querySelectorAll<HTMLSelectElement>("select[data-output]").forEach(
        (el) => {
          if (el.value) valuation[el.dataset.output as string] = el.value;
        });
      root.querySelectorAll<HTMLInputElement>("input[data-output]").forEach(
        (el) => {
          valuation[el.dataset.output as string] = el.checked;
        });
      client.submitOutputs(valuation);
    } else if (action === "accept" || action === "reject") {
      client.reviewAssumption(action);
    } else if (action === "retry") {
      connect(root);
    }
  });
}

const root = document.getElementById("app");
if (root) connect(root);
