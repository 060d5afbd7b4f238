// Session state machine. All game logic lives on the server; the client
// only validates that every output control is set before submitting.

import type {
  EnvMovePayload,
  GameInitPayload,
  ProposalPayload,
  SessionMessage,
  StatusPayload,
  Valuation,
  VarDescriptor,
  VerdictPayload,
} from "./protocol.js";
import type { Transport } from "./transport.js";

export interface TranscriptRow {
  round: number;
  inputs: Valuation;
  outputs: Valuation;
  result: string;
  violated: string[];
}

export type Phase =
  | "connecting"
  | "playing"
  | "reviewing"
  | "realizable"
  | "exhausted"
  | "closed";

export interface ClientState {
  phase: Phase;
  session: string | null;
  round: number;
  inputs: VarDescriptor[];
  outputs: VarDescriptor[];
  requirements: { id: number; source: string; text: string }[];
  currentInputs: Valuation;
  derived: Valuation;
  dead: boolean;
  banner: string[] | null; // violated requirement tags of the last verdict
  formError: string | null;
  proposal: ProposalPayload | null;
  accepted: string[];
  machine: string | null;
  transcript: TranscriptRow[];
  lastSeq: number;
}

export class SessionClient {
  readonly state: ClientState = {
    phase: "connecting",
    session: null,
    round: 0,
    inputs: [],
    outputs: [],
    requirements: [],
    currentInputs: {},
    derived: {},
    dead: false,
    banner: null,
    formError: null,
    proposal: null,
    accepted: [],
    machine: null,
    transcript: [],
    lastSeq: 0,
  };

  private transport: Transport;
  private seq = 0;
  private pendingOutputs: Valuation | null = null;
  private listeners: ((state: ClientState) => void)[] = [];

  constructor(transport: Transport) {
    this.transport = transport;
    transport.onMessage((msg) => this.handle(msg));
    transport.onClose(() => {
      this.state.phase = "closed";
      this.emit();
    });
  }

  onChange(listener: (state: ClientState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l(this.state);
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  /** Messages must arrive in sequence order; the transcript is append-only. */
  handle(msg: SessionMessage): void {
    if (msg.seq <= this.state.lastSeq) {
      // replayed transcript after a resume: rebuild from scratch
      this.state.transcript = [];
    }
    this.state.lastSeq = msg.seq;
    switch (msg.kind) {
      case "game_init": {
        const p = msg.payload as GameInitPayload;
        this.state.session = p.session;
        this.state.inputs = p.inputs;
        this.state.outputs = p.outputs;
        this.state.requirements = p.requirements;
        this.state.phase = "playing";
        break;
      }
      case "env_move": {
        const p = msg.payload as EnvMovePayload;
        this.state.round = p.round;
        this.state.currentInputs = p.inputs;
        this.state.derived = p.derived;
        this.state.dead = p.dead;
        break;
      }
      case "verdict": {
        const p = msg.payload as VerdictPayload;
        if (p.result === "error") {
          this.state.formError = p.error ?? "rejected move";
          break;
        }
        const violated = (p.violated ?? []).map((v) => v.source);
        this.state.banner = p.result === "violation" ? violated : null;
        this.state.transcript.push({
          round: p.round ?? this.state.round,
          inputs: this.state.currentInputs,
          outputs: this.pendingOutputs ?? {},
          result: p.result,
          violated,
        });
        this.pendingOutputs = null;
        break;
      }
      case "proposal": {
        this.state.proposal = msg.payload as ProposalPayload;
        this.state.phase = "reviewing";
        break;
      }
      case "status": {
        const p = msg.payload as StatusPayload;
        if (p.accepted) this.state.accepted = p.accepted;
        if (p.machine) this.state.machine = p.machine;
        if (p.status === "realizable") {
          this.state.phase = "realizable";
          this.state.proposal = null;
        } else if (p.status === "exhausted") {
          this.state.phase = "exhausted";
          this.state.proposal = null;
        } else if (p.error) {
          this.state.formError = p.error;
        }
        break;
      }
      default:
        break;
    }
    this.emit();
  }

  /** Form validation is the only client-side rule: every output atom set. */
  validateOutputs(valuation: Valuation): string | null {
    for (const v of this.state.outputs) {
      const value = valuation[v.name];
      if (value === undefined || value === null || value === "") {
        return `set a value for ${v.name}`;
      }
      if (v.kind === "enum" && !(v.values ?? []).includes(String(value))) {
        return `${v.name} has no value ${String(value)}`;
      }
    }
    return null;
  }

  submitOutputs(valuation: Valuation): boolean {
    const problem = this.validateOutputs(valuation);
    if (problem) {
      this.state.formError = problem;
      this.emit();
      return false;
    }
    this.state.formError = null;
    this.pendingOutputs = { ...valuation };
    this.transport.send({
      seq: this.nextSeq(),
      kind: "user_move",
      payload: { outputs: valuation },
    });
    return true;
  }

  reviewAssumption(decision: "accept" | "reject"): void {
    if (!this.state.proposal) {
      this.state.formError = "no proposal pending";
      this.emit();
      return;
    }
    this.transport.send({
      seq: this.nextSeq(),
      kind: decision,
      payload: { rank: this.state.proposal.rank },
    });
    if (decision === "reject") this.state.proposal = null;
  }

  requestProposals(): void {
    this.transport.send({
      seq: this.nextSeq(),
      kind: "status",
      payload: { action: "propose" },
    });
  }

  resume(sessionToken: string): void {
    this.transport.send({
      seq: this.nextSeq(),
      kind: "status",
      payload: { action: "resume", session: sessionToken },
    });
  }

  close(): void {
    this.transport.close();
  }
}
