// Message shapes of the reqlift session protocol (newline-delimited JSON).

export type MessageKind =
  | "game_init"
  | "env_move"
  | "user_move"
  | "verdict"
  | "proposal"
  | "accept"
  | "reject"
  | "status";

export type Scalar = boolean | string;
export type Valuation = Record<string, Scalar>;

export interface VarDescriptor {
  name: string;
  kind: "bool" | "enum";
  values?: string[];
  text?: string; // comparison atoms carry their expression
}

export interface RequirementRef {
  id: number;
  source: string;
  text: string;
}

export interface GameInitPayload {
  session: string;
  inputs: VarDescriptor[];
  outputs: VarDescriptor[];
  requirements: RequirementRef[];
}

export interface EnvMovePayload {
  round: number;
  inputs: Valuation;
  derived: Valuation;
  dead: boolean;
}

export interface ViolatedRef {
  source: string;
  formula: string;
}

export interface VerdictPayload {
  reply_to?: number;
  result: "ok" | "violation" | "error";
  violated?: ViolatedRef[];
  error?: string;
  round?: number;
}

export interface ProposalPayload {
  rank: number;
  formula: string;
  english: string;
}

export interface StatusPayload {
  status?: "realizable" | "exhausted";
  accepted?: string[];
  machine?: string;
  error?: string;
  phase?: string;
}

export interface SessionMessage {
  seq: number;
  kind: MessageKind;
  payload:
    | GameInitPayload
    | EnvMovePayload
    | VerdictPayload
    | ProposalPayload
    | StatusPayload
    | Record<string, unknown>;
}

export interface OutboundMessage {
  seq: number;
  kind: "user_move" | "accept" | "reject" | "status";
  payload: Record<string, unknown>;
}
