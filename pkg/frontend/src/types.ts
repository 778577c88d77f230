// Shapes of the session-service API documented in docs/api.md.

export interface ControlState {
  u: number;
  teaching: 0 | 1;
}

export interface StudentSnapshot {
  id: string;
  z: number[];
  z_total: number;
  strength: number;
}

export interface Snapshot {
  type: "snapshot";
  id: string;
  clock: number;
  speed: number;
  running: boolean;
  control: ControlState;
  students: StudentSnapshot[];
  n_quizzes: number;
}

export interface HistoryEntry {
  clock: number;
  students: StudentSnapshot[];
  control: ControlState;
}

export interface InitMessage extends Omit<Snapshot, "type"> {
  type: "init";
  model: string;
  history: HistoryEntry[];
  quiz_log: QuizResult[];
}

export interface ControlMessage {
  type: "control";
  clock: number;
  control: ControlState;
}

export interface QuizOutcome {
  id: string;
  z: number;
  probability: number;
  outcome: "solved" | "failed";
  score: 0 | 1;
}

export interface QuizResult {
  type: "quiz";
  clock: number;
  t: number;
  theta: number;
  results: QuizOutcome[];
  pass_rate: number;
}

export type StreamMessage = Snapshot | InitMessage | ControlMessage | QuizResult;

export interface ScoreReport {
  clock: number;
  mean_z: number;
  mean_strength: number;
  quiz_pass_rate: number;
  max_u_taught: number;
  weights: { z: number; strength: number; quiz: number };
  grade: number;
}

export interface StudentConfig {
  id?: string;
  alphas: number[];
  gammas: number[];
  b?: number;
  lambda?: number;
  s?: number;
  state0?: number[];
}

export interface CreateSessionRequest {
  model: string;
  students: StudentConfig[];
  speed?: number;
  seed?: number;
  dt?: number;
}
