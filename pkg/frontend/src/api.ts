import {
  ControlState,
  CreateSessionRequest,
  QuizResult,
  ScoreReport,
  Snapshot,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/**
 * Thin client for the session service. Every dashboard interaction maps to
 * exactly one call; the UI renders only acknowledged server state (the
 * returned documents), never optimistic local state. Acknowledged control
 * changes are appended to `commandLog` so the rendered U trace can be
 * checked against what the operator actually did.
 */
export class ApiClient {
  commandLog: ControlState[] = [];

  constructor(
    private base: string,
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (doc as { error?: string }).error ?? resp.statusText);
    }
    return doc as T;
  }

  createSession(req: CreateSessionRequest): Promise<Snapshot> {
    return this.call("POST", "/sessions", req);
  }

  getSession(id: string): Promise<Snapshot> {
    return this.call("GET", `/sessions/${id}`);
  }

  async setControl(id: string, u: number, teaching: 0 | 1): Promise<ControlState> {
    const ack = await this.call<{ control: ControlState }>(
      "POST",
      `/sessions/${id}/control`,
      { u, teaching },
    );
    this.commandLog.push(ack.control);
    return ack.control;
  }

  advance(id: string, simTime: number): Promise<Snapshot> {
    return this.call("POST", `/sessions/${id}/advance`, { sim_time: simTime });
  }

  giveQuiz(id: string, theta: number): Promise<QuizResult> {
    return this.call("POST", `/sessions/${id}/quiz`, { theta });
  }

  score(id: string): Promise<ScoreReport> {
    return this.call("GET", `/sessions/${id}/score`);
  }

  setClock(id: string, running: boolean, speed?: number): Promise<Snapshot> {
    const body: { running: boolean; speed?: number } = { running };
    if (speed !== undefined) body.speed = speed;
    return this.call("POST", `/sessions/${id}/clock`, body);
  }

  async endSession(id: string): Promise<ScoreReport> {
    const doc = await this.call<{ ended: string; score: ScoreReport }>(
      "DELETE",
      `/sessions/${id}`,
    );
    return doc.score;
  }

  streamUrl(id: string): string {
    return `${this.base}/sessions/${id}/stream`;
  }
}
