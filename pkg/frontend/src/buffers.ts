import { HistoryEntry, InitMessage, StreamMessage } from "./types";

export interface SeriesPoint {
  t: number;
  v: number;
}

/**
 * Append-only, clock-ordered chart buffers with windowed eviction.
 *
 * One knowledge series per student plus the class mean, and a step series
 * for the requirement level U (teaching off contributes U = 0). An `init`
 * message resets everything and replays the server-side history, which is
 * what makes reconnects gap- and duplicate-free: the server state is the
 * only source of truth.
 */
export class ChartBuffers {
  students = new Map<string, SeriesPoint[]>();
  classMean: SeriesPoint[] = [];
  strengthMean: SeriesPoint[] = [];
  uTrace: SeriesPoint[] = [];
  quizMarks: { t: number; theta: number; passRate: number }[] = [];
  private lastClock = -Infinity;
  private currentU = 0;

  constructor(public windowLength = 60) {}

  /** Last U step value (what a chart would draw "now"). */
  get currentRequirement(): number {
    return this.currentU;
  }

  apply(message: StreamMessage): void {
    switch (message.type) {
      case "init":
        this.reset(message);
        break;
      case "snapshot":
        this.appendSample(message.clock, message.students, message.control.teaching ? message.control.u : 0);
        break;
      case "control":
        if (message.clock >= this.lastClock) {
          this.currentU = message.control.teaching ? message.control.u : 0;
          this.uTrace.push({ t: message.clock, v: this.currentU });
          this.lastClock = message.clock;
        }
        break;
      case "quiz":
        if (message.clock >= this.lastClock) {
          this.quizMarks.push({
            t: message.clock,
            theta: message.theta,
            passRate: message.pass_rate,
          });
          this.lastClock = message.clock;
        }
        break;
    }
    this.evict();
  }

  private reset(init: InitMessage): void {
    this.students.clear();
    this.classMean = [];
    this.strengthMean = [];
    this.uTrace = [];
    this.quizMarks = [];
    this.lastClock = -Infinity;
    this.currentU = init.control.teaching ? init.control.u : 0;
    for (const entry of init.history) {
      this.appendSample(
        entry.clock,
        entry.students,
        entry.control.teaching ? entry.control.u : 0,
      );
    }
    // The live snapshot itself, in case history is empty or stale.
    this.appendSample(init.clock, init.students, this.currentU);
    for (const quiz of init.quiz_log) {
      this.quizMarks.push({ t: quiz.clock, theta: quiz.theta, passRate: quiz.pass_rate });
    }
  }

  private appendSample(
    clock: number,
    students: HistoryEntry["students"],
    u: number,
  ): void {
    if (clock < this.lastClock) return; // out-of-order: server order wins
    if (clock === this.lastClock && this.classMean.some((p) => p.t === clock)) return;
    this.lastClock = clock;
    this.currentU = u;
    let total = 0;
    let strength = 0;
    for (const s of students) {
      let series = this.students.get(s.id);
      if (!series) {
        series = [];
        this.students.set(s.id, series);
      }
      series.push({ t: clock, v: s.z_total });
      total += s.z_total;
      strength += s.strength;
    }
    const n = students.length || 1;
    this.classMean.push({ t: clock, v: total / n });
    this.strengthMean.push({ t: clock, v: strength / n });
    this.uTrace.push({ t: clock, v: u });
  }

  private evict(): void {
    const cutoff = this.lastClock - this.windowLength;
    if (!isFinite(cutoff)) return;
    const trim = (series: SeriesPoint[]) => {
      let drop = 0;
      while (drop < series.length - 1 && series[drop].t < cutoff) drop++;
      if (drop > 0) series.splice(0, drop);
    };
    for (const series of this.students.values()) trim(series);
    trim(this.classMean);
    trim(this.strengthMean);
    trim(this.uTrace);
    this.quizMarks = this.quizMarks.filter((m) => m.t >= cutoff);
  }
}
