import "./style.css";
import { ApiClient } from "./api";
import { ChartBuffers } from "./buffers";
import { LineChart } from "./chart";
import { createControlPanel } from "./controls";
import { SessionStream } from "./stream";
import { QuizResult, ScoreReport, Snapshot, StudentConfig } from "./types";

const DEFAULT_STUDENT: Omit<StudentConfig, "id"> = {
  alphas: [0.6, 0.35, 0.25, 0.2],
  gammas: [0.3, 0.12, 0.05, 0.02],
  lambda: 3.0,
};

function makeClass(size: number, spread: number): StudentConfig[] {
  // Heterogeneous class: forgetting rates fan out around the defaults.
  const students: StudentConfig[] = [];
  for (let i = 0; i < size; i++) {
    const f = 1 + spread * (i / Math.max(1, size - 1) - 0.5);
    students.push({
      id: `s${i + 1}`,
      ...DEFAULT_STUDENT,
      gammas: DEFAULT_STUDENT.gammas.map((g) => g * f),
    });
  }
  return students;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderQuizRow(table: HTMLTableElement, quiz: QuizResult): void {
  const row = table.insertRow(1);
  row.insertCell().textContent = quiz.clock.toFixed(2);
  row.insertCell().textContent = quiz.theta.toFixed(2);
  row.insertCell().textContent = `${Math.round(quiz.pass_rate * 100)}%`;
  row.insertCell().textContent = quiz.results
    .map((r) => `${r.id}:${r.outcome === "solved" ? "+" : "-"}`)
    .join(" ");
}

function renderScore(panel: HTMLElement, report: ScoreReport): void {
  panel.hidden = false;
  panel.innerHTML = "";
  const h = document.createElement("h2");
  h.textContent = `teacher grade: ${report.grade.toFixed(1)} / 100`;
  const detail = document.createElement("pre");
  detail.textContent = [
    `class mean Z      ${report.mean_z.toFixed(3)}`,
    `class mean firmness ${report.mean_strength.toFixed(3)}`,
    `quiz pass rate    ${(report.quiz_pass_rate * 100).toFixed(0)}%`,
    `highest U taught  ${report.max_u_taught.toFixed(1)}`,
  ].join("\n");
  panel.append(h, detail);
}

async function start(): Promise<void> {
  const base = (byId<HTMLInputElement>("service-url").value || window.location.origin)
    .replace(/\/$/, "");
  const classSize = parseInt(byId<HTMLInputElement>("class-size").value, 10) || 6;

  const api = new ApiClient(base);
  const buffers = new ChartBuffers(
    parseFloat(byId<HTMLInputElement>("window-length").value) || 60,
  );
  const chart = new LineChart(byId<HTMLCanvasElement>("chart"));
  const strengthChart = new LineChart(byId<HTMLCanvasElement>("strength-chart"));
  const banner = byId<HTMLDivElement>("banner");
  const quizTable = byId<HTMLTableElement>("quiz-table");
  const scorePanel = byId<HTMLDivElement>("score-panel");

  let session: Snapshot;
  try {
    session = await api.createSession({
      model: "four",
      students: makeClass(classSize, 0.8),
      seed: Math.floor(Math.random() * 1e9),
      dt: 0.01,
    });
  } catch (err) {
    banner.textContent = `cannot reach service: ${err}`;
    banner.className = "banner error";
    return;
  }
  byId<HTMLDivElement>("setup").hidden = true;
  byId<HTMLDivElement>("dashboard").hidden = false;

  const redraw = () => {
    chart.draw(buffers.students, buffers.classMean, buffers.uTrace);
    strengthChart.draw(new Map(), buffers.strengthMean, []);
    byId<HTMLSpanElement>("clock").textContent = buffers.classMean.length
      ? buffers.classMean[buffers.classMean.length - 1].t.toFixed(2)
      : "0.00";
  };

  const panel = createControlPanel({
    onControl: (u, teaching) =>
      api
        .setControl(session.id, u, teaching)
        .then((ack) => panel.setAcknowledged(ack.u, ack.teaching))
        .catch((err) => showToast(`control failed: ${err.message}`)),
    onQuiz: (theta) =>
      api
        .giveQuiz(session.id, theta)
        .then((quiz) => renderQuizRow(quizTable, quiz))
        .catch((err) => showToast(`quiz failed: ${err.message}`)),
    onSpeed: (running, speed) =>
      api
        .setClock(session.id, running, speed)
        .then((snap) => panel.setRunning(snap.running))
        .catch((err) => showToast(`clock failed: ${err.message}`)),
    onEnd: () =>
      api
        .endSession(session.id)
        .then((report) => {
          stream.close();
          renderScore(scorePanel, report);
        })
        .catch((err) => showToast(`end failed: ${err.message}`)),
  });
  byId<HTMLDivElement>("control-slot").append(panel.root);

  const stream = new SessionStream(api.streamUrl(session.id), {
    onMessage: (message) => {
      buffers.apply(message);
      if (message.type === "quiz") renderQuizRow(quizTable, message);
      if (message.type === "control" || message.type === "init") {
        panel.setAcknowledged(message.control.u, message.control.teaching);
      }
      redraw();
    },
    onStatus: (connected) => {
      banner.textContent = connected ? "" : "disconnected — retrying";
      banner.className = connected ? "banner" : "banner error";
    },
  });

  function showToast(text: string): void {
    banner.textContent = text;
    banner.className = "banner error";
    setTimeout(() => {
      banner.textContent = "";
      banner.className = "banner";
    }, 4000);
  }
}

window.addEventListener("load", () => {
  byId<HTMLButtonElement>("connect").addEventListener("click", () => void start());
});
