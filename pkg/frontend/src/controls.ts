export interface OperatorCallbacks {
  onControl(u: number, teaching: 0 | 1): void;
  onQuiz(theta: number): void;
  onSpeed(running: boolean, speed: number): void;
  onEnd(): void;
}

export interface ControlPanel {
  root: HTMLElement;
  /** Reflect the acknowledged server state back into the widgets. */
  setAcknowledged(u: number, teaching: 0 | 1): void;
  setRunning(running: boolean): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export function createControlPanel(callbacks: OperatorCallbacks): ControlPanel {
  const root = el("div", { class: "controls" });

  const uSlider = el("input", {
    type: "range", min: "0", max: "20", step: "0.5", value: "0",
  });
  const uValue = el("span", { class: "u-value" }, "0.0");
  const teachToggle = el("button", { class: "teach" }, "start lesson");
  let teaching: 0 | 1 = 0;

  const sendControl = () =>
    callbacks.onControl(parseFloat(uSlider.value), teaching);

  uSlider.addEventListener("change", sendControl);
  teachToggle.addEventListener("click", () => {
    teaching = teaching ? 0 : 1;
    sendControl();
  });

  const thetaInput = el("input", { type: "number", value: "2.0", step: "0.5", min: "0" });
  const quizButton = el("button", {}, "give quiz");
  quizButton.addEventListener("click", () =>
    callbacks.onQuiz(parseFloat(thetaInput.value)),
  );

  const speedInput = el("input", { type: "number", value: "1.0", step: "0.5", min: "0.1" });
  const runToggle = el("button", { class: "run" }, "run");
  let running = false;
  runToggle.addEventListener("click", () =>
    callbacks.onSpeed(!running, parseFloat(speedInput.value)),
  );

  const endButton = el("button", { class: "end" }, "end session");
  endButton.addEventListener("click", () => callbacks.onEnd());

  const row = (label: string, ...nodes: HTMLElement[]) => {
    const div = el("div", { class: "row" });
    div.append(el("label", {}, label), ...nodes);
    root.append(div);
    return div;
  };
  row("requirement U", uSlider, uValue);
  row("lesson", teachToggle);
  row("quiz difficulty", thetaInput, quizButton);
  row("speed", speedInput, runToggle);
  row("", endButton);

  return {
    root,
    setAcknowledged(u, teach) {
      teaching = teach;
      uSlider.value = String(u);
      uValue.textContent = u.toFixed(1);
      teachToggle.textContent = teach ? "take a break" : "start lesson";
    },
    setRunning(isRunning) {
      running = isRunning;
      runToggle.textContent = isRunning ? "pause" : "run";
    },
  };
}
