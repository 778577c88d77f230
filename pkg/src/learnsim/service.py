"""Live, steerable class sessions over a local HTTP API.

A session holds a class of simulated students advancing on one shared
clock. An operator (the human "teacher") raises or lowers the requirement
level, toggles lessons/breaks, issues quizzes, and finally receives a
score. Commands for one session are serialized behind its lock; distinct
sessions proceed independently. Subscribers get every snapshot and event
in clock order over a server-sent-events stream, starting with a full
state-of-world message so reconnects resync cleanly.

The server is a stdlib ThreadingHTTPServer bound to localhost by default;
field names of all request/response bodies are documented in docs/api.md.
"""

import json
import queue
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .integrate import IntegratorConfig, advance_state
from .models import ModelParams, TeachingControl, strength_pf, strength_pr
from .rasch import solve_probability
from .scenarios import _RHS, model_dimension
from .version import __version__

__all__ = ["Student", "Session", "SessionManager", "ServiceError", "run_server"]

DEFAULT_WEIGHTS = {"z": 0.5, "strength": 0.3, "quiz": 0.2}


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Student:
    id: str
    params: ModelParams
    state: np.ndarray

    def snapshot(self, kind: str) -> dict:
        total = float(self.state.sum())
        strength = strength_pf(self.state) if kind == "four" else strength_pr(self.state)
        return {
            "id": self.id,
            "z": [float(v) for v in self.state],
            "z_total": total,
            "strength": strength,
        }


@dataclass
class Session:
    id: str
    kind: str
    students: list[Student]
    speed: float
    seed: int
    integrator: IntegratorConfig
    weights: dict
    history_cap: int = 2048
    clock: float = 0.0
    control: TeachingControl = field(default_factory=TeachingControl)
    max_u_taught: float = 0.0
    quiz_log: list[dict] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)
    running: bool = False

    def __post_init__(self):
        self.lock = threading.RLock()
        self.rng = np.random.default_rng(self.seed)
        self.subscribers: list[queue.SimpleQueue] = []
        self.ticker: threading.Thread | None = None

    # -- queries ------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "type": "snapshot",
            "id": self.id,
            "clock": self.clock,
            "speed": self.speed,
            "running": self.running,
            "control": {"u": self.control.u, "teaching": self.control.teaching},
            "students": [s.snapshot(self.kind) for s in self.students],
            "n_quizzes": len(self.quiz_log),
        }

    def world_state(self) -> dict:
        doc = self.snapshot()
        doc["type"] = "init"
        doc["model"] = self.kind
        doc["history"] = self.history[-200:]
        doc["quiz_log"] = self.quiz_log
        return doc

    # -- commands (caller must hold self.lock) -------------------------

    def _publish(self, message: dict) -> None:
        for q in list(self.subscribers):
            q.put(message)

    def advance(self, sim_delta: float) -> dict:
        if sim_delta < 0:
            raise ServiceError(400, f"cannot advance backwards ({sim_delta})")
        if sim_delta > 0:
            rhs = _RHS[self.kind]
            ctrl = self.control
            for student in self.students:
                dyn = lambda z, t, p=student.params: rhs(z, p, ctrl)  # noqa: E731
                student.state, _ = advance_state(
                    student.state, dyn, self.clock, self.clock + sim_delta, self.integrator
                )
            self.clock += sim_delta
            snap = self.snapshot()
            self.history.append(
                {"clock": snap["clock"], "students": snap["students"], "control": snap["control"]}
            )
            del self.history[: -self.history_cap]
            self._publish(snap)
            return snap
        return self.snapshot()

    def set_control(self, u: float, teaching: int) -> dict:
        try:
            # Breaks force the requirement level to zero, matching the
            # schedule semantics of the batch runners.
            self.control = TeachingControl(teaching, u if teaching else 0.0)
            if u < 0:
                raise ValueError(f"requirement level must be >= 0, got {u}")
        except ValueError as exc:
            raise ServiceError(400, str(exc)) from exc
        if self.control.teaching:
            self.max_u_taught = max(self.max_u_taught, self.control.u)
        ack = {
            "type": "control",
            "clock": self.clock,
            "control": {"u": self.control.u, "teaching": self.control.teaching},
        }
        self._publish(ack)
        return ack

    def give_quiz(self, theta: float) -> dict:
        if theta < 0:
            raise ServiceError(400, f"quiz difficulty must be >= 0, got {theta}")
        results = []
        passed = 0
        for student in self.students:
            z = float(student.state.sum())
            p = solve_probability(z, theta, student.params.lam)
            solved = float(self.rng.random()) < p
            passed += solved
            results.append(
                {
                    "id": student.id,
                    "z": z,
                    "probability": p,
                    "outcome": "solved" if solved else "failed",
                    "score": 1 if solved else 0,
                }
            )
        result = {
            "type": "quiz",
            "clock": self.clock,
            "t": self.clock,
            "theta": theta,
            "results": results,
            "pass_rate": passed / len(self.students),
        }
        self.quiz_log.append(result)
        self._publish(result)
        return result

    def score(self) -> dict:
        """Grade of the operator: a documented weighted blend of class
        mean knowledge (normalized by the highest requirement taught),
        class mean firmness, and the overall quiz pass rate."""
        totals = [float(s.state.sum()) for s in self.students]
        strengths = [s.snapshot(self.kind)["strength"] for s in self.students]
        mean_z = float(np.mean(totals))
        mean_strength = float(np.mean(strengths))
        if self.quiz_log:
            all_results = [r for quiz in self.quiz_log for r in quiz["results"]]
            quiz_pass_rate = sum(r["score"] for r in all_results) / len(all_results)
        else:
            quiz_pass_rate = 0.0
        z_term = mean_z / self.max_u_taught if self.max_u_taught > 0 else 0.0
        grade = 100.0 * (
            self.weights["z"] * z_term
            + self.weights["strength"] * mean_strength
            + self.weights["quiz"] * quiz_pass_rate
        )
        return {
            "clock": self.clock,
            "mean_z": mean_z,
            "mean_strength": mean_strength,
            "quiz_pass_rate": quiz_pass_rate,
            "max_u_taught": self.max_u_taught,
            "weights": self.weights,
            "grade": grade,
        }

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        q.put(self.world_state())
        self.subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        if q in self.subscribers:
            self.subscribers.remove(q)


class SessionManager:
    """Owns all sessions; every public method is safe to call from any
    request thread."""

    def __init__(self, tick: float = 0.1):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.tick = tick

    def create(self, doc: dict) -> Session:
        kind = doc.get("model", "four")
        if kind not in _RHS:
            raise ServiceError(400, f"unknown model kind {kind!r}")
        students_doc = doc.get("students")
        if not isinstance(students_doc, list) or not students_doc:
            raise ServiceError(400, "students: expected a non-empty list")
        speed = float(doc.get("speed", 1.0))
        if speed <= 0:
            raise ServiceError(400, f"speed must be > 0, got {speed}")
        seed = int(doc.get("seed", 0))
        dt = float(doc.get("dt", 0.01))
        weights = dict(DEFAULT_WEIGHTS)
        weights.update(doc.get("weights", {}))
        students = []
        for i, sdoc in enumerate(students_doc):
            try:
                params = ModelParams(
                    alphas=tuple(sdoc["alphas"]),
                    gammas=tuple(sdoc["gammas"]),
                    b=float(sdoc.get("b", 0.0)),
                    lam=float(sdoc.get("lambda", 1.0)),
                    s=float(sdoc.get("s", 0.0)),
                )
                n = model_dimension(kind, params)
            except (KeyError, ValueError, TypeError) as exc:
                raise ServiceError(400, f"students[{i}]: {exc}") from exc
            state0 = sdoc.get("state0", [0.0] * n)
            state = np.asarray(state0, dtype=np.float64)
            if state.shape != (n,) or np.any(state < 0):
                raise ServiceError(
                    400, f"students[{i}].state0: need {n} non-negative components"
                )
            students.append(Student(id=str(sdoc.get("id", f"s{i + 1}")), params=params, state=state))
        session = Session(
            id=uuid.uuid4().hex[:12],
            kind=kind,
            students=students,
            speed=speed,
            seed=seed,
            integrator=IntegratorConfig(dt=dt, record_every=max(1, int(0.1 / dt))),
            weights=weights,
            history_cap=max(1, int(doc.get("history_cap", 2048))),
        )
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"no session {session_id!r}")
        return session

    def remove(self, session_id: str) -> Session:
        session = self.get(session_id)
        with self._lock:
            self._sessions.pop(session_id, None)
        return session

    def list_sessions(self) -> list[dict]:
        with self._lock:
            sessions = list(self._sessions.values())
        out = []
        for s in sessions:
            with s.lock:
                out.append(s.snapshot())
        return out

    def run_ticker(self, session: Session) -> None:
        sleeper = threading.Event()
        while not sleeper.wait(self.tick):
            with session.lock:
                if not session.running:
                    break
                session.advance(self.tick * session.speed)


class _Handler(BaseHTTPRequestHandler):
    manager: SessionManager = None
    static_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- helpers ------------------------------------------------------

    def _send_json(self, doc: dict, status: int = 200) -> None:
        body = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            doc = json.loads(self.rfile.read(length))
        except json.JSONDecodeError as exc:
            raise ServiceError(400, f"body is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ServiceError(400, "body must be a JSON object")
        return doc

    def _route(self):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        return parts

    # -- verbs --------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            parts = self._route()
            if parts == ["health"]:
                self._send_json({"status": "ok", "version": __version__})
            elif parts == ["sessions"]:
                self._send_json({"sessions": self.manager.list_sessions()})
            elif len(parts) == 2 and parts[0] == "sessions":
                session = self.manager.get(parts[1])
                with session.lock:
                    self._send_json(session.snapshot())
            elif len(parts) == 3 and parts[0] == "sessions" and parts[2] == "score":
                session = self.manager.get(parts[1])
                with session.lock:
                    self._send_json(session.score())
            elif len(parts) == 3 and parts[0] == "sessions" and parts[2] == "stream":
                self._stream(self.manager.get(parts[1]))
            else:
                self._static(parts)
        except ServiceError as exc:
            self._send_json({"error": exc.message}, exc.status)

    def do_POST(self):
        try:
            parts = self._route()
            body = self._read_json()
            if parts == ["sessions"]:
                session = self.manager.create(body)
                with session.lock:
                    doc = session.snapshot()
                self._send_json(doc, 201)
                return
            if len(parts) != 3 or parts[0] != "sessions":
                raise ServiceError(404, f"unknown endpoint {self.path!r}")
            session = self.manager.get(parts[1])
            action = parts[2]
            with session.lock:
                if action == "advance":
                    if "sim_time" in body:
                        delta = float(body["sim_time"])
                    elif "real_seconds" in body:
                        delta = float(body["real_seconds"]) * session.speed
                    else:
                        raise ServiceError(400, "need sim_time or real_seconds")
                    self._send_json(session.advance(delta))
                elif action == "control":
                    if "u" not in body or "teaching" not in body:
                        raise ServiceError(400, "need u and teaching")
                    self._send_json(session.set_control(float(body["u"]), int(body["teaching"])))
                elif action == "quiz":
                    if "theta" not in body:
                        raise ServiceError(400, "need theta")
                    self._send_json(session.give_quiz(float(body["theta"])))
                elif action == "clock":
                    run = bool(body.get("running", False))
                    was = session.running
                    session.running = run
                    if "speed" in body:
                        speed = float(body["speed"])
                        if speed <= 0:
                            raise ServiceError(400, f"speed must be > 0, got {speed}")
                        session.speed = speed
                    if run and not was and (session.ticker is None or not session.ticker.is_alive()):
                        # A lingering ticker from a rapid off/on toggle keeps
                        # running; never start a second one beside it.
                        session.ticker = threading.Thread(
                            target=self.manager.run_ticker, args=(session,), daemon=True
                        )
                        session.ticker.start()
                    self._send_json(session.snapshot())
                else:
                    raise ServiceError(404, f"unknown action {action!r}")
        except ServiceError as exc:
            self._send_json({"error": exc.message}, exc.status)
        except (ValueError, TypeError) as exc:
            self._send_json({"error": str(exc)}, 400)

    def do_DELETE(self):
        try:
            parts = self._route()
            if len(parts) == 2 and parts[0] == "sessions":
                session = self.manager.remove(parts[1])
                with session.lock:
                    session.running = False
                    report = session.score()
                self._send_json({"ended": session.id, "score": report})
            else:
                raise ServiceError(404, f"unknown endpoint {self.path!r}")
        except ServiceError as exc:
            self._send_json({"error": exc.message}, exc.status)

    # -- stream + static ------------------------------------------------

    def _stream(self, session: Session) -> None:
        with session.lock:
            q = session.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            while True:
                try:
                    message = q.get(timeout=15.0)
                except queue.Empty:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                payload = json.dumps(message)
                self.wfile.write(f"data: {payload}\n\n".encode())
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            with session.lock:
                session.unsubscribe(q)

    def _static(self, parts: list[str]) -> None:
        if self.static_dir is None:
            raise ServiceError(404, f"unknown endpoint {self.path!r}")
        rel = "/".join(parts) or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            raise ServiceError(404, f"no such asset {rel!r}")
        body = target.read_bytes()
        ctypes = {
            ".html": "text/html", ".js": "application/javascript",
            ".css": "text/css", ".map": "application/json", ".svg": "image/svg+xml",
        }
        self.send_response(200)
        self.send_header("Content-Type", ctypes.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(host: str = "127.0.0.1", port: int = 0, static_dir: str | None = None,
                tick: float = 0.1) -> ThreadingHTTPServer:
    manager = SessionManager(tick=tick)
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"manager": manager, "static_dir": Path(static_dir) if static_dir else None},
    )
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    server.manager = manager
    return server


def run_server(host: str = "127.0.0.1", port: int = 8750, static_dir: str | None = None,
               tick: float = 0.1) -> None:
    server = make_server(host, port, static_dir, tick)
    print(f"session service on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
