"""Session service tests: module-level behaviour and the live HTTP API."""

import json
import math
import threading
import urllib.request

import numpy as np
import pytest

from learnsim import (
    IntegratorConfig,
    ModelParams,
    RequirementSchedule,
    RequirementSegment,
    run_lessons,
)
from learnsim.service import ServiceError, SessionManager, make_server

STUDENT = {
    "alphas": [0.6, 0.35, 0.25, 0.2],
    "gammas": [0.3, 0.12, 0.05, 0.02],
    "lambda": 3.0,
}


def class_doc(n_students=1, **overrides):
    doc = {
        "model": "four",
        "students": [dict(STUDENT, id=f"s{i + 1}") for i in range(n_students)],
        "seed": 5,
        "dt": 0.01,
    }
    doc.update(overrides)
    return doc


class TestSessionLifecycle:
    def test_create_defaults(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        snap = session.snapshot()
        assert snap["clock"] == 0.0
        assert snap["control"] == {"u": 0.0, "teaching": 0}
        assert snap["students"][0]["z_total"] == 0.0

    def test_distinct_ids(self):
        mgr = SessionManager()
        ids = {mgr.create(class_doc()).id for _ in range(10)}
        assert len(ids) == 10

    def test_invalid_params_rejected_with_diagnostics(self):
        mgr = SessionManager()
        bad = class_doc()
        bad["students"][0]["gammas"] = [0.1, 0.2, 0.3, 0.4]
        with pytest.raises(ServiceError, match="students\\[0\\]"):
            mgr.create(bad)
        with pytest.raises(ServiceError, match="students"):
            mgr.create(class_doc(students=[]))
        with pytest.raises(ServiceError, match="speed"):
            mgr.create(class_doc(speed=0))

    def test_unknown_session(self):
        mgr = SessionManager()
        with pytest.raises(ServiceError, match="no session"):
            mgr.get("nope")


class TestAdvance:
    def test_break_decay_by_one_efolding_time(self):
        mgr = SessionManager()
        doc = class_doc()
        doc["students"][0]["state0"] = [1.0, 1.0, 1.0, 1.0]
        session = mgr.create(doc)
        tau1 = 1.0 / STUDENT["gammas"][0]
        with session.lock:
            snap = session.advance(tau1)
        z = snap["students"][0]["z"]
        assert z[0] == pytest.approx(math.exp(-1.0), rel=1e-6)

    def test_zero_delta_is_a_noop(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            before = session.snapshot()
            after = session.advance(0.0)
        assert before == after
        assert session.history == []

    def test_split_advance_equivalence(self):
        mgr = SessionManager()
        a = mgr.create(class_doc())
        b = mgr.create(class_doc())
        with a.lock:
            a.set_control(8.0, 1)
            a.advance(10.0)
        with b.lock:
            b.set_control(8.0, 1)
            for _ in range(10):
                b.advance(1.0)
        za = a.students[0].state
        zb = b.students[0].state
        np.testing.assert_allclose(za, zb, atol=1e-9)

    def test_negative_delta_rejected(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock, pytest.raises(ServiceError):
            session.advance(-1.0)

    def test_heterogeneous_class_diverges_under_identical_teaching(self):
        mgr = SessionManager()
        students = []
        for i, g1 in enumerate((0.1, 0.3, 0.6)):
            students.append({
                "id": f"s{i}",
                "alphas": STUDENT["alphas"],
                "gammas": [g1, 0.05, 0.02, 0.01],
                "lambda": 3.0,
            })
        session = mgr.create(class_doc(students=students))
        with session.lock:
            session.set_control(10.0, 1)
            snap = session.advance(2.0)
        totals = [s["z_total"] for s in snap["students"]]
        assert len(set(round(v, 9) for v in totals)) == 3


class TestControlAndQuiz:
    def test_teaching_raises_knowledge_below_requirement(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            session.set_control(10.0, 1)
            snap = session.advance(1.0)
        assert snap["students"][0]["z_total"] > 0

    def test_last_write_wins_before_advance(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            session.set_control(3.0, 1)
            session.set_control(7.0, 1)
            session.set_control(5.0, 0)
        assert session.control.u == 0.0  # break forces requirement to zero
        assert session.control.teaching == 0
        with session.lock:
            session.set_control(5.0, 1)
        assert session.control.u == 5.0

    def test_quiz_probability_half_at_matched_difficulty(self):
        mgr = SessionManager()
        doc = class_doc()
        doc["students"][0]["state0"] = [2.0, 1.0, 0.5, 0.5]
        session = mgr.create(doc)
        with session.lock:
            result = session.give_quiz(4.0)  # theta == total Z
        assert result["results"][0]["probability"] == 0.5

    def test_quiz_does_not_change_states(self):
        mgr = SessionManager()
        doc = class_doc()
        doc["students"][0]["state0"] = [1.0, 1.0, 0.0, 0.0]
        session = mgr.create(doc)
        before = session.students[0].state.copy()
        with session.lock:
            session.give_quiz(1.0)
        np.testing.assert_array_equal(session.students[0].state, before)

    def test_quiz_deterministic_under_fixed_seed(self):
        outcomes = []
        for _ in range(2):
            mgr = SessionManager()
            doc = class_doc(n_students=8, seed=77)
            for s in doc["students"]:
                s["state0"] = [1.0, 0.5, 0.2, 0.1]
            session = mgr.create(doc)
            with session.lock:
                result = session.give_quiz(1.8)
            outcomes.append([r["outcome"] for r in result["results"]])
        assert outcomes[0] == outcomes[1]

    def test_saturated_quiz_all_pass(self):
        mgr = SessionManager()
        doc = class_doc(n_students=5)
        for s in doc["students"]:
            s["lambda"] = 1000.0
            s["state0"] = [5.0, 5.0, 5.0, 5.0]
        session = mgr.create(doc)
        with session.lock:
            result = session.give_quiz(1.0)
        assert result["pass_rate"] == 1.0


class TestScore:
    def test_untouched_session_scores_zero(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            session.advance(5.0)
            report = session.score()
        assert report["grade"] == 0.0
        assert report["quiz_pass_rate"] == 0.0

    def test_taught_session_outscores_idle_one(self):
        mgr = SessionManager()
        idle = mgr.create(class_doc())
        taught = mgr.create(class_doc())
        with idle.lock:
            idle.set_control(8.0, 1)  # sets max U but never advances while teaching
            idle.set_control(0.0, 0)
            idle.advance(5.0)
            idle_report = idle.score()
        with taught.lock:
            taught.set_control(8.0, 1)
            taught.advance(5.0)
            taught_report = taught.score()
        assert taught_report["grade"] > idle_report["grade"]

    def test_grade_monotone_in_final_knowledge(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            session.set_control(8.0, 1)
            session.advance(2.0)
            low = session.score()
            for student in session.students:
                student.state = student.state * 2.0
            high = session.score()
        assert high["grade"] >= low["grade"]


class TestIsolationAndStream:
    def test_sessions_do_not_interfere(self):
        mgr = SessionManager()
        a = mgr.create(class_doc())
        b = mgr.create(class_doc())
        with a.lock:
            a.set_control(9.0, 1)
            a.advance(3.0)
        with b.lock:
            b_snap = b.snapshot()
        assert b_snap["clock"] == 0.0
        assert b_snap["students"][0]["z_total"] == 0.0

    def test_subscribers_get_ordered_snapshots(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            q1 = session.subscribe()
            q2 = session.subscribe()
            session.set_control(6.0, 1)
            for _ in range(3):
                session.advance(1.0)
        msgs1 = [q1.get_nowait() for _ in range(5)]
        msgs2 = [q2.get_nowait() for _ in range(5)]
        assert msgs1[0]["type"] == "init"
        assert [m["type"] for m in msgs1[1:]] == ["control", "snapshot", "snapshot", "snapshot"]
        clocks = [m["clock"] for m in msgs1 if m["type"] == "snapshot"]
        assert clocks == sorted(clocks)
        assert msgs1 == msgs2

    def test_reconnect_gets_state_of_world_first(self):
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            session.set_control(6.0, 1)
            session.advance(2.0)
            q = session.subscribe()
        first = q.get_nowait()
        assert first["type"] == "init"
        assert first["clock"] == 2.0
        assert first["history"]


class TestBatchEquivalence:
    def test_scripted_controls_match_batch_lessons(self):
        params = ModelParams(alphas=(0.6, 0.35, 0.25, 0.2), gammas=(0.3, 0.12, 0.05, 0.02),
                             lam=3.0)
        schedule = RequirementSchedule((
            RequirementSegment(0.0, 1.0, 1, u_base=4.0),
            RequirementSegment(1.0, 1.5, 0),
            RequirementSegment(1.5, 2.5, 1, u_base=7.0),
            RequirementSegment(2.5, 3.0, 0),
            RequirementSegment(3.0, 4.0, 1, u_base=10.0),
            RequirementSegment(4.0, 4.5, 0),
        ))
        batch = run_lessons(schedule, "four", params, np.zeros(4),
                            IntegratorConfig(dt=0.01, record_every=10))
        mgr = SessionManager()
        session = mgr.create(class_doc())
        with session.lock:
            for seg in schedule.segments:
                session.set_control(seg.u_base, seg.teaching)
                session.advance(seg.t_end - seg.t_start)
        np.testing.assert_allclose(session.students[0].state, batch.z[-1], atol=1e-9)
        assert session.clock == pytest.approx(4.5)


@pytest.fixture(scope="module")
def live_server():
    server = make_server(port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base
    server.shutdown()


def api(base, method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(base + path, data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


class TestHttpApi:
    def test_health(self, live_server):
        status, doc = api(live_server, "GET", "/health")
        assert status == 200 and doc["status"] == "ok"

    def test_full_command_cycle(self, live_server):
        status, created = api(live_server, "POST", "/sessions", class_doc())
        assert status == 201
        sid = created["id"]

        status, listing = api(live_server, "GET", "/sessions")
        assert status == 200
        assert any(s["id"] == sid for s in listing["sessions"])

        status, ack = api(live_server, "POST", f"/sessions/{sid}/control",
                          {"u": 9.0, "teaching": 1})
        assert status == 200 and ack["control"]["u"] == 9.0

        status, snap = api(live_server, "POST", f"/sessions/{sid}/advance", {"sim_time": 2.0})
        assert status == 200
        assert snap["clock"] == 2.0
        assert snap["students"][0]["z_total"] > 0

        status, quiz = api(live_server, "POST", f"/sessions/{sid}/quiz", {"theta": 1.0})
        assert status == 200
        assert quiz["results"][0]["outcome"] in ("solved", "failed")

        status, score = api(live_server, "GET", f"/sessions/{sid}/score")
        assert status == 200 and score["max_u_taught"] == 9.0

        status, ended = api(live_server, "DELETE", f"/sessions/{sid}")
        assert status == 200 and ended["ended"] == sid
        status, _ = api(live_server, "GET", f"/sessions/{sid}")
        assert status == 404

    def test_error_codes(self, live_server):
        status, doc = api(live_server, "GET", "/sessions/doesnotexist")
        assert status == 404 and "error" in doc
        status, doc = api(live_server, "POST", "/sessions", {"students": []})
        assert status == 400
        status, created = api(live_server, "POST", "/sessions", class_doc())
        sid = created["id"]
        status, doc = api(live_server, "POST", f"/sessions/{sid}/control",
                          {"u": -1.0, "teaching": 1})
        assert status == 400
        status, doc = api(live_server, "POST", f"/sessions/{sid}/advance", {})
        assert status == 400

    def test_real_seconds_advance_scales_by_speed(self, live_server):
        status, created = api(live_server, "POST", "/sessions", class_doc(speed=4.0))
        sid = created["id"]
        status, snap = api(live_server, "POST", f"/sessions/{sid}/advance",
                           {"real_seconds": 0.5})
        assert snap["clock"] == pytest.approx(2.0)

    def test_stream_delivers_init_then_updates(self, live_server):
        status, created = api(live_server, "POST", "/sessions", class_doc())
        sid = created["id"]
        port = int(live_server.rsplit(":", 1)[1])

        import http.client

        conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
        conn.request("GET", f"/sessions/{sid}/stream")
        resp = conn.getresponse()
        assert resp.status == 200
        assert resp.getheader("Content-Type") == "text/event-stream"

        def read_event():
            payload = None
            while True:
                line = resp.fp.readline().decode()
                if line.startswith("data: "):
                    payload = json.loads(line[len("data: "):])
                if line.strip() == "" and payload is not None:
                    return payload

        first = read_event()
        assert first["type"] == "init"

        api(live_server, "POST", f"/sessions/{sid}/control", {"u": 5.0, "teaching": 1})
        api(live_server, "POST", f"/sessions/{sid}/advance", {"sim_time": 1.0})
        second = read_event()
        third = read_event()
        assert second["type"] == "control"
        assert third["type"] == "snapshot"
        assert third["clock"] == 1.0
        conn.close()
