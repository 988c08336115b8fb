import pytest
from fastapi.testclient import TestClient

from sumloop.annotation import (
    AnnotationConflict,
    AnnotationError,
    create_app,
    enqueue,
    load_iteration_tasks,
    queue_status,
    submit,
)
from sumloop.corpus import Provenance
from sumloop.loop_engine import (
    AdapterSpec,
    HlMode,
    LoopEngine,
    RunConfig,
    RunSuspended,
)
from sumloop.model_adapter import AdapterKind
from sumloop.runstate import STATUS_AWAITING, RunDir
from sumloop.strategies import SelectionKind, StrategySpec
from sumloop.synth import default_lexicon, generate_corpus
from sumloop.metrics import NegexRules

from tests.conftest import make_corpus


@pytest.fixture
def run_dir(tmp_path):
    rd = RunDir(tmp_path, "live-run")
    rd.write_state({"status": STATUS_AWAITING, "awaiting_iteration": 1})
    return rd


@pytest.fixture
def selected():
    return list(make_corpus(9, prefix="q").samples)


class TestQueueStore:
    def test_enqueue_creates_one_task_per_sample(self, run_dir, selected):
        tasks = enqueue(run_dir, selected, iteration=1)
        assert len(tasks) == 9
        assert all(t.status == "pending" for t in tasks)
        assert {t.sample_id for t in tasks} == {s.id for s in selected}

    def test_enqueue_is_idempotent_after_partial_submission(self, run_dir, selected):
        tasks = enqueue(run_dir, selected, iteration=1)
        for task in tasks[:4]:
            submit(run_dir, task.task_id, f"summary for {task.sample_id}")
        again = enqueue(run_dir, selected, iteration=1)
        assert len(again) == 9
        assert sum(1 for t in again if t.status == "pending") == 5
        assert sum(1 for t in again if t.status == "submitted") == 4

    def test_enqueue_empty_selection(self, run_dir):
        assert enqueue(run_dir, [], iteration=1) == []

    def test_enqueue_blocked_by_unfulfilled_previous_iteration(self, run_dir, selected):
        enqueue(run_dir, selected[:3], iteration=1)
        with pytest.raises(AnnotationError, match="pending"):
            enqueue(run_dir, selected[3:6], iteration=2)

    def test_submit_marks_resumable_on_last_task(self, run_dir, selected):
        tasks = enqueue(run_dir, selected[:3], iteration=1)
        for task in tasks[:-1]:
            submit(run_dir, task.task_id, "text")
            assert queue_status(run_dir)["resumable"] is False
        submit(run_dir, tasks[-1].task_id, "text")
        status = queue_status(run_dir)
        assert status["pending_count"] == 0
        assert status["resumable"] is True

    def test_second_submission_conflicts_and_first_wins(self, run_dir, selected):
        tasks = enqueue(run_dir, selected[:2], iteration=1)
        submit(run_dir, tasks[0].task_id, "original")
        with pytest.raises(AnnotationConflict):
            submit(run_dir, tasks[0].task_id, "usurper")
        stored = {t.task_id: t for t in load_iteration_tasks(run_dir, 1)}
        assert stored[tasks[0].task_id].submitted_summary == "original"

    def test_empty_summary_rejected(self, run_dir, selected):
        tasks = enqueue(run_dir, selected[:1], iteration=1)
        with pytest.raises(AnnotationError, match="nonempty"):
            submit(run_dir, tasks[0].task_id, "   ")

    def test_unknown_task_rejected(self, run_dir):
        with pytest.raises(AnnotationError, match="unknown task"):
            submit(run_dir, "i1-ghost", "text")


class TestHttpApi:
    @pytest.fixture
    def client(self, run_dir, selected):
        enqueue(run_dir, selected[:3], iteration=1)
        app = create_app(run_dir.path.parent, "live-run")
        return TestClient(app)

    def test_queue_lists_pending(self, client):
        body = client.get("/api/queue", params={"run_id": "live-run"}).json()
        assert len(body["tasks"]) == 3
        assert all(t["status"] == "pending" for t in body["tasks"])

    def test_task_detail_includes_turns(self, client):
        task_id = client.get("/api/queue").json()["tasks"][0]["task_id"]
        body = client.get(f"/api/task/{task_id}").json()
        assert body["task_id"] == task_id
        assert body["turns"][0]["speaker"] == "patient"

    def test_submit_flow_and_conflict(self, client):
        task_id = client.get("/api/queue").json()["tasks"][0]["task_id"]
        ok = client.post(f"/api/task/{task_id}/submit", json={"summary": "expert words"})
        assert ok.status_code == 200
        assert ok.json()["submitted_summary"] == "expert words"
        dup = client.post(f"/api/task/{task_id}/submit", json={"summary": "too late"})
        assert dup.status_code == 409
        assert len(client.get("/api/queue").json()["tasks"]) == 2

    def test_empty_submit_rejected(self, client):
        task_id = client.get("/api/queue").json()["tasks"][0]["task_id"]
        bad = client.post(f"/api/task/{task_id}/submit", json={"summary": "  "})
        assert bad.status_code == 422

    def test_unknown_task_404(self, client):
        assert client.get("/api/task/i1-ghost").status_code == 404
        assert client.post("/api/task/i1-ghost/submit", json={"summary": "x"}).status_code == 422

    def test_status_endpoint(self, client):
        body = client.get("/api/status", params={"run_id": "live-run"}).json()
        assert body == {
            "run_id": "live-run",
            "iteration": 1,
            "pending_count": 3,
            "total_count": 3,
            "resumable": False,
        }

    def test_wrong_run_id_is_404(self, client):
        assert client.get("/api/status", params={"run_id": "other"}).status_code == 404


class TestLiveModeEndToEnd:
    def test_suspend_submit_resume_commits_byte_exact_summaries(self, tmp_path):
        lexicon = default_lexicon()
        rules = NegexRules.default()
        corpus = generate_corpus(320, seed=31, lexicon=lexicon)
        test = generate_corpus(20, seed=32, lexicon=lexicon, id_prefix="test")
        engine = LoopEngine(corpus, test, lexicon, rules, checkpoint_root=tmp_path)
        config = RunConfig(
            run_id="live-e2e",
            l0_size=20,
            strategy=StrategySpec(pl=SelectionKind.NONE, hl=SelectionKind.BOTTOM,
                                  hl_fraction=0.01),
            n_iterations=1,
            seed=17,
            adapter=AdapterSpec(kind=AdapterKind.ORACLE_NOISE, noise_rate=0.2),
            hl_mode=HlMode.LIVE_HUMAN,
        )
        with pytest.raises(RunSuspended) as exc_info:
            engine.run_experiment(config)
        assert exc_info.value.pending_count == 3  # ceil(0.01 * 300)

        run_dir = RunDir(tmp_path, "live-e2e")
        client = TestClient(create_app(tmp_path, "live-e2e"))
        tasks = client.get("/api/queue").json()["tasks"]
        submitted = {}
        for task in tasks:
            text = f"Expert summary for {task['sample_id']} — byte exact ✓"
            assert client.post(
                f"/api/task/{task['task_id']}/submit", json={"summary": text}
            ).status_code == 200
            submitted[task["sample_id"]] = text
        assert client.get("/api/status").json()["resumable"] is True

        result = engine.run_experiment(config, resume=True)
        assert result.per_iteration[-1]["added_expert"] == 3
        pool = run_dir.read_pool(1)
        experts = {
            sid: record
            for sid, record in pool.labeled.items()
            if record.provenance is Provenance.EXPERT_HUMAN
        }
        assert {sid: r.summary for sid, r in experts.items()} == submitted

    def test_resume_before_queue_drained_suspends_again(self, tmp_path):
        lexicon = default_lexicon()
        rules = NegexRules.default()
        corpus = generate_corpus(220, seed=41, lexicon=lexicon)
        test = generate_corpus(12, seed=42, lexicon=lexicon, id_prefix="test")
        engine = LoopEngine(corpus, test, lexicon, rules, checkpoint_root=tmp_path)
        config = RunConfig(
            run_id="live-partial",
            l0_size=20,
            strategy=StrategySpec(hl=SelectionKind.RANDOM, hl_fraction=0.01),
            n_iterations=1,
            seed=3,
            adapter=AdapterSpec(kind=AdapterKind.ORACLE_NOISE, noise_rate=0.2),
            hl_mode=HlMode.LIVE_HUMAN,
        )
        with pytest.raises(RunSuspended):
            engine.run_experiment(config)
        run_dir = RunDir(tmp_path, "live-partial")
        tasks = load_iteration_tasks(run_dir, 1)
        submit(run_dir, tasks[0].task_id, "only one")
        with pytest.raises(RunSuspended) as exc_info:
            engine.run_experiment(config, resume=True)
        assert exc_info.value.pending_count == 1
