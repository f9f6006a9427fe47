import io
import json
import time

import pytest
from fastapi.testclient import TestClient

from refsynth.config import AppConfig
from refsynth.service import JOB_STATES, build_hermetic_backends, create_app
from refsynth.testing import corpus_jsonl_lines, generate_corpus_records

ABSTRACT = (
    "optics study analysis of measurement and inference for experimental systems "
    "with a framework for evaluation of models and data across simulation and "
    "benchmark structure dynamics estimation observation thereof in detail"
)


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    config = AppConfig(
        hermetic=True,
        dim=64,
        admin_token="secret",
        job_dir=str(tmp / "jobs"),
        store_path=str(tmp / "store.cgst"),
        hash_index_path=str(tmp / "index.cghx"),
    )
    backends = build_hermetic_backends(config, corpus_size=150)
    app = create_app(backends, config)
    return TestClient(app)


def _wait(client, job_id, timeout=30.0):
    states = []
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        if not states or job["state"] != states[-1]:
            states.append(job["state"])
        if job["state"] in ("done", "failed"):
            return job, states
        time.sleep(0.02)
    raise TimeoutError(f"job {job_id} did not finish; states={states}")


def test_generate_creates_job_and_completes(client):
    resp = client.post("/api/generate", json={"abstract": ABSTRACT})
    assert resp.status_code == 200
    job_id = resp.json()["job_id"]
    job, states = _wait(client, job_id)
    assert job["state"] == "done"
    assert job["error"] is None
    result = job["result"]
    assert result is not None
    # grounding: every citation id is shortlisted; body keys match citations
    shortlist = set(result["shortlist_ids"])
    assert {c["arxiv_id"] for c in result["citations"]} <= shortlist
    assert len(result["shortlist_ids"]) <= 12
    # polled states are a subsequence of the canonical forward chain
    indices = [JOB_STATES.index(s) for s in states]
    assert indices == sorted(indices)


def test_params_echoed(client):
    resp = client.post(
        "/api/generate",
        json={"abstract": ABSTRACT, "breadth": 5, "depth": 3, "diversity": 0.25},
    )
    job, _ = _wait(client, resp.json()["job_id"])
    assert job["params"] == {"breadth": 5, "depth": 3, "diversity": 0.25}
    assert job["result"]["params_used"] == {"breadth": 5, "depth": 3, "diversity": 0.25}


def test_short_abstract_rejected(client):
    resp = client.post("/api/generate", json={"abstract": "tiny"})
    assert resp.status_code == 422
    err = resp.json()["error"]
    assert err["field"] == "abstract"


def test_diversity_out_of_bounds_rejected(client):
    resp = client.post(
        "/api/generate", json={"abstract": ABSTRACT, "diversity": 1.5}
    )
    assert resp.status_code == 422
    assert resp.json()["error"]["field"] == "diversity"


def test_generate_pdf_three_page_fixture(client):
    doc = (ABSTRACT + "\fsecond page about optics analysis\fthird page of text").encode()
    resp = client.post(
        "/api/generate-pdf",
        files={"file": ("paper.txt", io.BytesIO(doc), "text/plain")},
        data={"breadth": 5, "depth": 2, "diversity": 0.0},
    )
    assert resp.status_code == 200
    job, _ = _wait(client, resp.json()["job_id"])
    assert job["state"] == "done"
    assert len(job["result"]["shortlist_ids"]) > 0


def test_zero_byte_upload_rejected(client):
    resp = client.post(
        "/api/generate-pdf", files={"file": ("x.txt", io.BytesIO(b""), "text/plain")}
    )
    assert resp.status_code == 422


def test_oversize_upload_rejected(tmp_path):
    config = AppConfig(hermetic=True, dim=32, max_upload_bytes=100,
                       job_dir=str(tmp_path / "jobs"))
    backends = build_hermetic_backends(config, corpus_size=20)
    small_client = TestClient(create_app(backends, config))
    resp = small_client.post(
        "/api/generate-pdf", files={"file": ("x.txt", io.BytesIO(b"a" * 200), "text/plain")}
    )
    assert resp.status_code == 422
    assert "100" in resp.json()["error"]["message"]


def test_question_endpoint(client):
    resp = client.post(
        "/api/question",
        json={"question": "What methods exist?", "abstract": ABSTRACT},
    )
    assert resp.status_code == 200
    job, _ = _wait(client, resp.json()["job_id"])
    assert job["state"] == "done"
    result = job["result"]
    assert {c["arxiv_id"] for c in result["citations"]} <= set(result["shortlist_ids"])


def test_question_requires_question(client):
    resp = client.post("/api/question", json={"abstract": ABSTRACT})
    assert resp.status_code == 422
    assert resp.json()["error"]["field"] == "question"


def test_question_requires_abstract(client):
    resp = client.post("/api/question", json={"question": "What?"})
    assert resp.status_code == 422
    assert resp.json()["error"]["field"] == "abstract"


def test_unknown_job_not_found(client):
    resp = client.get("/api/jobs/00000000-0000-0000-0000-000000000000")
    assert resp.status_code == 404


def test_sync_requires_admin_token(client, tmp_path):
    snap = tmp_path / "snap.jsonl"
    snap.write_text("\n".join(corpus_jsonl_lines(generate_corpus_records(5))))
    resp = client.post("/api/sync", json={"snapshot": str(snap)})
    assert resp.status_code == 403
    resp = client.post(
        "/api/sync",
        json={"snapshot": str(snap), "dry_run": True},
        headers={"X-Admin-Token": "secret"},
    )
    assert resp.status_code == 200
    assert "counts" in resp.json()


def test_concurrent_sync_conflicts(client, tmp_path):
    snap = tmp_path / "snap.jsonl"
    snap.write_text("\n".join(corpus_jsonl_lines(generate_corpus_records(3))))
    manager = client.app.state.manager
    assert manager.sync_running.acquire(blocking=False)
    try:
        resp = client.post(
            "/api/sync",
            json={"snapshot": str(snap), "dry_run": True},
            headers={"X-Admin-Token": "secret"},
        )
        assert resp.status_code == 409
    finally:
        manager.sync_running.release()


def test_job_persisted_to_disk(client):
    resp = client.post("/api/generate", json={"abstract": ABSTRACT})
    job_id = resp.json()["job_id"]
    job, _ = _wait(client, job_id)
    manager = client.app.state.manager
    # simulate a restart: drop the in-memory map, read back from disk
    manager.jobs.pop(job_id)
    reloaded = manager.get(job_id)
    assert reloaded is not None
    assert reloaded.state == "done"
