import numpy as np
import pytest
from fastapi.testclient import TestClient

from insfuse import fileio
from insfuse.feedback import CaafParams, Label, TopKStrategy
from insfuse.models import Ranking
from insfuse.service import create_app
from insfuse.session import replay

SHOTS = [f"s{i:02d}" for i in range(10)]


@pytest.fixture
def data_dir(tmp_path):
    ranking = Ranking("9001", [(s, 1.0 - i / 10) for i, s in enumerate(SHOTS)], "base")
    fileio.atomic_write(tmp_path / "base.run", fileio.write_run(ranking, 1000))
    rng = np.random.default_rng(97)
    lines = []
    for i, s in enumerate(SHOTS):
        center = np.ones(6) if i % 2 == 0 else -np.ones(6)
        vec = center + rng.normal(0, 0.2, 6)
        lines.append("\t".join([s] + [f"{x:.6f}" for x in vec]))
    (tmp_path / "features.tsv").write_text("\n".join(lines) + "\n")
    assets = tmp_path / "assets"
    assets.mkdir()
    (assets / "s03.jpg").write_bytes(b"\xff\xd8fakejpeg")
    return tmp_path


@pytest.fixture
def client(data_dir):
    return TestClient(create_app(data_dir, data_dir / "assets"))


def create_topk(client, k=5):
    response = client.post(
        "/sessions",
        json={"run": "base.run", "topic_id": "9001", "strategy": {"kind": "topk", "k": k}},
    )
    assert response.status_code == 201
    return response.json()


def create_caaf(client, **params):
    body = {"run": "base.run", "topic_id": "9001", "strategy": {"kind": "caaf", "a_probe": 11, **params}}
    response = client.post("/sessions", json=body)
    assert response.status_code == 201
    return response.json()


class TestCreateSession:
    def test_topk_recommends_prefix(self, client):
        out = create_topk(client, k=5)
        assert out["recommendations"] == SHOTS[:5]

    def test_caaf_batch_nonempty(self, client):
        out = create_caaf(client, batch=4)
        assert len(out["recommendations"]) == 4

    def test_unknown_topic(self, client):
        response = client.post(
            "/sessions",
            json={"run": "base.run", "topic_id": "nope", "strategy": {"kind": "topk", "k": 5}},
        )
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_topic"

    def test_missing_features_for_caaf(self, client, data_dir):
        (data_dir / "features.tsv").unlink()
        response = client.post(
            "/sessions",
            json={"run": "base.run", "topic_id": "9001", "strategy": {"kind": "caaf", "a_probe": 11}},
        )
        assert response.status_code == 422
        assert response.json()["code"] == "missing_features"


class TestLabels:
    def test_topk_rearrangement(self, client):
        session_id = create_topk(client)["session_id"]
        response = client.post(
            f"/sessions/{session_id}/labels",
            json={"labels": [
                {"shot_id": "s00", "polarity": "positive"},
                {"shot_id": "s04", "polarity": "negative"},
            ]},
        )
        assert response.status_code == 200
        assert response.json()["version"] == 1
        ranking = client.get(f"/sessions/{session_id}/ranking").json()
        order = [e["shot_id"] for e in ranking["entries"]]
        assert order[0] == "s00"
        assert order[-1] == "s04"

    def test_caaf_positive_label_tops_ranking(self, client):
        session_id = create_caaf(client)["session_id"]
        response = client.post(
            f"/sessions/{session_id}/labels",
            json={"labels": [{"shot_id": "s07", "polarity": "positive"}]},
        )
        assert response.status_code == 200
        ranking = client.get(f"/sessions/{session_id}/ranking").json()
        assert ranking["entries"][0]["shot_id"] == "s07"

    def test_repeat_batch_version_bumps_ranking_unchanged(self, client):
        session_id = create_topk(client)["session_id"]
        batch = {"labels": [{"shot_id": "s03", "polarity": "positive"}]}
        first = client.post(f"/sessions/{session_id}/labels", json=batch).json()
        ranking_1 = client.get(f"/sessions/{session_id}/ranking").json()["entries"]
        second = client.post(f"/sessions/{session_id}/labels", json=batch).json()
        ranking_2 = client.get(f"/sessions/{session_id}/ranking").json()["entries"]
        assert second["version"] == first["version"] + 1
        assert ranking_1 == ranking_2

    def test_unknown_shot_rejected_per_label(self, client):
        session_id = create_topk(client)["session_id"]
        response = client.post(
            f"/sessions/{session_id}/labels",
            json={"labels": [
                {"shot_id": "zz", "polarity": "positive"},
                {"shot_id": "s02", "polarity": "positive"},
            ]},
        )
        body = response.json()
        assert body["rejected"] == [{"shot_id": "zz", "polarity": "positive"}]
        order = [e["shot_id"] for e in client.get(f"/sessions/{session_id}/ranking").json()["entries"]]
        assert order[0] == "s02"

    def test_unknown_session(self, client):
        response = client.post("/sessions/nope/labels", json={"labels": []})
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_session"


class TestRankingAndExport:
    def test_fresh_topk_preserves_input_order(self, client):
        session_id = create_topk(client)["session_id"]
        ranking = client.get(f"/sessions/{session_id}/ranking").json()
        assert [e["shot_id"] for e in ranking["entries"]] == SHOTS

    def test_limit(self, client):
        session_id = create_topk(client)["session_id"]
        ranking = client.get(f"/sessions/{session_id}/ranking", params={"limit": 3}).json()
        assert len(ranking["entries"]) == 3

    def test_export_round_trips(self, client):
        session_id = create_topk(client)["session_id"]
        client.post(
            f"/sessions/{session_id}/labels",
            json={"labels": [{"shot_id": "s05", "polarity": "positive"}]},
        )
        data = client.get(f"/sessions/{session_id}/export").content
        parsed = fileio.read_run(data)
        assert len(parsed) == 1
        assert parsed[0].shot_ids()[0] == "s05"
        assert fileio.write_run(parsed[0], 1000) == data

    def test_session_view_restores_state(self, client):
        session_id = create_topk(client)["session_id"]
        client.post(
            f"/sessions/{session_id}/labels",
            json={"labels": [{"shot_id": "s05", "polarity": "positive"}]},
        )
        meta = client.get(f"/sessions/{session_id}").json()
        assert meta["version"] == 1
        assert meta["rounds"] == 1
        assert meta["labels"] == [{"shot_id": "s05", "polarity": "positive"}]
        assert meta["strategy"]["kind"] == "topk"


class TestReplayDeterminism:
    def drive(self, client, session_id, batches):
        for batch in batches:
            payload = {"labels": [{"shot_id": s, "polarity": p} for s, p in batch]}
            assert client.post(f"/sessions/{session_id}/labels", json=payload).status_code == 200
        return client.get(f"/sessions/{session_id}/export").content

    def test_topk_replay(self, client, data_dir):
        batches = [
            [("s04", "positive"), ("s01", "negative")],
            [("s04", "positive")],  # duplicate batch
            [("s08", "positive"), ("s00", "negative")],
        ]
        session_id = create_topk(client, k=5)["session_id"]
        exported = self.drive(client, session_id, batches)

        base = fileio.read_run(data_dir / "base.run")[0]
        label_batches = [[Label(s, p) for s, p in batch] for batch in batches]
        history = replay("topk", base, label_batches, topk=TopKStrategy(k=5))
        assert fileio.write_run(history[-1], 1000) == exported

    def test_caaf_replay(self, client, data_dir):
        batches = [
            [("s03", "positive"), ("s06", "negative")],
            [("s03", "positive")],
            [("s02", "negative"), ("s09", "positive")],
        ]
        session_id = create_caaf(client)["session_id"]
        exported = self.drive(client, session_id, batches)

        base = fileio.read_run(data_dir / "base.run")[0]
        features = fileio.load_features(data_dir / "features.tsv")
        label_batches = [[Label(s, p) for s, p in batch] for batch in batches]
        history = replay("caaf", base, label_batches, caaf_params=CaafParams(a_probe=11), features=features)
        assert fileio.write_run(history[-1], 1000) == exported


class TestAssets:
    def test_present(self, client):
        response = client.get("/assets/keyframes/s03")
        assert response.status_code == 200
        assert response.content.startswith(b"\xff\xd8")

    def test_absent(self, client):
        response = client.get("/assets/keyframes/s99")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_asset"
