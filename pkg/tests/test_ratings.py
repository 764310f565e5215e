import json

import pytest
from fastapi.testclient import TestClient

from rtplab.ratings import RatingStore, create_app

RUNS = [f"r{i:02d}_run" for i in range(16)]


def write_playlists(dataset, mapping, training=()):
    root = dataset / "playlists"
    root.mkdir(parents=True, exist_ok=True)
    for (session, part), items in mapping.items():
        lines = []
        if (session, part) in training:
            lines.append("#training")
        lines.extend(items)
        (root / f"session{session}_part{part}.txt").write_text("\n".join(lines) + "\n")


@pytest.fixture()
def dataset(tmp_path):
    mapping = {}
    names = iter(RUNS)
    for session in (1, 2):
        for part in (1, 2, 3, 4):
            mapping[(session, part)] = [next(names), next(names)]
    write_playlists(tmp_path, mapping, training={(1, 1)})
    # one fake received manifest so the media endpoint has something to serve
    run_dir = tmp_path / RUNS[2]
    run_dir.mkdir()
    (run_dir / "received_manifest.csv").write_text(
        "kind,index,rtp_timestamp,size,digest,fragments_expected,fragments_received,complete,digest_ok\n"
        "video,0,0,5000,00000000000000aa,4,4,true,true\n"
        "video,1,3600,5200,00000000000000ab,4,2,false,\n"
    )
    return tmp_path


@pytest.fixture()
def client(dataset):
    return TestClient(create_app(dataset))


def rating(run_id, *, session=1, part=2, position=0, score=3, rater="alice"):
    return {
        "rater_id": rater,
        "run_id": run_id,
        "session": session,
        "part": part,
        "position": position,
        "score": score,
    }


def test_playlist_served_in_file_order(client):
    response = client.get("/sessions/1/parts/2/playlist")
    assert response.status_code == 200
    body = response.json()
    assert [item["run_id"] for item in body["items"]] == [RUNS[2], RUNS[3]]
    assert [item["position"] for item in body["items"]] == [0, 1]
    assert body["training"] is False


def test_training_flag_exposed(client):
    body = client.get("/sessions/1/parts/1/playlist").json()
    assert body["training"] is True
    assert all(item["training"] for item in body["items"])


def test_unknown_playlist_404(client):
    assert client.get("/sessions/3/parts/1/playlist").status_code == 404
    assert client.get("/sessions/1/parts/9/playlist").status_code == 404


def test_manifest_endpoint(client):
    body = client.get(f"/runs/{RUNS[2]}/manifest").json()
    assert body["run_id"] == RUNS[2]
    assert len(body["frames"]) == 2
    assert body["frames"][0]["complete"] is True
    assert body["frames"][1]["fragments_received"] == 2
    assert client.get("/runs/nope/manifest").status_code == 404


def test_post_rating_and_conflict(client):
    first = client.post("/ratings", json=rating(RUNS[2]))
    assert first.status_code == 201
    dup = client.post("/ratings", json=rating(RUNS[2], score=5))
    assert dup.status_code == 409
    other_rater = client.post("/ratings", json=rating(RUNS[2], rater="bob"))
    assert other_rater.status_code == 201


def test_post_rating_validates_score(client):
    for bad in (0, 6, -1):
        response = client.post("/ratings", json=rating(RUNS[2], score=bad))
        assert response.status_code == 422
    assert client.post("/ratings", json=rating(RUNS[2], score=5)).status_code == 201


def test_post_rating_unknown_session_or_run(client):
    assert client.post("/ratings", json=rating(RUNS[2], session=9)).status_code == 404
    assert client.post("/ratings", json=rating("unlisted_run")).status_code == 404


def test_progress_counts_and_next_position(client):
    client.post("/ratings", json=rating(RUNS[3], position=1))  # second item of (1,2)
    body = client.get("/progress/alice").json()
    part = next(p for p in body["parts"] if p["session"] == 1 and p["part"] == 2)
    assert part["rated"] == 1
    assert part["total"] == 2
    assert part["next_position"] == 0  # first item still unrated
    assert body["total_rated"] == 1
    assert body["total"] == 16


def test_journal_replay_reconstructs_table(dataset, client):
    client.post("/ratings", json=rating(RUNS[2], score=4))
    client.post("/ratings", json=rating(RUNS[4], session=1, part=3, score=2))
    journal = (dataset / "ratings.jsonl").read_text().splitlines()
    assert len(journal) == 2
    assert all(json.loads(line)["rater_id"] == "alice" for line in journal)

    reborn = RatingStore(dataset)
    assert sorted(r["run_id"] for r in reborn.records()) == sorted([RUNS[2], RUNS[4]])
    # a duplicate against the replayed store is still refused
    fresh_client = TestClient(create_app(dataset))
    assert fresh_client.post("/ratings", json=rating(RUNS[2])).status_code == 409


def test_export_excludes_training(client):
    client.post("/ratings", json=rating(RUNS[0], session=1, part=1))  # training part
    client.post("/ratings", json=rating(RUNS[2], session=1, part=2, score=5))
    export = client.get("/ratings/export")
    assert export.status_code == 200
    lines = export.text.strip().splitlines()
    assert lines[0].startswith("rater_id,run_id,")
    assert len(lines) == 2  # header + the single non-training record
    assert RUNS[2] in lines[1] and RUNS[0] not in export.text


def test_full_session_completion_matches_playlists(client):
    total = 0
    for session in (1, 2):
        for part in (1, 2, 3, 4):
            items = client.get(f"/sessions/{session}/parts/{part}/playlist").json()["items"]
            for item in items:
                response = client.post(
                    "/ratings",
                    json=rating(
                        item["run_id"],
                        session=session,
                        part=part,
                        position=item["position"],
                        score=(total % 5) + 1,
                    ),
                )
                assert response.status_code == 201
                total += 1
    assert total == 16
    progress = client.get("/progress/alice").json()
    assert progress["total_rated"] == progress["total"] == 16
    assert all(p["next_position"] is None for p in progress["parts"])


def test_sessions_index(client):
    body = client.get("/sessions").json()
    assert len(body["sessions"]) == 8
    assert sum(1 for s in body["sessions"] if s["training"]) == 1
