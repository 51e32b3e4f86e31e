import io
import json
import threading
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from npcontrast.service import create_app

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def client():
    return TestClient(create_app())


def upload(client, path=FIXTURES / "binary_image.png", **form):
    with open(path, "rb") as fh:
        return client.post("/sessions", files={"image": ("image.png", fh, "image/png")}, data=form)


def paint(client, sid, pixels, class_id):
    strokes = [{"x": x, "y": y, "class_id": class_id} for (x, y) in pixels]
    return client.post(f"/sessions/{sid}/labels", json={"strokes": strokes})


def label_fixture_regions(client, sid):
    """Label one pixel of each dark level as class 1 and of each bright
    level as class 2 (disjoint supports: NPC exactly 1)."""
    img = np.asarray(Image.open(FIXTURES / "binary_image.png"))
    dark = [np.argwhere(img == level)[0] for level in (10, 20)]
    bright = [np.argwhere(img == level)[0] for level in (200, 220)]
    r1 = paint(client, sid, [(int(x), int(y)) for y, x in dark], 1)
    r2 = paint(client, sid, [(int(x), int(y)) for y, x in bright], 2)
    return r1, r2


class TestSessionLifecycle:
    def test_create_returns_metadata(self, client):
        resp = upload(client)
        assert resp.status_code == 201
        body = resp.json()
        assert body["revision"] == 0
        assert body["width"] == 16 and body["height"] == 16
        assert body["settings"]["tie_break"] == "lowest"

    def test_corrupt_upload_is_400(self, client):
        resp = client.post("/sessions", files={"image": ("x.png", io.BytesIO(b"junk"), "image/png")})
        assert resp.status_code == 400

    def test_second_upload_gets_independent_session(self, client):
        a = upload(client).json()["id"]
        b = upload(client).json()["id"]
        assert a != b

    def test_oversized_upload_is_413(self):
        client = TestClient(create_app(max_upload_bytes=64))
        resp = upload(client)
        assert resp.status_code == 413

    def test_bad_settings_are_400(self, client):
        assert upload(client, tie_break="sideways").status_code == 400
        assert upload(client, domain_range="10").status_code == 400

    def test_delete_then_404(self, client):
        sid = upload(client).json()["id"]
        assert client.delete(f"/sessions/{sid}").status_code == 204
        assert client.get(f"/sessions/{sid}/metrics").status_code == 404
        assert client.delete(f"/sessions/{sid}").status_code == 404


class TestLabelEdits:
    def test_paint_and_erase_revisions(self, client):
        sid = upload(client).json()["id"]
        pixels = [(x, 0) for x in range(10)]
        resp = paint(client, sid, pixels, 1)
        assert resp.status_code == 200 and resp.json()["revision"] == 1
        resp = paint(client, sid, pixels, 0)
        assert resp.json()["revision"] == 2
        mask = client.get(f"/sessions/{sid}/mask")
        assert mask.headers["x-revision"] == "2"
        arr = np.asarray(Image.open(io.BytesIO(mask.content)))
        assert arr.sum() == 0

    def test_out_of_bounds_rejected_atomically(self, client):
        sid = upload(client).json()["id"]
        resp = client.post(
            f"/sessions/{sid}/labels",
            json={"strokes": [{"x": 0, "y": 0, "class_id": 1}, {"x": 99, "y": 0, "class_id": 1}]},
        )
        assert resp.status_code == 422
        mask = np.asarray(Image.open(io.BytesIO(client.get(f"/sessions/{sid}/mask").content)))
        assert mask.sum() == 0  # nothing from the failed batch landed

    def test_unknown_session_404(self, client):
        assert paint(client, "deadbeef", [(0, 0)], 1).status_code == 404

    def test_class_above_palette_rejected(self, client):
        sid = upload(client, max_classes="3").json()["id"]
        assert paint(client, sid, [(0, 0)], 4).status_code == 422

    def test_concurrent_batches_both_apply(self, client):
        sid = upload(client).json()["id"]
        left = [(x, y) for y in range(4) for x in range(4)]
        right = [(x + 10, y) for y in range(4) for x in range(4)]
        results = []

        def worker(pixels, cid):
            results.append(paint(client, sid, pixels, cid).json()["revision"])

        threads = [
            threading.Thread(target=worker, args=(left, 1)),
            threading.Thread(target=worker, args=(right, 2)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [1, 2]
        arr = np.asarray(Image.open(io.BytesIO(client.get(f"/sessions/{sid}/mask").content)))
        assert (arr == 1).sum() == 16 and (arr == 2).sum() == 16


class TestMetrics:
    def test_disjoint_labels_give_npc_one(self, client):
        sid = upload(client).json()["id"]
        label_fixture_regions(client, sid)
        resp = client.get(f"/sessions/{sid}/metrics")
        assert resp.status_code == 200
        body = resp.json()
        assert body["revision"] == 2
        assert body["results"]["npc"] == 1.0
        assert body["class_ids"] == [1, 2]

    def test_single_class_is_409(self, client):
        sid = upload(client).json()["id"]
        paint(client, sid, [(0, 0)], 1)
        resp = client.get(f"/sessions/{sid}/metrics")
        assert resp.status_code == 409
        assert "insufficient labels" in resp.json()["detail"]

    def test_no_labels_is_409(self, client):
        sid = upload(client).json()["id"]
        assert client.get(f"/sessions/{sid}/metrics").status_code == 409

    def test_sparse_class_ids_are_reported_as_painted(self, client):
        sid = upload(client).json()["id"]
        img = np.asarray(Image.open(FIXTURES / "binary_image.png"))
        y1, x1 = np.argwhere(img == 10)[0]
        y2, x2 = np.argwhere(img == 220)[0]
        paint(client, sid, [(int(x1), int(y1))], 2)
        paint(client, sid, [(int(x2), int(y2))], 5)
        body = client.get(f"/sessions/{sid}/metrics").json()
        assert body["class_ids"] == [2, 5]
        assert set(body["results"]["per_class_error"]) == {"2", "5"}

    def test_read_your_writes(self, client):
        sid = upload(client).json()["id"]
        r1, r2 = label_fixture_regions(client, sid)
        acked = r2.json()["revision"]
        body = client.get(f"/sessions/{sid}/metrics").json()
        assert body["revision"] >= acked

    def test_sessions_are_isolated(self, client):
        sid_a = upload(client).json()["id"]
        sid_b = upload(client).json()["id"]
        label_fixture_regions(client, sid_a)
        assert client.get(f"/sessions/{sid_b}/metrics").status_code == 409
        assert client.get(f"/sessions/{sid_a}/metrics").status_code == 200


class TestSegmentationEndpoint:
    def test_ids_and_color_agree_and_echo_revision(self, client):
        sid = upload(client).json()["id"]
        label_fixture_regions(client, sid)
        ids_resp = client.get(f"/sessions/{sid}/segmentation", params={"format": "ids"})
        color_resp = client.get(f"/sessions/{sid}/segmentation", params={"format": "color"})
        assert ids_resp.status_code == color_resp.status_code == 200
        assert ids_resp.headers["x-revision"] == "2"
        ids = np.asarray(Image.open(io.BytesIO(ids_resp.content)))
        rgba = np.asarray(Image.open(io.BytesIO(color_resp.content)))
        img = np.asarray(Image.open(FIXTURES / "binary_image.png"))
        assert np.all(ids[img == 10] == 1)
        assert np.all(ids[img == 20] == 1)
        assert np.all(ids[img == 200] == 2)
        assert np.all(ids[img == 128] == 0)  # unseen level, unassigned policy
        # colorized output agrees pixel-for-pixel through the palette
        from npcontrast.imageio import DEFAULT_PALETTE

        assert np.all(rgba[ids == 0, 3] == 0)
        assert np.all(rgba[ids == 1, :3] == DEFAULT_PALETTE[0])
        assert np.all(rgba[ids == 2, :3] == DEFAULT_PALETTE[1])

    def test_409_before_two_classes(self, client):
        sid = upload(client).json()["id"]
        assert client.get(f"/sessions/{sid}/segmentation").status_code == 409

    def test_bad_format_rejected(self, client):
        sid = upload(client).json()["id"]
        label_fixture_regions(client, sid)
        assert client.get(f"/sessions/{sid}/segmentation", params={"format": "bmp"}).status_code == 422


class TestImageEndpoint:
    def test_u8_roundtrip_is_exact(self, client):
        sid = upload(client).json()["id"]
        resp = client.get(f"/sessions/{sid}/image")
        assert resp.status_code == 200
        served = np.asarray(Image.open(io.BytesIO(resp.content)))
        original = np.asarray(Image.open(FIXTURES / "binary_image.png"))
        assert np.array_equal(served, original)


class TestPersistence:
    def test_snapshots_written(self, tmp_path):
        client = TestClient(create_app(persist_dir=tmp_path))
        sid = upload(client).json()["id"]
        paint(client, sid, [(0, 0)], 1)
        session_dir = tmp_path / sid
        assert (session_dir / "image.png").exists()
        assert (session_dir / "mask.png").exists()
        assert json.loads((session_dir / "settings.json").read_text())["tie_break"] == "lowest"
        assert (session_dir / "revision").read_text() == "1"
