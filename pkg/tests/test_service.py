"""Live HTTP tests for the filterlist push service and label intake."""

from __future__ import annotations

import gzip
import json
import threading
import time
import urllib.error
import urllib.request

import numpy as np
import pytest

from newsfilter import jwt_hs256
from newsfilter.filterlist import (
    apply_delta,
    delta_from_json,
    filterlist_from_json,
    filterlist_to_json,
)
from newsfilter.service import ServiceConfig, make_server
from test_filterlist import random_filterlist

SECRET = "test-secret"


@pytest.fixture
def service(tmp_path):
    config = ServiceConfig(
        host="127.0.0.1", port=0, jwt_secret=SECRET,
        quorum_threshold=3, delta_retention=4,
        labels_path=str(tmp_path / "labels.jsonl"),
    )
    server, state = make_server(config)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}", state, config
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def _get(url, headers=None):
    request = urllib.request.Request(url, headers=headers or {})
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, dict(response.headers), response.read()
    except urllib.error.HTTPError as error:
        return error.code, dict(error.headers), error.read()


def _post(url, body, token=None):
    headers = {"Content-Type": "application/json"}
    if token is not None:
        headers["Authorization"] = f"Bearer {token}"
    request = urllib.request.Request(
        url, data=json.dumps(body).encode(), headers=headers, method="POST"
    )
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as error:
        return error.code, json.loads(error.read() or b"{}")


def _token(sub="alice", role="super-user", exp_offset=3600):
    return jwt_hs256.encode(
        {"sub": sub, "role": role, "exp": time.time() + exp_offset}, SECRET
    )


class TestFilterlistEndpoints:
    def test_503_before_any_publish(self, service):
        base, _, _ = service
        status, _, body = _get(f"{base}/v1/filterlist")
        assert status == 503
        assert "error" in json.loads(body)

    def test_full_list_carries_checkpoint(self, service):
        base, state, _ = service
        rng = np.random.default_rng(0)
        state.publish(random_filterlist(rng, 20, checkpoint=5))
        status, _, body = _get(f"{base}/v1/filterlist")
        assert status == 200
        assert json.loads(body)["checkpoint"] == 5

    def test_gzip_negotiation(self, service):
        base, state, _ = service
        rng = np.random.default_rng(1)
        flist = random_filterlist(rng, 50, checkpoint=2)
        state.publish(flist)
        status, headers, body = _get(
            f"{base}/v1/filterlist", headers={"Accept-Encoding": "gzip"}
        )
        assert status == 200
        assert headers.get("Content-Encoding") == "gzip"
        assert filterlist_from_json(gzip.decompress(body).decode()) == flist

    def test_delta_since_current_is_empty(self, service):
        base, state, _ = service
        rng = np.random.default_rng(2)
        state.publish(random_filterlist(rng, 10, checkpoint=3))
        status, _, body = _get(f"{base}/v1/filterlist/delta?since=3")
        assert status == 200
        delta = delta_from_json(body.decode())
        assert delta.empty
        assert delta.from_checkpoint == delta.to_checkpoint == 3

    def test_delta_composition_over_three_publishes(self, service):
        base, state, _ = service
        rng = np.random.default_rng(3)
        pool = [f"s{i:04d}.example.com" for i in range(300)]
        lists = [random_filterlist(rng, 80, checkpoint=c, domain_pool=pool)
                 for c in range(1, 5)]
        for flist in lists:
            state.publish(flist)
        status, _, body = _get(f"{base}/v1/filterlist/delta?since=1")
        assert status == 200
        delta = delta_from_json(body.decode())
        assert apply_delta(lists[0], delta) == lists[-1]

    def test_past_retention_returns_410(self, service):
        base, state, _ = service
        rng = np.random.default_rng(4)
        pool = [f"r{i:04d}.example.com" for i in range(200)]
        for c in range(1, 8):  # retention is 4, checkpoint 1 falls out
            state.publish(random_filterlist(rng, 30, checkpoint=c, domain_pool=pool))
        status, _, body = _get(f"{base}/v1/filterlist/delta?since=1")
        assert status == 410
        assert json.loads(body)["action"] == "full-fetch"

    def test_malformed_since_is_400(self, service):
        base, state, _ = service
        state.publish(random_filterlist(np.random.default_rng(5), 5, checkpoint=1))
        assert _get(f"{base}/v1/filterlist/delta?since=abc")[0] == 400
        assert _get(f"{base}/v1/filterlist/delta?since=-2")[0] == 400
        assert _get(f"{base}/v1/filterlist/delta")[0] == 400

    def test_health_reflects_snapshot(self, service):
        base, state, _ = service
        status, _, body = _get(f"{base}/v1/health")
        doc = json.loads(body)
        assert status == 200
        assert doc["checkpoint"] is None
        state.publish(random_filterlist(np.random.default_rng(6), 12, checkpoint=9))
        doc = json.loads(_get(f"{base}/v1/health")[2])
        assert doc["checkpoint"] == 9
        assert doc["entries"] == 12

    def test_unknown_path_404(self, service):
        base, _, _ = service
        assert _get(f"{base}/v1/nope")[0] == 404


class TestConcurrentPublish:
    def test_readers_always_see_complete_snapshots(self, service):
        base, state, _ = service
        rng = np.random.default_rng(7)
        pool = [f"c{i:04d}.example.com" for i in range(300)]
        published = {}
        for c in range(1, 6):
            published[c] = random_filterlist(rng, 100, checkpoint=c, domain_pool=pool)
        state.publish(published[1])

        stop = threading.Event()
        failures = []

        def reader():
            while not stop.is_set():
                _, _, body = _get(f"{base}/v1/filterlist")
                seen = filterlist_from_json(body.decode())
                expected = published.get(seen.checkpoint)
                if expected is None or seen != expected:
                    failures.append(seen.checkpoint)

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for thread in threads:
            thread.start()
        for c in range(2, 6):
            time.sleep(0.05)
            state.publish(published[c])
        time.sleep(0.05)
        stop.set()
        for thread in threads:
            thread.join(timeout=5)
        assert failures == []


class TestLabelIntake:
    def test_quorum_of_three_appends_one_line(self, service):
        base, _, config = service
        for reporter in ("alice", "bob", "carol"):
            status, doc = _post(f"{base}/v1/labels",
                                {"domain": "x.com", "proposed_label": "fake"},
                                token=_token(sub=reporter))
            assert status == 200
        assert doc["confirmed"] is True
        with open(config.labels_path) as fh:
            lines = [json.loads(line) for line in fh]
        assert len(lines) == 1
        assert lines[0]["domain"] == "x.com"
        assert lines[0]["label"] == "fake"
        assert lines[0]["reporters"] == ["alice", "bob", "carol"]

    def test_duplicate_reporter_counted_once(self, service):
        base, _, config = service
        for _ in range(3):
            status, doc = _post(f"{base}/v1/labels",
                                {"domain": "dup.com", "proposed_label": "fake"},
                                token=_token(sub="alice"))
            assert status == 200
            assert doc["count"] == 1
        assert doc["status"] == "duplicate"
        import os

        assert not os.path.exists(config.labels_path)

    def test_single_reporter_appends_nothing(self, service):
        base, _, config = service
        _post(f"{base}/v1/labels", {"domain": "one.com", "proposed_label": "real"},
              token=_token(sub="zoe"))
        import os

        assert not os.path.exists(config.labels_path)

    def test_expired_token_rejected(self, service):
        base, _, _ = service
        status, doc = _post(f"{base}/v1/labels",
                            {"domain": "x.com", "proposed_label": "fake"},
                            token=_token(exp_offset=-10))
        assert status == 401
        assert "expired" in doc["error"]

    def test_bad_signature_rejected(self, service):
        base, _, _ = service
        bad = jwt_hs256.encode(
            {"sub": "a", "role": "super-user", "exp": time.time() + 100},
            "wrong-secret",
        )
        assert _post(f"{base}/v1/labels",
                     {"domain": "x.com", "proposed_label": "fake"}, token=bad)[0] == 401

    def test_missing_token_rejected(self, service):
        base, _, _ = service
        assert _post(f"{base}/v1/labels",
                     {"domain": "x.com", "proposed_label": "fake"})[0] == 401

    def test_plain_user_role_forbidden(self, service):
        base, _, _ = service
        status, doc = _post(f"{base}/v1/labels",
                            {"domain": "x.com", "proposed_label": "fake"},
                            token=_token(role="user"))
        assert status == 403

    def test_malformed_body_rejected(self, service):
        base, _, _ = service
        assert _post(f"{base}/v1/labels", {"domain": "x.com"},
                     token=_token())[0] == 400
        assert _post(f"{base}/v1/labels",
                     {"domain": "x.com", "proposed_label": "satire"},
                     token=_token())[0] == 400

    def test_token_missing_claims_rejected(self, service):
        base, _, _ = service
        incomplete = jwt_hs256.encode({"sub": "a", "exp": time.time() + 100}, SECRET)
        assert _post(f"{base}/v1/labels",
                     {"domain": "x.com", "proposed_label": "fake"},
                     token=incomplete)[0] == 401

    def test_quorum_separate_per_label(self, service):
        base, _, config = service
        for reporter in ("a", "b"):
            _post(f"{base}/v1/labels", {"domain": "mix.com", "proposed_label": "fake"},
                  token=_token(sub=reporter))
        _post(f"{base}/v1/labels", {"domain": "mix.com", "proposed_label": "real"},
              token=_token(sub="c"))
        import os

        assert not os.path.exists(config.labels_path)


class TestAdminPublish:
    def test_publish_advances_checkpoint(self, service):
        base, _, _ = service
        rng = np.random.default_rng(20)
        flist = random_filterlist(rng, 15, checkpoint=1)
        status, doc = _post(f"{base}/v1/admin/publish",
                            json.loads(filterlist_to_json(flist)), token=_token())
        assert status == 200 and doc["published"] == 1
        status, _, body = _get(f"{base}/v1/filterlist")
        assert filterlist_from_json(body.decode()) == flist

    def test_publish_requires_super_user(self, service):
        base, _, _ = service
        rng = np.random.default_rng(21)
        doc = json.loads(filterlist_to_json(random_filterlist(rng, 5, checkpoint=1)))
        assert _post(f"{base}/v1/admin/publish", doc, token=_token(role="user"))[0] == 403
        assert _post(f"{base}/v1/admin/publish", doc)[0] == 401

    def test_publish_rejects_stale_checkpoint(self, service):
        base, state, _ = service
        rng = np.random.default_rng(22)
        state.publish(random_filterlist(rng, 5, checkpoint=7))
        doc = json.loads(filterlist_to_json(random_filterlist(rng, 5, checkpoint=7)))
        assert _post(f"{base}/v1/admin/publish", doc, token=_token())[0] == 409

    def test_publish_rejects_garbage(self, service):
        base, _, _ = service
        assert _post(f"{base}/v1/admin/publish", {"nope": 1}, token=_token())[0] == 400


class TestJwt:
    def test_round_trip(self):
        claims = {"sub": "x", "role": "super-user", "exp": time.time() + 60}
        decoded = jwt_hs256.decode(jwt_hs256.encode(claims, "s"), "s")
        assert decoded["sub"] == "x"

    def test_tampered_payload_rejected(self):
        token = jwt_hs256.encode(
            {"sub": "x", "role": "user", "exp": time.time() + 60}, "s")
        head, body, sig = token.split(".")
        evil = jwt_hs256.encode(
            {"sub": "x", "role": "super-user", "exp": time.time() + 60}, "s")
        tampered = f"{head}.{evil.split('.')[1]}.{sig}"
        with pytest.raises(jwt_hs256.TokenError):
            jwt_hs256.decode(tampered, "s")

    def test_wrong_algorithm_rejected(self):
        import base64

        header = base64.urlsafe_b64encode(b'{"alg":"none"}').rstrip(b"=").decode()
        with pytest.raises(jwt_hs256.TokenError):
            jwt_hs256.decode(f"{header}.e30.", "s")


class TestServeCommand:
    def test_subprocess_bootstrap_and_shutdown(self, tmp_path):
        import subprocess
        import sys

        rng = np.random.default_rng(30)
        flist = random_filterlist(rng, 25, checkpoint=3)
        list_path = tmp_path / "list.json"
        list_path.write_text(filterlist_to_json(flist))
        config_path = tmp_path / "svc.json"
        config_path.write_text(json.dumps({
            "host": "127.0.0.1", "port": 0, "jwt_secret": "s",
            "labels_path": str(tmp_path / "labels.jsonl"),
            "filterlist_path": str(list_path),
        }))

        proc = subprocess.Popen(
            [sys.executable, "-m", "newsfilter.cli", "serve",
             "--config", str(config_path)],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
        )
        try:
            base = None
            for _ in range(50):
                line = proc.stdout.readline()
                if '"serving"' in line:
                    base = json.loads(line)["serving"]
                    break
            assert base, "service never announced its address"
            status, _, body = _get(f"{base}/v1/filterlist")
            assert status == 200
            assert filterlist_from_json(body.decode()) == flist
            status, _, body = _get(f"{base}/v1/health")
            assert json.loads(body)["checkpoint"] == 3
        finally:
            proc.terminate()
            proc.wait(timeout=10)


class TestConfig:
    def test_from_file(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"port": 1234, "jwt_secret": "s",
                                    "quorum_threshold": 2}))
        config = ServiceConfig.from_file(str(path))
        assert config.port == 1234
        assert config.quorum_threshold == 2
        assert config.delta_retention == 64

    def test_unknown_keys_rejected(self, tmp_path):
        from newsfilter.errors import SchemaError

        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"portt": 1}))
        with pytest.raises(SchemaError):
            ServiceConfig.from_file(str(path))
