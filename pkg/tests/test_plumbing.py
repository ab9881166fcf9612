"""Seed-stream, HTTP-helper, and assorted edge-path coverage."""

import json
import urllib.error

import pytest

from remask._http import post_json
from remask.corpus import TokenSeq, Vocabulary, load_dataset
from remask.errors import DatasetError, RemoteError
from remask.rng import RngHub, stream


class TestStreams:
    def test_same_name_same_sequence(self):
        a = stream(7, "fill")
        b = stream(7, "fill")
        assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]

    def test_names_are_independent(self):
        fills = [stream(7, "fill").random() for _ in range(3)]
        # drawing from another stream first must not shift this one
        other = stream(7, "plan")
        other.random()
        assert [stream(7, "fill").random() for _ in range(3)] == fills
        assert stream(7, "plan").random() != stream(7, "fill").random()

    def test_seed_changes_sequence(self):
        assert stream(1, "fill").random() != stream(2, "fill").random()

    def test_derivation_is_frozen(self):
        # pinned value: catches accidental changes to the hash derivation,
        # which would silently break recorded reproducibility claims
        assert stream(0, "train").randrange(1_000_000) == 397647

    def test_hub_caches_streams(self):
        hub = RngHub(3)
        first = hub.stream("plan")
        first.random()
        assert hub.stream("plan") is first


class FlakyTransport:
    def __init__(self, failures, response=b'{"ok": true}'):
        self.failures = failures
        self.response = response
        self.calls = 0

    def __call__(self, url, body, headers, timeout):
        self.calls += 1
        if self.calls <= self.failures:
            raise urllib.error.URLError("down")
        return self.response


class TestPostJson:
    def test_success_with_token_header(self):
        seen = {}

        def transport(url, body, headers, timeout):
            seen.update(headers)
            return b'{"x": 1}'

        assert post_json("http://e", {"a": 1}, token="secret", transport=transport) == {"x": 1}
        assert seen["Authorization"] == "Bearer secret"
        assert seen["Content-Type"] == "application/json"

    def test_retries_until_success(self):
        transport = FlakyTransport(failures=2)
        out = post_json("http://e", {}, retries=2, backoff=0.0, transport=transport)
        assert out == {"ok": True}
        assert transport.calls == 3

    def test_gives_up_after_budget(self):
        transport = FlakyTransport(failures=99)
        with pytest.raises(RemoteError, match="after 3 attempts"):
            post_json("http://e", {}, retries=2, backoff=0.0, transport=transport)

    def test_non_json_response_is_error(self):
        transport = FlakyTransport(failures=0, response=b"<html>oops</html>")
        with pytest.raises(RemoteError, match="non-JSON"):
            post_json("http://e", {}, transport=transport)


class TestCorpusEdges:
    def test_tokenseq_length_mismatch(self):
        with pytest.raises(DatasetError):
            TokenSeq(ids=(1, 2), surface=("a",))

    def test_vocabulary_malformed_line(self):
        with pytest.raises(DatasetError, match="line 2"):
            Vocabulary.from_text("[MASK]\t0\nbroken line without tab\n")

    def test_vocabulary_missing_header(self):
        with pytest.raises(DatasetError, match="reserved"):
            Vocabulary.from_text("a\t1\n")

    def test_unknown_dataset_format(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("x")
        with pytest.raises(DatasetError, match="unknown dataset format"):
            load_dataset(path, "parquet")

    def test_pairs_csv_wrong_field_count(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("topic,stance,key_point,argument\nzoos,oppose,x\n")
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(path, "pairs_csv")

    def test_claims_json_bad_stance_names_record(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps(
            {"id": "x", "topic": "t", "stance": "pro",
             "claims": [{"claim": "c", "evidence": []}]}
        ))
        with pytest.raises(DatasetError, match="stance"):
            load_dataset(path, "claims_json")
