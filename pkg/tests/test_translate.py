from __future__ import annotations

import pytest

from pae.errors import FormatError, TranslatorUnavailable
from pae.expansion import back_translate
from pae.translate import CacheTranslator, RemoteTranslator


class TestRemoteTranslator:
    def test_round_trip_over_http(self, scorer_server):
        # the mock echoes "<target>:<text>", so the round trip is novel text
        client = RemoteTranslator(scorer_server.url)
        assert client.translate("is my data sold?", "en", "de") == "de:is my data sold?"
        got = back_translate("is my data sold?", client)
        assert [p.text for p in got] == ["en:de:is my data sold?"]

    def test_unreachable_service(self):
        client = RemoteTranslator("http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(TranslatorUnavailable):
            client.translate("hello", "en", "de")

    def test_missing_text_field(self, scorer_server):
        scorer_server.raw_body = '{"nope": 1}'
        # raw_body hijacks POST responses, including /v1/translate
        client = RemoteTranslator(scorer_server.url)
        with pytest.raises(TranslatorUnavailable):
            client.translate("hello", "en", "de")


class TestCacheTranslator:
    def test_loads_tsv(self, tmp_path):
        path = tmp_path / "cache.tsv"
        path.write_text(
            "# comment line\nen\tde\thello\thallo\nde\ten\thallo\thello there\n",
            encoding="utf-8",
        )
        cache = CacheTranslator(path)
        assert cache.translate("hello", "en", "de") == "hallo"
        assert cache.translate("hallo", "de", "en") == "hello there"

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "cache.tsv"
        path.write_text("en\tde\thello\n", encoding="utf-8")
        with pytest.raises(FormatError):
            CacheTranslator(path)

    def test_miss_without_fallback(self, tmp_path):
        path = tmp_path / "cache.tsv"
        path.write_text("en\tde\thello\thallo\n", encoding="utf-8")
        cache = CacheTranslator(path)
        with pytest.raises(TranslatorUnavailable):
            cache.translate("goodbye", "en", "de")

    def test_fallback_memoized_to_disk(self, tmp_path, scorer_server):
        path = tmp_path / "cache.tsv"
        path.write_text("", encoding="utf-8")
        cache = CacheTranslator(path, fallback=RemoteTranslator(scorer_server.url))
        assert cache.translate("hello", "en", "de") == "de:hello"
        n_requests = len(scorer_server.requests)
        # second call is served from memory, and the row was persisted
        assert cache.translate("hello", "en", "de") == "de:hello"
        assert len(scorer_server.requests) == n_requests
        reloaded = CacheTranslator(path)
        assert reloaded.translate("hello", "en", "de") == "de:hello"
