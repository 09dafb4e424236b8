"""Translation clients for back-translation.

The wire protocol is a single POST with {text, source_lang, target_lang}
returning {text}. An offline tab-separated cache file (source_lang,
target_lang, input, output) serves fixtures and tests; the cache can wrap a
remote client and memoize its answers.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

import requests

from pae.errors import FormatError, TranslatorUnavailable


class Translator(Protocol):
    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class RemoteTranslator:
    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        try:
            resp = requests.post(
                f"{self.base_url}/v1/translate",
                json={"text": text, "source_lang": source_lang, "target_lang": target_lang},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise TranslatorUnavailable(f"translation service failed: {exc}") from exc
        except ValueError as exc:
            raise TranslatorUnavailable("translation service returned non-JSON") from exc
        if not isinstance(payload, dict) or "text" not in payload:
            raise TranslatorUnavailable("translation response missing 'text'")
        return str(payload["text"])


class CacheTranslator:
    """Translator backed by a TSV cache, optionally delegating on miss.

    Cache rows: source_lang <TAB> target_lang <TAB> input <TAB> output.
    Without a fallback client, a cache miss raises TranslatorUnavailable.
    """

    def __init__(self, path: str | Path | None = None, fallback: Translator | None = None):
        self.path = Path(path) if path is not None else None
        self.fallback = fallback
        self._cache: dict[tuple[str, str, str], str] = {}
        if self.path is not None and self.path.exists():
            self._load(self.path)

    def _load(self, path: Path) -> None:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise FormatError(
                        "expected 4 tab-separated fields", line=lineno, path=str(path)
                    )
                src, tgt, text, out = parts
                self._cache[(src, tgt, text)] = out

    def put(self, text: str, source_lang: str, target_lang: str, output: str) -> None:
        self._cache[(source_lang, target_lang, text)] = output

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        key = (source_lang, target_lang, text)
        if key in self._cache:
            return self._cache[key]
        if self.fallback is None:
            raise TranslatorUnavailable(
                f"no cached translation for {source_lang}->{target_lang} and no remote client"
            )
        out = self.fallback.translate(text, source_lang, target_lang)
        self._cache[key] = out
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(f"{source_lang}\t{target_lang}\t{text}\t{out}\n")
        return out
