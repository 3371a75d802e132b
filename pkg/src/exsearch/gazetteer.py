"""Per-language exception-name lists and exception-key normalization."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

LANGUAGES = ("java", "csharp", "python")


def _strip_punct(s: str) -> str:
    i, j = 0, len(s)
    while i < j and not (s[i].isalnum() or s[i] == "_"):
        i += 1
    while j > i and not (s[j - 1].isalnum() or s[j - 1] == "_"):
        j -= 1
    return s[i:j]


def normalize_exception(surface: str, kind: str = "NAME") -> str:
    """Grouping key for an exception surface.

    Lowercases and strips surrounding punctuation; NAME surfaces are further
    reduced to their last dotted segment (``java.io.IOException`` ->
    ``ioexception``).
    """
    key = _strip_punct(surface.lower())
    if kind == "NAME" and "." in key:
        key = _strip_punct(key.rsplit(".", 1)[1])
    if not key:
        raise ValueError(f"exception surface {surface!r} is empty after normalization")
    return key


def qualified_key(surface: str) -> str:
    """Lowercased, punctuation-stripped full form (keeps the namespace)."""
    return _strip_punct(surface.lower())


@dataclass(frozen=True)
class PlGazetteer:
    language: str
    exception_names: frozenset[str]
    qualified_names: frozenset[str] = frozenset()

    @classmethod
    def from_lines(cls, language: str, lines: Iterable[str]) -> "PlGazetteer":
        short, qualified = set(), set()
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            short.add(normalize_exception(line, "NAME"))
            if "." in line:
                qualified.add(qualified_key(line))
        return cls(language, frozenset(short), frozenset(qualified))

    @classmethod
    def load(cls, language: str, path: str | Path) -> "PlGazetteer":
        return cls.from_lines(language, Path(path).read_text(encoding="utf-8").splitlines())

    def __contains__(self, key: str) -> bool:
        return key in self.exception_names


def default_gazetteer_path(language: str) -> Path:
    return Path(str(resources.files("exsearch") / "data" / f"{language}_exceptions.txt"))


def load_gazetteers(paths: dict[str, str] | None = None) -> list[PlGazetteer]:
    """Load the three language lists in fixed java, csharp, python order.

    ``paths`` may override any language; missing entries use the bundled lists.
    """
    paths = paths or {}
    out = []
    for lang in LANGUAGES:
        p = paths.get(lang) or default_gazetteer_path(lang)
        out.append(PlGazetteer.load(lang, p))
    return out
