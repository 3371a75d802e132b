from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

CLASS_OF_SUFFIX = {"EXID": "ID", "EXNAME": "NAME"}


@dataclass(frozen=True)
class Entity:
    kind: str
    start: int  # first token index
    end: int  # one past the last token index
    surface: str


def decode_entities(tokens: Sequence[str], tags: Sequence[str], text: str | None = None,
                    offsets: Sequence[tuple[int, int]] | None = None) -> list[Entity]:
    """Turn BIO tags into entities; an ``I-X`` without an open ``X`` starts a new one.

    With ``text`` and token ``offsets`` the surface is the original substring,
    otherwise tokens are joined with single spaces.
    """
    if len(tokens) != len(tags):
        raise ValueError("tokens and tags differ in length")
    spans: list[list] = []
    cur = None
    for i, tag in enumerate(tags):
        if tag == "O" or "-" not in tag:
            cur = None
            continue
        prefix, suffix = tag.split("-", 1)
        kind = CLASS_OF_SUFFIX.get(suffix, suffix)
        if prefix == "I" and cur is not None and cur[0] == kind:
            cur[2] = i + 1
        else:
            cur = [kind, i, i + 1]
            spans.append(cur)
    out = []
    for kind, s, e in spans:
        if text is not None and offsets is not None:
            surface = text[offsets[s][0]:offsets[e - 1][1]]
        else:
            surface = " ".join(tokens[s:e])
        out.append(Entity(kind, s, e, surface))
    return out
