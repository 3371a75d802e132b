"""Token feature templates: context window, orthography, coarse POS, gazetteers."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

from ..gazetteer import load_gazetteers, normalize_exception

_HEX = re.compile(r"0[xX][0-9a-fA-F]+")
_ENDINGS = ("error", "exception", "iteration")


@dataclass(frozen=True)
class FeatureConfig:
    window: int = 2
    use_orthographic: bool = True
    use_gazetteer: bool = True
    use_coarse_pos: bool = True
    gazetteer_paths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.window < 0:
            raise ValueError("window must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def __hash__(self):
        return hash((self.window, self.use_orthographic, self.use_gazetteer,
                     self.use_coarse_pos, tuple(sorted(self.gazetteer_paths.items()))))


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    features: tuple[tuple[str, ...], ...]
    tags: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("empty token sequence")
        if len(self.features) != len(self.tokens):
            raise ValueError("features/tokens length mismatch")
        if self.tags is not None and len(self.tags) != len(self.tokens):
            raise ValueError("tags/tokens length mismatch")

    def __len__(self):
        return len(self.tokens)


def is_hex_literal(tok: str) -> bool:
    return _HEX.fullmatch(tok) is not None


def coarse_pos(tok: str) -> str:
    """Deterministic 8-way coarse part-of-speech class."""
    if not tok:
        return "OTHER"
    if tok.isdigit():
        return "NUM"
    if is_hex_literal(tok):
        return "HEX"
    if not any(c.isalnum() for c in tok):
        return "PUNCT"
    if not tok.isalnum():
        return "SYM"
    if tok.isalpha():
        if tok.isupper() and len(tok) >= 2:
            return "ACRONYM"
        if tok[0].isupper():
            return "CAPWORD"
        if tok.islower():
            return "WORD"
    return "OTHER"


def shape(tok: str) -> str:
    """Collapsed character-class shape, e.g. ``TypeError`` -> ``XxXx``."""
    if is_hex_literal(tok):
        return "0xX+"
    out = []
    for c in tok:
        if c.isdigit():
            s = "d"
        elif c.isalpha():
            s = "X" if c.isupper() else "x"
        else:
            s = c
        if not out or out[-1] != s:
            out.append(s)
    return "".join(out)


def orthographic(tok: str) -> list[str]:
    low = tok.lower()
    feats = []
    if tok.isdigit():
        feats.append("is_all_digits")
    if is_hex_literal(tok):
        feats.append("is_hex_literal")
    if "." in tok:
        feats.append("has_dot")
    if ":" in tok:
        feats.append("has_colon")
    if tok[:1].isupper():
        feats.append("is_capitalized")
    if tok.isupper() and any(c.isalpha() for c in tok):
        feats.append("is_all_caps")
    if len(low) >= 3:
        feats.append("suffix3=" + low[-3:])
    if len(low) >= 4:
        feats.append("suffix4=" + low[-4:])
    for end in _ENDINGS:
        if low.endswith(end):
            feats.append("ends_with_" + end)
    feats.append("shape=" + shape(tok))
    return feats


class FeatureExtractor:
    def __init__(self, config: FeatureConfig | None = None):
        self.config = config or FeatureConfig()
        self.gazetteers = load_gazetteers(self.config.gazetteer_paths) if self.config.use_gazetteer else []

    def _token_features(self, tok: str) -> list[str]:
        cfg = self.config
        feats = []
        if cfg.use_orthographic:
            feats.extend(orthographic(tok))
        if cfg.use_coarse_pos:
            feats.append("pos=" + coarse_pos(tok))
        if self.gazetteers:
            try:
                key = normalize_exception(tok, "NAME")
            except ValueError:
                key = None
            for gaz in self.gazetteers:
                if key in gaz:
                    feats.append("gaz=" + gaz.language)
        return feats

    def __call__(self, tokens: Sequence[str], tags: Sequence[str] | None = None) -> TokenSequence:
        if not tokens:
            raise ValueError("cannot extract features from an empty token list")
        cfg = self.config
        lows = [t.lower() for t in tokens]
        local = [self._token_features(t) for t in tokens]
        n = len(tokens)
        rows = []
        for i in range(n):
            feats = ["bias", "w[0]=" + lows[i]]
            for off in range(1, cfg.window + 1):
                if i - off >= 0:
                    feats.append(f"w[-{off}]={lows[i - off]}")
                if i + off < n:
                    feats.append(f"w[+{off}]={lows[i + off]}")
            feats.extend(local[i])
            if cfg.window:
                if i > 0:
                    feats.extend("[-1]" + f for f in local[i - 1])
                if i + 1 < n:
                    feats.extend("[+1]" + f for f in local[i + 1])
            if i == 0:
                feats.append("BOS")
            if i == n - 1:
                feats.append("EOS")
            rows.append(tuple(dict.fromkeys(feats)))
        return TokenSequence(tuple(tokens), tuple(rows), tuple(tags) if tags is not None else None)


@lru_cache(maxsize=8)
def get_extractor(config: FeatureConfig) -> FeatureExtractor:
    return FeatureExtractor(config)


def extract_features(tokens: Sequence[str], config: FeatureConfig | None = None,
                     tags: Sequence[str] | None = None) -> TokenSequence:
    return get_extractor(config or FeatureConfig())(tokens, tags)
