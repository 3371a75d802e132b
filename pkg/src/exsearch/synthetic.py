"""Seeded synthetic data: a labeled query corpus and raw search logs.

Real search logs are proprietary; these generators produce data with the
same shape so every stage can run end to end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .logs import ClickEvent, SearchRecord
from .weak_labels import LabeledSequence
from .logs import tokenize

JAVA_NAMES = [
    "java.io.IOException", "java.lang.NullPointerException", "NullPointerException",
    "java.lang.ClassNotFoundException", "ClassCastException", "java.lang.OutOfMemoryError",
    "ArrayIndexOutOfBoundsException", "java.util.ConcurrentModificationException",
    "java.lang.RuntimeException", "java.net.SocketTimeoutException", "NoClassDefFoundError",
    "java.lang.TypeNotPresentException", "java.lang.StackOverflowError", "IllegalArgumentException",
]
CSHARP_NAMES = [
    "System.NullReferenceException", "NullReferenceException", "System.IO.FileNotFoundException",
    "System.InvalidOperationException", "InvalidCastException", "System.ArgumentNullException",
    "ObjectDisposedException", "System.UnauthorizedAccessException", "IndexOutOfRangeException",
    "System.Data.SqlClient.SqlException", "TargetInvocationException",
]
PYTHON_NAMES = [
    "TypeError", "ImportError", "ModuleNotFoundError", "KeyError", "ValueError", "AttributeError",
    "IndexError", "SyntaxError", "UnicodeDecodeError", "RecursionError", "ZeroDivisionError",
    "FileNotFoundError", "NameError",
]
ID_CODES = [
    "404", "500", "403", "502", "503", "401", "0x800A03EC", "0x80070005", "0x80004005",
    "0xc000007b", "LNK1189", "CS1061", "CS0246", "C2065", "LNK2019", "2006", "1045", "10061",
    "1603", "1304", "43", "1722", "0x80070643",
]
HTTP_CODES = ["404", "500", "403", "502", "503", "401"]

LANG_WORDS = {"java": "java", "csharp": "c#", "python": "python"}
PRODUCTS = ["office", "excel", "windows 10", "outlook", "mysql", "sql server", "visual studio",
            "itunes", "xbox", "chrome", "steam", "docker", "npm", "git"]
CONTEXTS = ["when opening file", "at startup", "after update", "on install", "in loop",
            "cannot import name", "while saving", "fix", "solution", "how to fix",
            "at line 12", "during build", "when connecting to server", "in jupyter"]
PATHS = ["/nbextensions/widgets/notebook/js/extension.js", "/api/v1/users", "/static/app.css",
         "/favicon.ico", "/wp-admin/index.php"]
NEUTRAL = [
    "pizza near me", "weather seattle", "how to bake bread", "best laptop 2019", "cheap flights",
    "python list comprehension", "java tutorial", "c# linq group by", "movie times", "nfl scores",
    "how to reverse a string in python", "visual studio download", "git rebase vs merge",
    "convert string to int java", "office 2016 product key", "windows 10 update size",
    "excel vlookup", "sql server management studio", "docker compose example", "npm install",
    "segfault 11", "sunday 3pm schedule", "route 66 map", "iphone 11 price",
]
NOISE_QUERIES = ["cyberterror facts", "office 2016 error", "spelling error checker",
                 "human error quotes", "exception to the rule meaning"]

DOMAINS = {
    "java": ["https://stackoverflow.com/questions/{n}", "https://docs.oracle.com/javase/8/docs/api/{n}",
             "https://www.baeldung.com/java-{n}", "https://github.com/issues/{n}"],
    "csharp": ["https://stackoverflow.com/questions/{n}", "https://docs.microsoft.com/en-us/dotnet/{n}",
               "https://social.msdn.microsoft.com/forums/{n}", "https://www.codeproject.com/q/{n}"],
    "python": ["https://stackoverflow.com/questions/{n}", "https://docs.python.org/3/library/{n}",
               "https://github.com/issues/{n}", "https://www.geeksforgeeks.org/python-{n}"],
    "id": ["https://stackoverflow.com/questions/{n}", "https://support.microsoft.com/kb/{n}",
           "https://answers.microsoft.com/thread/{n}", "https://www.reddit.com/r/techsupport/{n}"],
    "other": ["https://www.yelp.com/biz/{n}", "https://en.wikipedia.org/wiki/{n}",
              "https://www.youtube.com/watch?v={n}", "https://www.amazon.com/dp/{n}"],
}


def _bio(text: str, spans: list[tuple[int, int, str]]) -> tuple[tuple[str, ...], tuple[str, ...]]:
    toks = tokenize(text, "feature")
    tags = []
    for t in toks:
        tag = "O"
        for s, e, kind in spans:
            if t.start < e and t.end > s:
                suffix = "EXID" if kind == "ID" else "EXNAME"
                first = not any(u.start < e and u.end > s for u in toks if u.end <= t.start)
                tag = ("B-" if first else "I-") + suffix
                break
        tags.append(tag)
    return tuple(t.text for t in toks), tuple(tags)


@dataclass
class _Query:
    text: str
    spans: list  # (start, end, kind)
    language: str | None
    category: str  # java/csharp/python/id/other


class _Builder:
    def __init__(self):
        self.parts: list[str] = []
        self.spans: list[tuple[int, int, str]] = []
        self.pos = 0

    def add(self, s: str, kind: str | None = None):
        if self.parts:
            self.parts.append(" ")
            self.pos += 1
        if kind:
            self.spans.append((self.pos, self.pos + len(s), kind))
        self.parts.append(s)
        self.pos += len(s)
        return self

    def glue(self, s: str):
        self.parts.append(s)
        self.pos += len(s)
        return self

    def text(self) -> str:
        return "".join(self.parts)


def _zipf_choice(rng: random.Random, items: list, s: float = 1.1):
    weights = [1.0 / (i + 1) ** s for i in range(len(items))]
    return rng.choices(items, weights)[0]


def exception_query(rng: random.Random, zipf: bool = False) -> _Query:
    pick = _zipf_choice if zipf else (lambda r, xs: r.choice(xs))
    roll = rng.random()
    if roll < 0.55:
        lang = rng.choice(["java", "csharp", "python"])
        names = {"java": JAVA_NAMES, "csharp": CSHARP_NAMES, "python": PYTHON_NAMES}[lang]
        name = pick(rng, names)
        b = _Builder()
        form = rng.randrange(7)
        if form == 0:
            b.add(LANG_WORDS[lang]).add(name, "NAME").glue(":").add(rng.choice(CONTEXTS))
        elif form == 1:
            b.add(name, "NAME").add(rng.choice(CONTEXTS))
        elif form == 2:
            b.add("how to fix").add(name, "NAME").add("in").add(LANG_WORDS[lang])
        elif form == 3:
            b.add("exception").add(name, "NAME").add(rng.choice(CONTEXTS))
        elif form == 4:
            b.add(name, "NAME").glue(":").add(rng.choice(["type", "message", "cannot find symbol"]))
        elif form == 5:
            other = rng.choice(names)
            b.add(name, "NAME").add("caused by").add(other, "NAME")
        else:
            b.add(rng.choice(["unhandled", "uncaught", "error"])).add(name, "NAME")
        with_kw = form in (0, 2)
        return _Query(b.text(), b.spans, lang if with_kw or rng.random() < 0.5 else None, lang)
    code = pick(rng, ID_CODES)
    b = _Builder()
    form = rng.randrange(6)
    if form == 0:
        b.add("error").add(code, "ID").add(rng.choice(CONTEXTS))
    elif form == 1:
        b.add(rng.choice(PRODUCTS)).add("error").add(code, "ID")
    elif form == 2:
        b.add(code, "ID").add(rng.choice(PRODUCTS)).add("error")
    elif form == 3 and code in HTTP_CODES:
        b.add(code, "ID").add("GET").add(rng.choice(PATHS))
    elif form == 4:
        b.add("errno").add(code, "ID").add(rng.choice(CONTEXTS))
    else:
        b.add(rng.choice(PRODUCTS)).add(code, "ID").add(rng.choice(["error", "exception", "error code"]))
    return _Query(b.text(), b.spans, None, "id")


def neutral_query(rng: random.Random) -> _Query:
    if rng.random() < 0.15:
        return _Query(rng.choice(NOISE_QUERIES), [], None, "other")
    return _Query(rng.choice(NEUTRAL), [], None, "other")


def synthetic_corpus(n: int = 2000, seed: int = 0, positive_fraction: float = 0.5) -> list[LabeledSequence]:
    """Gold-tagged query corpus: exception queries mixed with ordinary ones."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        q = exception_query(rng) if rng.random() < positive_fraction else neutral_query(rng)
        tokens, tags = _bio(q.text, q.spans)
        out.append(LabeledSequence(f"s{i:06d}", tokens, tags))
    return out


def synthetic_logs(n_records: int = 5000, n_clients: int | None = None, seed: int = 0,
                   exception_fraction: float = 0.6) -> list[SearchRecord]:
    """Raw search-log records from simulated client sessions.

    Exception identities follow a Zipf-like law so a handful of them recur
    across many sessions. A few records break locale, region, ASCII, or
    click requirements so filtering has something to do.
    """
    rng = random.Random(seed)
    n_clients = n_clients or max(1, n_records // 8)
    records = []
    clock = {c: rng.randrange(0, 86400) for c in range(n_clients)}
    for i in range(n_records):
        c = rng.randrange(n_clients)
        clock[c] += rng.choice([20, 60, 300, 900, 1700, 2000, 7200])
        if rng.random() < exception_fraction:
            q = exception_query(rng, zipf=True)
        else:
            q = neutral_query(rng)
        text = q.text
        locale, region = "en-US", "US"
        r = rng.random()
        if r < 0.03:
            locale, region = "de-DE", "DE"
        elif r < 0.05:
            region = "GB"
        elif r < 0.06:
            text = text + " café"
        cat = q.category if q.category in DOMAINS else "other"
        result_urls = [u.format(n=rng.randrange(10**6)) for u in DOMAINS[cat]]
        if q.language == "python" and "python" not in text:
            result_urls[0] = "https://docs.python.org/3/tutorial/errors.html"
        n_clicks = 0 if rng.random() < 0.1 else rng.choice([1, 1, 1, 2, 2, 3])
        clicked = rng.sample(result_urls, n_clicks)
        clicks = tuple(
            ClickEvent(url, k + 1, float(round(rng.expovariate(1 / 90.0), 1)))
            for k, url in enumerate(clicked)
        )
        records.append(SearchRecord(
            record_id=f"r{i:08d}", client_id=f"c{c:06d}", timestamp=clock[c], raw_query=text,
            locale=locale, region=region, result_urls=tuple(result_urls), clicks=clicks,
        ))
    return records
