"""Post parsing, URL/domain normalization, corpus assembly and the trust knowledge base.

Input formats:
  * posts: JSON Lines, one object per line with fields
    ``post_id``, ``user_id``, ``timestamp``, ``urls`` (array), ``kind``
  * knowledge base: CSV ``domain,score`` with a header row; an empty score
    marks the domain as unclassified (UNC)
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable
from urllib.parse import urlsplit

log = logging.getLogger(__name__)

POST_KINDS = ("original", "retweet", "quote", "reply")

#: Post kinds that enter the corpus. Quotes are always excluded: the stance
#: of a quoted URL is ambiguous without reading the added commentary.
DEFAULT_INCLUDE_KINDS = frozenset({"original", "retweet", "reply"})

# Minimal multi-part suffix table for the optional eTLD+1 reduction.
# Deliberately small and embedded: the default pipeline never uses it.
_COMMON_MULTIPART_SUFFIXES = frozenset({
    "co.uk", "org.uk", "ac.uk", "gov.uk", "co.jp", "ne.jp", "or.jp",
    "com.au", "net.au", "org.au", "com.br", "com.cn", "com.mx", "co.in",
    "co.nz", "co.za", "com.ar", "com.tr",
})


class Label(str, Enum):
    """Trust label derived from a knowledge-base score."""

    T = "T"
    N = "N"
    UNC = "UNC"


@dataclass(frozen=True)
class RawPost:
    post_id: str
    user_id: str
    timestamp: float
    urls: tuple[str, ...]
    kind: str


class KnowledgeBaseError(ValueError):
    """Raised for fatally malformed knowledge-base files."""


@dataclass
class KnowledgeBase:
    """Domain -> trust score map. Domains absent from ``scores`` are UNC."""

    scores: dict[str, int] = field(default_factory=dict)

    def score(self, domain: str) -> int | None:
        return self.scores.get(domain)

    def label(self, domain: str) -> Label:
        score = self.scores.get(domain)
        if score is None:
            return Label.UNC
        return Label.T if score >= 60 else Label.N

    def __contains__(self, domain: str) -> bool:
        return domain in self.scores


@dataclass
class Corpus:
    """Deduplicated user-URL-publisher interactions plus raw share events.

    ``interactions`` is a set of (user_id, url, publisher) triples, one per
    distinct (user, url) pair. ``share_events`` keeps post multiplicity for
    auditing: a list of (user_id, url, post_id).
    """

    interactions: set[tuple[str, str, str]]
    share_events: list[tuple[str, str, str]]
    url_publisher: dict[str, str]
    skipped_urls: int = 0

    @property
    def users(self) -> set[str]:
        return {u for u, _, _ in self.interactions}

    @property
    def articles(self) -> set[str]:
        return set(self.url_publisher)

    @property
    def publishers(self) -> set[str]:
        return set(self.url_publisher.values())

    def urls_of_user(self, user_id: str) -> set[str]:
        return {url for u, url, _ in self.interactions if u == user_id}

    def user_urls(self) -> dict[str, set[str]]:
        """All interactions grouped by user."""
        by_user: dict[str, set[str]] = {}
        for user, url, _ in self.interactions:
            by_user.setdefault(user, set()).add(url)
        return by_user

    def publisher_labels(self, kb: KnowledgeBase) -> dict[str, Label]:
        return {p: kb.label(p) for p in self.publishers}


def extract_domain(url: str, reduce_to_etld1: bool = False) -> str | None:
    """Publisher domain of an absolute URL, or None if the URL has no host.

    Lowercases the host, strips one leading ``www.`` and any port. The
    optional eTLD+1 reduction keeps the registrable part only (heuristic,
    table-driven; off by default).
    """
    try:
        parts = urlsplit(url)
    except ValueError:
        return None
    host = parts.hostname
    if not parts.scheme or not host:
        return None
    host = host.lower().strip(".")
    if host.startswith("www."):
        host = host[len("www."):]
    if not host:
        return None
    if reduce_to_etld1:
        labels = host.split(".")
        if len(labels) > 2:
            tail2 = ".".join(labels[-2:])
            keep = 3 if tail2 in _COMMON_MULTIPART_SUFFIXES else 2
            host = ".".join(labels[-keep:])
    return host


def canonical_url(url: str, reduce_to_etld1: bool = False) -> str | None:
    """Canonical article identity: scheme + normalized host + path.

    Query string, fragment and port are dropped; the host is normalized
    exactly like :func:`extract_domain`.
    """
    domain = extract_domain(url, reduce_to_etld1=reduce_to_etld1)
    if domain is None:
        return None
    path = urlsplit(url).path
    scheme = urlsplit(url).scheme.lower()
    return f"{scheme}://{domain}{path}"


def _parse_post(obj: object) -> RawPost | None:
    if not isinstance(obj, dict):
        return None
    post_id = obj.get("post_id")
    user_id = obj.get("user_id")
    timestamp = obj.get("timestamp")
    urls = obj.get("urls")
    kind = obj.get("kind")
    if not isinstance(post_id, str) or not post_id:
        return None
    if not isinstance(user_id, str) or not user_id:
        return None
    if not isinstance(timestamp, (int, float)) or isinstance(timestamp, bool):
        return None
    if not isinstance(urls, list) or not all(isinstance(u, str) for u in urls):
        return None
    if kind not in POST_KINDS:
        return None
    # URLs that do not parse as scheme+host are dropped here so every
    # retained RawPost satisfies the parseability invariant.
    kept = tuple(u for u in urls if extract_domain(u) is not None)
    return RawPost(post_id, user_id, float(timestamp), kept, kind)


def load_posts(path: str | Path) -> tuple[list[RawPost], int]:
    """Read a JSON Lines posts file.

    Returns (posts, n_malformed). Malformed lines (bad JSON, missing or
    mistyped fields, duplicate post_id) are skipped and counted; an
    unreadable file raises OSError.
    """
    posts: list[RawPost] = []
    seen_ids: set[str] = set()
    malformed = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                malformed += 1
                log.warning("%s:%d: unparseable record skipped", path, lineno)
                continue
            post = _parse_post(obj)
            if post is None or post.post_id in seen_ids:
                malformed += 1
                log.warning("%s:%d: malformed or duplicate record skipped", path, lineno)
                continue
            seen_ids.add(post.post_id)
            posts.append(post)
    if malformed:
        log.warning("%s: skipped %d malformed records", path, malformed)
    return posts, malformed


def build_corpus(
    posts: Iterable[RawPost],
    include_kinds: Iterable[str] = DEFAULT_INCLUDE_KINDS,
    reduce_to_etld1: bool = False,
) -> Corpus:
    """Assemble the interaction corpus from parsed posts.

    Interactions are deduplicated on (user, url); share events keep post
    multiplicity. Quote posts never contribute, regardless of
    ``include_kinds``.
    """
    kinds = set(include_kinds) - {"quote"}
    interactions: set[tuple[str, str, str]] = set()
    share_events: list[tuple[str, str, str]] = []
    url_publisher: dict[str, str] = {}
    skipped = 0
    for post in posts:
        if post.kind not in kinds:
            continue
        for raw_url in post.urls:
            url = canonical_url(raw_url, reduce_to_etld1=reduce_to_etld1)
            domain = extract_domain(raw_url, reduce_to_etld1=reduce_to_etld1)
            if url is None or domain is None:
                skipped += 1
                continue
            url_publisher[url] = domain
            interactions.add((post.user_id, url, domain))
            share_events.append((post.user_id, url, post.post_id))
    return Corpus(
        interactions=interactions,
        share_events=share_events,
        url_publisher=url_publisher,
        skipped_urls=skipped,
    )


def load_knowledge_base(path: str | Path) -> KnowledgeBase:
    """Read the ``domain,score`` CSV (header required, empty score = UNC).

    A score outside 0..100 or a non-integer score is fatal and reports the
    line number. Duplicate domains resolve last-wins with a warning.
    """
    kb = KnowledgeBase()
    unclassified: set[str] = set()
    duplicates = Counter()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["domain", "score"]:
            raise KnowledgeBaseError(f"{path}: expected header 'domain,score'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 1 or not row[0].strip():
                raise KnowledgeBaseError(f"{path}:{lineno}: missing domain")
            domain = row[0].strip().lower()
            if domain.startswith("www."):
                domain = domain[len("www."):]
            raw_score = row[1].strip() if len(row) > 1 else ""
            if domain in kb.scores or domain in unclassified:
                duplicates[domain] += 1
            if not raw_score:
                unclassified.add(domain)
                kb.scores.pop(domain, None)
                continue
            try:
                score = int(raw_score)
            except ValueError as exc:
                raise KnowledgeBaseError(
                    f"{path}:{lineno}: score {raw_score!r} is not an integer"
                ) from exc
            if not 0 <= score <= 100:
                raise KnowledgeBaseError(
                    f"{path}:{lineno}: score {score} outside [0, 100]"
                )
            unclassified.discard(domain)
            kb.scores[domain] = score
    for domain, n in sorted(duplicates.items()):
        log.warning("%s: domain %s appeared %d extra times; last row wins", path, domain, n)
    return kb


def url_labels(corpus: Corpus, kb: KnowledgeBase) -> dict[str, Label]:
    """Trust label of every corpus article, inherited from its publisher."""
    return {url: kb.label(pub) for url, pub in corpus.url_publisher.items()}
