"""Voter selection and endogenous characterization.

Voters are the users enlisted to score publishers. The four strategies
differ in who votes (Discussion Supporters, their complement, or everyone)
and in which of their shared articles feed the characterization value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .ingest import Corpus, KnowledgeBase
from .projection import ValidatedNetwork


class StrategyKind(str, Enum):
    DS_URL_NEC = "DS-URL-NEC"
    DS_ALL = "DS-ALL"
    DS_ALL_WO_USR_NEC = "DS-ALL-WO-USR-NEC"
    USERS_ALL = "USERS-ALL"


ALL_STRATEGIES = tuple(StrategyKind)


@dataclass
class VoterProfile:
    user_id: str
    strategy: StrategyKind
    articles: frozenset[str]
    value: float | None
    diet: int


def discussion_supporters(corpus: Corpus, validated: ValidatedNetwork) -> set[str]:
    """Users who shared at least one URL of the validated network."""
    a_val = validated.validated_urls()
    return {user for user, url, _ in corpus.interactions if url in a_val}


def select_voters(
    strategy: StrategyKind, corpus: Corpus, validated: ValidatedNetwork
) -> set[str]:
    ds = discussion_supporters(corpus, validated)
    if strategy in (StrategyKind.DS_URL_NEC, StrategyKind.DS_ALL):
        return ds
    if strategy is StrategyKind.DS_ALL_WO_USR_NEC:
        return corpus.users - ds
    return set(corpus.users)


def article_set(
    voter: str,
    strategy: StrategyKind,
    corpus: Corpus,
    validated: ValidatedNetwork,
) -> set[str]:
    """Articles feeding the voter's characterization under the strategy."""
    shared = corpus.urls_of_user(voter)
    if strategy is StrategyKind.DS_URL_NEC:
        return shared & validated.validated_urls()
    return shared


def characterize(
    voter: str,
    strategy: StrategyKind,
    corpus: Corpus,
    validated: ValidatedNetwork,
    kb: KnowledgeBase,
) -> float | None:
    """Mean trust score over the voter's scored articles, or None.

    Each distinct article counts once; articles from unclassified publishers
    contribute nothing to either side of the mean.
    """
    articles = article_set(voter, strategy, corpus, validated)
    return _mean_score(articles, corpus, kb)


def _mean_score(articles: set[str], corpus: Corpus, kb: KnowledgeBase) -> float | None:
    scores = [
        kb.score(corpus.url_publisher[url])
        for url in articles
        if kb.score(corpus.url_publisher[url]) is not None
    ]
    if not scores:
        return None
    return sum(scores) / len(scores)


def information_diet(corpus: Corpus) -> dict[str, int]:
    """Distinct publishers shared per user, over the whole corpus."""
    pubs: dict[str, set[str]] = {}
    for user, _, publisher in corpus.interactions:
        pubs.setdefault(user, set()).add(publisher)
    return {user: len(p) for user, p in pubs.items()}


def build_voter_profiles(
    strategy: StrategyKind,
    corpus: Corpus,
    validated: ValidatedNetwork,
    kb: KnowledgeBase,
) -> list[VoterProfile]:
    """Profiles for every voter of the strategy, sorted by user id.

    Voters whose article set is empty are dropped; voters whose articles are
    all unclassified keep a profile with value None (they are excluded again
    before classification).
    """
    diets = information_diet(corpus)
    by_user = corpus.user_urls()
    a_val = validated.validated_urls() if strategy is StrategyKind.DS_URL_NEC else None
    profiles = []
    for user in sorted(select_voters(strategy, corpus, validated)):
        shared = by_user.get(user, set())
        articles = shared & a_val if a_val is not None else shared
        if not articles:
            continue
        profiles.append(
            VoterProfile(
                user_id=user,
                strategy=strategy,
                articles=frozenset(articles),
                value=_mean_score(articles, corpus, kb),
                diet=diets.get(user, 0),
            )
        )
    return profiles


def filter_min_publishers(
    voters: list[VoterProfile], theta: int
) -> list[VoterProfile]:
    """Keep voters whose information diet spans at least theta publishers."""
    if theta < 0:
        raise ValueError("theta must be >= 0")
    return [v for v in voters if v.diet >= theta]
