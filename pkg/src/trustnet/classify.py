"""Publisher scoring, coverage accounting, and the depth-one tree classifier."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field

from .ingest import Corpus, KnowledgeBase, Label
from .voters import VoterProfile


@dataclass
class PublisherScore:
    domain: str
    score: float
    n_voters: int
    kb_label: Label


@dataclass
class CoverageReport:
    """Distinct publishers reached by the voter set, split by trust label."""

    covered: dict[Label, int]
    universe: dict[Label, int]

    @property
    def total_covered(self) -> int:
        return sum(self.covered.values())

    def percentage(self, level: Label) -> float:
        if self.universe[level] == 0:
            return 0.0
        return 100.0 * self.covered[level] / self.universe[level]


@dataclass(frozen=True)
class Stump:
    """Single-threshold classifier: scores on one side predict T."""

    threshold: float
    high_is_trustworthy: bool

    def predict(self, score: float) -> Label:
        high = score >= self.threshold
        if high == self.high_is_trustworthy:
            return Label.T
        return Label.N


@dataclass
class FoldResult:
    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def balanced_accuracy(self) -> float:
        tpr = self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0
        tnr = self.tn / (self.tn + self.fp) if self.tn + self.fp else 0.0
        return (tpr + tnr) / 2.0


@dataclass
class CvReport:
    folds: int
    results: list[FoldResult] = field(default_factory=list)
    baseline: float = 0.5

    @property
    def balanced_accuracies(self) -> list[float]:
        return [r.balanced_accuracy for r in self.results]

    @property
    def mean_balanced_accuracy(self) -> float:
        accs = self.balanced_accuracies
        return sum(accs) / len(accs)

    @property
    def std_balanced_accuracy(self) -> float:
        accs = self.balanced_accuracies
        mean = self.mean_balanced_accuracy
        return (sum((a - mean) ** 2 for a in accs) / len(accs)) ** 0.5


def publisher_scores(
    voters: list[VoterProfile],
    corpus: Corpus,
    kb: KnowledgeBase,
    exclude_self_votes: bool = False,
) -> list[PublisherScore]:
    """Mean voter value per publisher, one unweighted vote per voter.

    A voter votes on every publisher they shared at least one corpus article
    of, independent of the strategy that produced their value. Voters without
    a defined value are ignored; publishers nobody votes on are omitted.

    With ``exclude_self_votes`` the value a voter contributes to publisher p
    is recomputed without p's own articles, so a publisher's score never
    feeds on its own trust score; voters left without scored articles by the
    exclusion skip that vote.
    """
    by_user = corpus.user_urls()
    votes: dict[str, list[float]] = defaultdict(list)
    for voter in voters:
        if voter.value is None:
            continue
        touched = {corpus.url_publisher[url] for url in by_user.get(voter.user_id, ())}
        for publisher in touched:
            value = voter.value
            if exclude_self_votes:
                value = _value_without(voter, publisher, corpus, kb)
                if value is None:
                    continue
            votes[publisher].append(value)
    return [
        PublisherScore(
            domain=pub,
            score=sum(vals) / len(vals),
            n_voters=len(vals),
            kb_label=kb.label(pub),
        )
        for pub, vals in sorted(votes.items())
    ]


def _value_without(
    voter: VoterProfile, publisher: str, corpus: Corpus, kb: KnowledgeBase
) -> float | None:
    scores = [
        kb.score(corpus.url_publisher[url])
        for url in voter.articles
        if corpus.url_publisher[url] != publisher
        and kb.score(corpus.url_publisher[url]) is not None
    ]
    if not scores:
        return None
    return sum(scores) / len(scores)


def coverage(
    voters: list[VoterProfile], corpus: Corpus, kb: KnowledgeBase
) -> CoverageReport:
    """Publisher coverage of the voter set, against the corpus universe."""
    voter_ids = {v.user_id for v in voters}
    reached: set[str] = set()
    for user, _, publisher in corpus.interactions:
        if user in voter_ids:
            reached.add(publisher)
    covered = {level: 0 for level in Label}
    universe = {level: 0 for level in Label}
    for publisher in corpus.publishers:
        level = kb.label(publisher)
        universe[level] += 1
        if publisher in reached:
            covered[level] += 1
    return CoverageReport(covered=covered, universe=universe)


def fit_stump(samples: list[tuple[float, Label]]) -> Stump:
    """Best single split by weighted Gini impurity.

    Candidate thresholds are midpoints of consecutive distinct sorted scores;
    ties resolve to the smallest threshold. With a single distinct score
    there is nothing to separate: the threshold sits at that score and the
    side polarity follows the overall majority.
    """
    if not samples:
        raise ValueError("no samples")
    labels = {label for _, label in samples}
    if labels - {Label.T, Label.N}:
        raise ValueError("samples must be labeled T or N")
    if len(labels) < 2:
        raise ValueError("both classes must be present")
    scores = sorted({s for s, _ in samples})
    if len(scores) == 1:
        n_t = sum(1 for _, l in samples if l is Label.T)
        return Stump(threshold=scores[0], high_is_trustworthy=n_t * 2 >= len(samples))
    candidates = [(a + b) / 2.0 for a, b in zip(scores, scores[1:])]
    best_t = None
    best_gini = float("inf")
    n = len(samples)
    for t in candidates:
        left = [l for s, l in samples if s < t]
        right = [l for s, l in samples if s >= t]
        gini = (len(left) * _gini(left) + len(right) * _gini(right)) / n
        if gini < best_gini - 1e-12:
            best_gini = gini
            best_t = t
    assert best_t is not None
    right = [l for s, l in samples if s >= best_t]
    left = [l for s, l in samples if s < best_t]
    high_t = sum(1 for l in right if l is Label.T)
    high_n = len(right) - high_t
    if high_t != high_n:
        high_is_t = high_t > high_n
    else:
        # right side tied: let the left side's majority decide the other pole
        left_t = sum(1 for l in left if l is Label.T)
        high_is_t = left_t * 2 <= len(left)
    return Stump(threshold=best_t, high_is_trustworthy=high_is_t)


def _gini(labels: list[Label]) -> float:
    if not labels:
        return 0.0
    f_t = sum(1 for l in labels if l is Label.T) / len(labels)
    return 1.0 - f_t * f_t - (1.0 - f_t) * (1.0 - f_t)


def stratified_folds(
    samples: list[tuple[float, Label]], folds: int, seed: int
) -> list[list[int]]:
    """Deterministic stratified fold assignment (indices per fold)."""
    rng = random.Random(seed)
    by_label: dict[Label, list[int]] = defaultdict(list)
    for i, (_, label) in enumerate(samples):
        by_label[label].append(i)
    fold_indices: list[list[int]] = [[] for _ in range(folds)]
    for label in sorted(by_label, key=lambda l: l.value):
        idx = by_label[label][:]
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            fold_indices[pos % folds].append(i)
    return fold_indices


def stratified_cv(
    samples: list[tuple[float, Label]], folds: int = 10, seed: int = 0
) -> CvReport:
    """Stratified k-fold evaluation of the stump; folds shrink to the
    minority class count when needed."""
    n_t = sum(1 for _, l in samples if l is Label.T)
    n_n = len(samples) - n_t
    minority = min(n_t, n_n)
    if minority < 2:
        raise ValueError("each class needs at least 2 samples")
    folds = min(folds, minority)
    report = CvReport(folds=folds)
    assignment = stratified_folds(samples, folds, seed)
    for f in range(folds):
        test_idx = set(assignment[f])
        train = [s for i, s in enumerate(samples) if i not in test_idx]
        test = [s for i, s in enumerate(samples) if i in test_idx]
        stump = fit_stump(train)
        tp = fn = tn = fp = 0
        for score, label in test:
            pred = stump.predict(score)
            if label is Label.T:
                if pred is Label.T:
                    tp += 1
                else:
                    fn += 1
            else:
                if pred is Label.N:
                    tn += 1
                else:
                    fp += 1
        report.results.append(FoldResult(tp=tp, fn=fn, tn=tn, fp=fp))
    return report


@dataclass
class WorthyEntry:
    domain: str
    score: float
    n_voters: int
    predicted: Label | None


def worthy_list(scores: list[PublisherScore], kb: KnowledgeBase) -> list[WorthyEntry]:
    """Unclassified publishers ranked for annotation priority.

    Most-voted first, then lowest score first; predictions come from a stump
    fit on all labeled publishers (None if a stump cannot be fit).
    """
    labeled = [(s.score, s.kb_label) for s in scores if s.kb_label is not Label.UNC]
    stump: Stump | None
    try:
        stump = fit_stump(labeled)
    except ValueError:
        stump = None
    entries = [
        WorthyEntry(
            domain=s.domain,
            score=s.score,
            n_voters=s.n_voters,
            predicted=stump.predict(s.score) if stump else None,
        )
        for s in scores
        if s.kb_label is Label.UNC
    ]
    entries.sort(key=lambda e: (-e.n_voters, e.score, e.domain))
    return entries
