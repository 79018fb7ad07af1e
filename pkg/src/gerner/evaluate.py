"""Entity-level scoring with conlleval semantics and multi-run aggregation."""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conll import Corpus, Sentence, Token, bio_to_spans, iter_rows


class EvalError(ValueError):
    pass


@dataclass
class CategoryScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        found = self.tp + self.fp
        return 100.0 * self.tp / found if found else 0.0

    @property
    def recall(self) -> float:
        gold = self.tp + self.fn
        return 100.0 * self.tp / gold if gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class EvalReport:
    categories: dict[str, CategoryScore] = field(default_factory=dict)
    tokens: int = 0
    correct_tags: int = 0

    @property
    def overall(self) -> CategoryScore:
        total = CategoryScore()
        for c in self.categories.values():
            total.tp += c.tp
            total.fp += c.fp
            total.fn += c.fn
        return total

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct_tags / self.tokens if self.tokens else 0.0

    def format(self) -> str:
        """Text report in the layout of conlleval, then a key=value block."""
        o = self.overall
        lines = [
            f"processed {self.tokens} tokens with {o.tp + o.fn} phrases; "
            f"found: {o.tp + o.fp} phrases; correct: {o.tp}.",
            f"accuracy: {self.accuracy:6.2f}%; precision: {o.precision:6.2f}%; "
            f"recall: {o.recall:6.2f}%; FB1: {o.f1:6.2f}",
        ]
        for name in sorted(self.categories):
            c = self.categories[name]
            lines.append(f"{name:>17}: precision: {c.precision:6.2f}%; recall: {c.recall:6.2f}%; "
                         f"FB1: {c.f1:6.2f}  {c.tp + c.fp}")
        lines.append("")
        lines.extend(f"{k}={v}" for k, v in self.key_values().items())
        return "\n".join(lines) + "\n"

    def key_values(self) -> dict[str, str]:
        o = self.overall
        kv = {"tokens": str(self.tokens), "tp": str(o.tp), "fp": str(o.fp), "fn": str(o.fn),
              "accuracy": f"{self.accuracy:.2f}", "precision": f"{o.precision:.2f}",
              "recall": f"{o.recall:.2f}", "f1": f"{o.f1:.2f}"}
        for name in sorted(self.categories):
            c = self.categories[name]
            kv.update({f"{name}.tp": str(c.tp), f"{name}.fp": str(c.fp), f"{name}.fn": str(c.fn),
                       f"{name}.f1": f"{c.f1:.2f}"})
        return kv


def evaluate_tags(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> EvalReport:
    """Score ``(predicted, gold)`` tag sequences."""
    report = EvalReport()
    cats = report.categories
    for pred, gold in pairs:
        if len(pred) != len(gold):
            raise EvalError("predicted and gold sequences differ in length")
        report.tokens += len(gold)
        report.correct_tags += sum(p == g for p, g in zip(pred, gold))
        p_spans = set(bio_to_spans(pred))
        g_spans = set(bio_to_spans(gold))
        for s in p_spans:
            c = cats.setdefault(s.category, CategoryScore())
            if s in g_spans:
                c.tp += 1
            else:
                c.fp += 1
        for s in g_spans - p_spans:
            cats.setdefault(s.category, CategoryScore()).fn += 1
    return report


def evaluate(pred: Corpus, gold: Corpus) -> EvalReport:
    if len(pred) != len(gold):
        raise EvalError(f"prediction has {len(pred)} sentences, gold has {len(gold)}")
    for i, (p, g) in enumerate(zip(pred.sentences, gold.sentences)):
        if p.forms != g.forms:
            raise EvalError(f"sentence {i} differs between prediction and gold")
    return evaluate_tags((p.tags, g.tags) for p, g in zip(pred.sentences, gold.sentences))


def read_merged(lines) -> tuple[Corpus, Corpus]:
    """Read a conlleval-style file whose last two columns are gold and predicted tags."""
    gold_s, pred_s = [], []
    for block in iter_rows(lines):
        forms, gold, pred = [], [], []
        for lineno, fields in block:
            if len(fields) < 2:
                raise EvalError(f"line {lineno}: need gold and predicted tag columns")
            forms.append(fields[0] if len(fields) > 2 else "_")
            gold.append(fields[-2])
            pred.append(fields[-1])
        base = Sentence(tuple(Token(f) for f in forms))
        gold_s.append(base.with_tags(gold))
        pred_s.append(base.with_tags(pred))
    return Corpus(pred_s), Corpus(gold_s)


@dataclass
class RunAggregate:
    scores: list[float]

    @property
    def mean(self) -> float:
        return statistics.fmean(self.scores)

    @property
    def stdev(self) -> float:
        return statistics.stdev(self.scores) if len(self.scores) > 1 else 0.0

    @property
    def max(self) -> float:
        return max(self.scores)

    def format(self) -> str:
        return (f"runs={len(self.scores)} mean={self.mean:.2f} "
                f"stdev={self.stdev:.2f} max={self.max:.2f}")


def aggregate_runs(reports: Sequence[EvalReport | float]) -> RunAggregate:
    if not reports:
        raise EvalError("no runs to aggregate")
    return RunAggregate([r if isinstance(r, (int, float)) else r.f1 for r in reports])
