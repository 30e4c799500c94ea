"""One entry point for every encoding method and variant.

Variant names follow the rows of the solution-count comparison: five per
method, plus an unreduced one-way sort network.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cnf import Formula
from .seqcounter import SeqVariant, encode_seqcounter
from .sortnet import SortVariant, encode_sortnet
from .totalizer import encode_totalizer_atmost, encode_totalizer_equality

METHODS = ("seq", "tree", "sort")

VARIANTS: dict[str, tuple[str, ...]] = {
    "seq": ("plain", "se", "transition", "full", "equality"),
    "tree": ("plain", "sideways", "inequality", "full", "equality"),
    "sort": ("one-way-partial", "one-way-full", "two-way-partial", "two-way-full", "equality",
             "one-way-partial-unreduced"),
}

DEFAULT_VARIANT = {"seq": "plain", "tree": "plain", "sort": "one-way-partial"}


class UnknownEncoding(ValueError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    method: str = "seq"
    variant: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise UnknownEncoding(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.variant:
            object.__setattr__(self, "variant", DEFAULT_VARIANT[self.method])
        if self.variant not in VARIANTS[self.method]:
            raise UnknownEncoding(
                f"unknown {self.method} variant {self.variant!r}; expected one of {VARIANTS[self.method]}")

    @property
    def equality(self) -> bool:
        return self.variant == "equality"

    @property
    def label(self) -> str:
        return f"{self.method}:{self.variant}"

    @classmethod
    def parse(cls, text: str) -> "EncoderConfig":
        method, _, variant = text.partition(":")
        return cls(method, variant)


def all_configs() -> list[EncoderConfig]:
    return [EncoderConfig(m, v) for m in METHODS for v in VARIANTS[m]]


def encode_cardinality(formula: Formula, mains: Sequence[int], r: int,
                       config: EncoderConfig = EncoderConfig()) -> None:
    """Append ``sum(mains) <= r`` (or ``== r`` for the equality variant) to ``formula``."""
    m, v = config.method, config.variant
    if m == "seq":
        variant = {
            "plain": SeqVariant(),
            "se": SeqVariant(strengthen_se=True),
            "transition": SeqVariant(strengthen_transition=True),
            "full": SeqVariant.full(),
            "equality": SeqVariant.exact(),
        }[v]
        encode_seqcounter(formula, mains, r, variant)
    elif m == "tree":
        if v == "equality":
            encode_totalizer_equality(formula, mains, r)
        else:
            encode_totalizer_atmost(formula, mains, r,
                                    sideways=v in ("sideways", "full"),
                                    inequality=v in ("inequality", "full"))
    else:
        reduce = True
        if v == "equality":
            variant = SortVariant("two-way", True, "=")
        else:
            if v.endswith("-unreduced"):
                reduce = False
                v = v[: -len("-unreduced")]
            direction, _, fill = v.rpartition("-")
            variant = SortVariant(direction, fill == "full")
        encode_sortnet(formula, mains, r, variant, reduce=reduce)


def build_constraint(n: int, r: int, config: EncoderConfig = EncoderConfig()) -> Formula:
    """A fresh formula over mains ``1..n`` holding only the cardinality constraint."""
    f = Formula(n)
    encode_cardinality(f, f.mains, r, config)
    return f
