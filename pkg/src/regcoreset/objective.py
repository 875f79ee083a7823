"""Objective descriptions for ||Ax - b||_p^r + lam * ||x||_q^s."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# family -> (p, q, r, s); None entries are filled from the p argument.
_FAMILIES = {
    "lp_lp": (None, None, None, None),
    "ridge": (2.0, 2.0, 2.0, 2.0),
    "lasso": (2.0, 1.0, 2.0, 1.0),
    "modified_lasso": (2.0, 1.0, 2.0, 2.0),
    "rlad": (1.0, 1.0, 1.0, 1.0),
    "multiresponse_rlad": (1.0, 1.0, 1.0, 1.0),
    "custom": None,
}


@dataclass(frozen=True)
class ObjectiveSpec:
    """Loss exponents (p, r), penalty exponents (q, s), weight lam, family tag.

    The family tag is redundant with the exponents for the named families and
    is validated against them; "custom" admits any valid exponent combination.
    """

    p: float
    q: float
    r: float
    s: float
    lam: float
    family: str

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for name in ("p", "q"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 1:
                raise ValueError(f"{name} must be a finite real >= 1, got {value}")
        for name in ("r", "s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        expected = _FAMILIES[self.family]
        if expected is not None:
            filled = tuple(self.p if e is None else e for e in expected)
            actual = (self.p, self.q, self.r, self.s)
            if actual != filled:
                raise ValueError(
                    f"family {self.family!r} requires exponents {filled}, "
                    f"got {actual}"
                )

    @classmethod
    def lp_lp(cls, p: float, lam: float) -> "ObjectiveSpec":
        return cls(p=p, q=p, r=p, s=p, lam=lam, family="lp_lp")

    @classmethod
    def ridge(cls, lam: float) -> "ObjectiveSpec":
        return cls(p=2, q=2, r=2, s=2, lam=lam, family="ridge")

    @classmethod
    def lasso(cls, lam: float) -> "ObjectiveSpec":
        return cls(p=2, q=1, r=2, s=1, lam=lam, family="lasso")

    @classmethod
    def modified_lasso(cls, lam: float) -> "ObjectiveSpec":
        return cls(p=2, q=1, r=2, s=2, lam=lam, family="modified_lasso")

    @classmethod
    def rlad(cls, lam: float) -> "ObjectiveSpec":
        return cls(p=1, q=1, r=1, s=1, lam=lam, family="rlad")

    @classmethod
    def multiresponse_rlad(cls, lam: float) -> "ObjectiveSpec":
        return cls(p=1, q=1, r=1, s=1, lam=lam, family="multiresponse_rlad")

    @classmethod
    def for_family(cls, family: str, lam: float, p: float = 2.0) -> "ObjectiveSpec":
        """Build the spec for a named family; p is only used by lp_lp."""
        if family == "lp_lp":
            return cls.lp_lp(p, lam)
        maker = {
            "ridge": cls.ridge,
            "lasso": cls.lasso,
            "modified_lasso": cls.modified_lasso,
            "rlad": cls.rlad,
            "multiresponse_rlad": cls.multiresponse_rlad,
        }.get(family)
        if maker is None:
            raise ValueError(f"unknown family {family!r}")
        return maker(lam)
