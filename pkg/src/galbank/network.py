"""Domain types for the tiered galactic interbank network.

Monetary amounts are plain floats denominated in QUINTILLION galactic
dollars (Q); 1 Q = 1,000 QUADRILLION and 1,000 Q = 1 SEXTILLION.  The
network has three bank tiers (the central IGBC, "massive" and "big"
banks).  Banks inside a tier are interchangeable: every liability figure
is the total one bank owes to the named tier, split evenly across that
tier's members (excluding itself for same-tier debts).  All types are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
import math

import numpy as np

Money = float

# fixed powers of ten relative to the canonical QUINTILLION unit
QUADRILLION = 1e-3
QUINTILLION = 1.0
SEXTILLION = 1e3

# fractional-reserve rule: assets are 4x total deposits
ASSETS_PER_DEPOSIT = 4.0


class DegenerateNetworkError(ValueError):
    """Tier layout cannot form a valid network (zero counts, bad splits)."""


class Tier(IntEnum):
    CENTRAL = 0
    MASSIVE = 1
    BIG = 2


@dataclass(frozen=True)
class BankTier:
    tag: Tier
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise DegenerateNetworkError(
                f"tier {self.tag.name} needs at least one bank, got {self.count}"
            )


@dataclass(frozen=True)
class LiabilityProfile:
    """What one bank of a tier owes: totals per creditor tier plus outside debt."""

    owed_to_central: Money = 0.0
    owed_to_massive: Money = 0.0
    owed_to_big: Money = 0.0
    owed_external: Money = 0.0

    def __post_init__(self):
        for name in ("owed_to_central", "owed_to_massive", "owed_to_big", "owed_external"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def owed_to(self, tier: Tier) -> Money:
        return (self.owed_to_central, self.owed_to_massive, self.owed_to_big)[tier]


@dataclass(frozen=True)
class BalanceSheet:
    external_assets: Money
    interbank_claims_face: Money
    bond_holdings_face: Money
    deposits: Money
    bailout_injection: Money = 0.0

    def __post_init__(self):
        for name in (
            "external_assets",
            "interbank_claims_face",
            "bond_holdings_face",
            "deposits",
            "bailout_injection",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total_assets(self) -> Money:
        """Face-value assets before shocks, bond defaults and bailouts."""
        return self.external_assets + self.interbank_claims_face + self.bond_holdings_face


def total_obligation(profile: LiabilityProfile) -> Money:
    """Everything one bank owes: the three tier totals plus external debt."""
    return (
        profile.owed_to_central
        + profile.owed_to_massive
        + profile.owed_to_big
        + profile.owed_external
    )


def deposits_from_assets(total_assets: Money) -> Money:
    """Deposits implied by the assets-are-4x-deposits reserve rule."""
    if total_assets < 0:
        raise ValueError("total_assets must be non-negative")
    return total_assets / ASSETS_PER_DEPOSIT


def _claims_face(counts, profiles, tier: Tier) -> Money:
    """Per-bank face claims of `tier` under the even-split convention.

    Cross-tier: tier c pays count_c * owed(c->d) in total, split over count_d
    members.  Same-tier: each of the count_d banks owes owed(d->d) split over
    the other count_d - 1, so every member is owed exactly owed(d->d) back.
    """
    d = tier
    claims = 0.0
    for c in Tier:
        owed = profiles[c].owed_to(d)
        if owed == 0.0:
            continue
        if c == d:
            if counts[d] < 2:
                raise DegenerateNetworkError(
                    f"tier {d.name} has {counts[d]} bank(s) but a same-tier liability"
                )
            claims += owed
        else:
            claims += counts[c] * owed / counts[d]
    return claims


def interbank_claims_face(network: "GalacticNetwork", tier: Tier) -> Money:
    """Face value of interbank claims held by one bank of the given tier."""
    return _claims_face(network.counts, network.profiles, tier)


@dataclass(frozen=True)
class GalacticNetwork:
    """The full tiered network: counts, liability profiles, per-tier sheets.

    Banks are indexed 0 .. n_banks-1 with the central bank first, then the
    massive tier, then the big tier.  Sheets are stored once per tier since
    construction is tier-symmetric.
    """

    tiers: tuple[BankTier, BankTier, BankTier]
    profiles: tuple[LiabilityProfile, LiabilityProfile, LiabilityProfile]
    sheets: tuple[BalanceSheet, BalanceSheet, BalanceSheet]
    ggp: Money
    outstanding_debt: Money

    def __post_init__(self):
        if tuple(t.tag for t in self.tiers) != (Tier.CENTRAL, Tier.MASSIVE, Tier.BIG):
            raise DegenerateNetworkError("tiers must be ordered (central, massive, big)")
        for t in (Tier.MASSIVE, Tier.BIG):
            if self.profiles[t].owed_external > 0:
                raise DegenerateNetworkError(
                    f"only the central bank may owe outside the system, {t.name} does"
                )
        # claims stored on the sheets must match the even-split arithmetic
        for t in Tier:
            implied = _claims_face(self.counts, self.profiles, t)
            stored = self.sheets[t].interbank_claims_face
            if not math.isclose(stored, implied, rel_tol=1e-9, abs_tol=1e-12):
                raise DegenerateNetworkError(
                    f"claims on {t.name} sheet ({stored}) inconsistent with profiles ({implied})"
                )

    @property
    def counts(self) -> tuple[int, int, int]:
        return tuple(t.count for t in self.tiers)

    @property
    def n_banks(self) -> int:
        return sum(self.counts)

    def tier_slice(self, tier: Tier) -> slice:
        counts = self.counts
        start = sum(counts[:tier])
        return slice(start, start + counts[tier])

    def sheet(self, tier: Tier, index: int) -> BalanceSheet:
        if not 0 <= index < self.counts[tier]:
            raise IndexError(f"bank {index} out of range for tier {tier.name}")
        return self.sheets[tier]

    def with_bailout_injection(self, injections) -> "GalacticNetwork":
        """Copy of the network with per-tier bailout_injection amounts set."""
        sheets = tuple(
            replace(self.sheets[t], bailout_injection=float(injections[t])) for t in Tier
        )
        return replace(self, sheets=sheets)

    # per-bank expansions used by the clearing and risk engines

    def tier_of_bank(self) -> np.ndarray:
        return np.repeat(np.arange(3, dtype=np.int64), self.counts)

    def _per_bank(self, values) -> np.ndarray:
        return np.repeat(np.asarray(values, dtype=float), self.counts)

    def external_assets_vector(self) -> np.ndarray:
        return self._per_bank([self.sheets[t].external_assets for t in Tier])

    def bond_face_vector(self) -> np.ndarray:
        return self._per_bank([self.sheets[t].bond_holdings_face for t in Tier])

    def deposits_vector(self) -> np.ndarray:
        return self._per_bank([self.sheets[t].deposits for t in Tier])

    def bailout_injection_vector(self) -> np.ndarray:
        return self._per_bank([self.sheets[t].bailout_injection for t in Tier])

    def obligations_per_tier(self) -> np.ndarray:
        return np.array([total_obligation(self.profiles[t]) for t in Tier])

    def total_external_obligation(self) -> Money:
        return sum(self.counts[t] * self.profiles[t].owed_external for t in Tier)

    def interbank_conservation_gap(self) -> Money:
        """Total claims minus total interbank liabilities; zero by construction."""
        claims = sum(
            self.counts[t] * _claims_face(self.counts, self.profiles, t) for t in Tier
        )
        owed = sum(
            self.counts[t] * (total_obligation(self.profiles[t]) - self.profiles[t].owed_external)
            for t in Tier
        )
        return claims - owed
