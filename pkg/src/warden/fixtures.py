"""Bundled sample dataset and synthetic record generation.

The packaged CSV stands in for the social-network advertising data: the
five canonical preview rows first, then seeded synthetic customers whose
labels follow ``purchase_rule`` with a small flip-noise rate so the data
is realistically imperfect. ``synthetic_records`` feeds the live demo
with noise-free rows from the same rule.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .records import CustomerRecord

FIXTURE_FILENAME = "social_network_ads.csv"

# the five canonical preview rows; all non-buyers
HEAD_ROWS = (
    CustomerRecord(user_id=15624510, gender="Male", age=19, estimated_salary=19000, purchased=0),
    CustomerRecord(user_id=15810944, gender="Male", age=35, estimated_salary=20000, purchased=0),
    CustomerRecord(user_id=15686575, gender="Female", age=26, estimated_salary=43000, purchased=0),
    CustomerRecord(user_id=15603246, gender="Female", age=27, estimated_salary=57000, purchased=0),
    CustomerRecord(user_id=15804002, gender="Male", age=19, estimated_salary=76000, purchased=0),
)

PURCHASE_AGE = 45
PURCHASE_SALARY = 100_000
PURCHASE_SALARY_MIN_AGE = 30


def purchase_rule(age: int, estimated_salary: int) -> int:
    """Ground-truth labeling rule for generated customers."""
    if age >= PURCHASE_AGE:
        return 1
    if estimated_salary >= PURCHASE_SALARY and age >= PURCHASE_SALARY_MIN_AGE:
        return 1
    return 0


def synthetic_records(count: int, seed: int = 0, start_user_id: int = 15900000) -> list[CustomerRecord]:
    """Noise-free customers from ``purchase_rule``; ids ascend from start_user_id."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        age = int(rng.integers(18, 61))
        salary = int(rng.integers(30, 301)) * 500
        gender = "Male" if int(rng.integers(0, 2)) == 0 else "Female"
        out.append(
            CustomerRecord(
                user_id=start_user_id + i,
                gender=gender,
                age=age,
                estimated_salary=salary,
                purchased=purchase_rule(age, salary),
            )
        )
    return out


def generate_fixture_records(total: int = 400, seed: int = 2024, noise_rate: float = 0.05) -> list[CustomerRecord]:
    """The bundled dataset's rows: the canonical head plus noisy synthetic body.

    Label noise is applied only to the synthetic rows so the head stays
    byte-stable. Deterministic for fixed arguments.
    """
    if total < len(HEAD_ROWS):
        raise ValueError(f"total must be at least {len(HEAD_ROWS)}")
    body = synthetic_records(total - len(HEAD_ROWS), seed=seed, start_user_id=15900000)
    rng = np.random.default_rng([seed, 1])
    n_flip = int(round(noise_rate * len(body)))
    flip_at = set(rng.choice(len(body), size=n_flip, replace=False).tolist())
    noisy = [
        CustomerRecord(
            user_id=r.user_id,
            gender=r.gender,
            age=r.age,
            estimated_salary=r.estimated_salary,
            purchased=1 - r.purchased if i in flip_at else r.purchased,
        )
        for i, r in enumerate(body)
    ]
    return list(HEAD_ROWS) + noisy


def fixture_path() -> Path:
    """Filesystem path of the packaged sample CSV."""
    return Path(str(resources.files("warden") / "fixtures" / FIXTURE_FILENAME))
