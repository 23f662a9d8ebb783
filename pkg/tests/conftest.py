"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from warden.records import CustomerRecord

# background threads and jit warm-up make wall-clock deadlines flaky
settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

# the five canonical preview rows, written out literally so the tests pin
# the values independently of the fixtures module
HEAD_ROWS = (
    CustomerRecord(user_id=15624510, gender="Male", age=19, estimated_salary=19000, purchased=0),
    CustomerRecord(user_id=15810944, gender="Male", age=35, estimated_salary=20000, purchased=0),
    CustomerRecord(user_id=15686575, gender="Female", age=26, estimated_salary=43000, purchased=0),
    CustomerRecord(user_id=15603246, gender="Female", age=27, estimated_salary=57000, purchased=0),
    CustomerRecord(user_id=15804002, gender="Male", age=19, estimated_salary=76000, purchased=0),
)


def rec(
    user_id: int,
    gender: str = "Male",
    age: int = 30,
    salary: int = 50000,
    purchased: int = 0,
) -> CustomerRecord:
    return CustomerRecord(
        user_id=user_id, gender=gender, age=age, estimated_salary=salary, purchased=purchased
    )


def balanced_records(count: int, seed: int = 3) -> list[CustomerRecord]:
    """Deterministic records with both classes well represented."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        age = int(rng.integers(18, 61))
        salary = int(rng.integers(30, 301)) * 500
        label = 1 if (age >= 40 or salary >= 120_000) else 0
        gender = "Male" if i % 2 == 0 else "Female"
        out.append(
            CustomerRecord(
                user_id=16500000 + i,
                gender=gender,
                age=age,
                estimated_salary=salary,
                purchased=label,
            )
        )
    return out


@pytest.fixture
def head_rows() -> tuple[CustomerRecord, ...]:
    return HEAD_ROWS
