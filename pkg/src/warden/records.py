"""Customer record schema shared by the warehouse and the dataset sink."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

CSV_HEADER = "User ID,Gender,Age,EstimatedSalary,Purchased"
GENDERS = ("Male", "Female")


class ValidationError(ValueError):
    """A record or row violates the dataset schema."""


def _require_int(value: Any, field: str) -> int:
    # bool is an int subclass; never a valid field value here
    if isinstance(value, bool):
        raise ValidationError(f"{field}: expected integer, got boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            raise ValidationError(f"{field}: not an integer: {value!r}") from None
    raise ValidationError(f"{field}: expected integer, got {type(value).__name__}")


@dataclass(frozen=True)
class CustomerRecord:
    """One warehouse row: user id, gender, age, salary, purchase label."""

    user_id: int
    gender: str
    age: int
    estimated_salary: int
    purchased: int

    def __post_init__(self) -> None:
        if not isinstance(self.user_id, int) or isinstance(self.user_id, bool) or self.user_id <= 0:
            raise ValidationError(f"user_id: must be a positive integer, got {self.user_id!r}")
        if self.gender not in GENDERS:
            raise ValidationError(f"gender: must be one of {GENDERS}, got {self.gender!r}")
        if not isinstance(self.age, int) or isinstance(self.age, bool) or not 0 < self.age < 150:
            raise ValidationError(f"age: must be an integer in (0, 150), got {self.age!r}")
        if (
            not isinstance(self.estimated_salary, int)
            or isinstance(self.estimated_salary, bool)
            or self.estimated_salary < 0
        ):
            raise ValidationError(
                f"estimated_salary: must be a non-negative integer, got {self.estimated_salary!r}"
            )
        if self.purchased not in (0, 1):
            raise ValidationError(f"purchased: must be 0 or 1, got {self.purchased!r}")

    def csv_line(self) -> str:
        return f"{self.user_id},{self.gender},{self.age},{self.estimated_salary},{self.purchased}"

    def as_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "gender": self.gender,
            "age": self.age,
            "estimated_salary": self.estimated_salary,
            "purchased": self.purchased,
        }


def record_from_fields(fields: list[str]) -> CustomerRecord:
    """Build a record from one CSV row's raw string fields."""
    if len(fields) != 5:
        raise ValidationError(f"expected 5 fields, got {len(fields)}")
    user_id, gender, age, salary, purchased = fields
    return CustomerRecord(
        user_id=_require_int(user_id, "user_id"),
        gender=gender.strip(),
        age=_require_int(age, "age"),
        estimated_salary=_require_int(salary, "estimated_salary"),
        purchased=_require_int(purchased, "purchased"),
    )


def record_from_mapping(row: Mapping[str, Any]) -> CustomerRecord:
    """Build a record from a dict-like row; raises ValidationError on any missing or bad field."""
    missing = [k for k in ("user_id", "gender", "age", "estimated_salary", "purchased") if row.get(k) is None]
    if missing:
        raise ValidationError(f"missing fields: {', '.join(missing)}")
    return CustomerRecord(
        user_id=_require_int(row["user_id"], "user_id"),
        gender=str(row["gender"]).strip(),
        age=_require_int(row["age"], "age"),
        estimated_salary=_require_int(row["estimated_salary"], "estimated_salary"),
        purchased=_require_int(row["purchased"], "purchased"),
    )
