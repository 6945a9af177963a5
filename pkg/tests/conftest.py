from __future__ import annotations

import pytest

from pharmapipe.records import (
    Cohort,
    CohortEntry,
    IcuType,
    MedicationOrder,
    PatientOutcomes,
    PatientRecord,
    Sex,
)


def make_record(pid: str, dx: str = "I21.4", age: int = 60, **kwargs) -> PatientRecord:
    defaults = dict(
        id=pid,
        age=age,
        sex=Sex.FEMALE,
        race="white",
        admission_diagnosis=dx,
        problem_list=("I10",),
        comorbidities=("hypertension",),
        icu_type=IcuType.MEDICAL,
        apache_ii=20,
        mrc_icu=12,
    )
    defaults.update(kwargs)
    return PatientRecord(**defaults)


def make_entry(
    pid: str,
    dx: str = "I21.4",
    mortality: bool = False,
    meds: tuple[MedicationOrder, ...] = (),
    **kwargs,
) -> CohortEntry:
    return CohortEntry(
        record=make_record(pid, dx=dx, **kwargs),
        outcomes=PatientOutcomes(mortality=mortality, icu_los_days=2.5),
        meds=meds,
    )


@pytest.fixture
def tiny_cohort() -> Cohort:
    meds = (
        MedicationOrder("aspirin", 81.0, "mg", "po", "daily", 1.0),
        MedicationOrder("heparin", 5000.0, "units", "sc", "q8h", 2.0),
    )
    entries = tuple(
        make_entry(f"p{i}", dx="I21.4" if i % 2 == 0 else "G93.4", mortality=(i == 0), meds=meds)
        for i in range(6)
    )
    return Cohort(entries=entries, provenance="file")
