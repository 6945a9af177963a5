"""Patient data model: cohort parsing/serialization, portrait rendering, and
a seeded synthetic cohort generator.

The JSONL schema (one object per line) is::

    {"id", "age", "sex", "race", "admission_dx", "problem_list": [],
     "comorbidities": [], "icu_type", "apache_ii", "mrc_icu",
     "outcomes": {"mortality", "icu_los_days", "delirium", "vent_hours",
                  "vasopressor_hours", "aki"},
     "meds_24h": [{"drug", "dose", "unit", "route", "frequency",
                   "start_offset_hours"}]}

Missing outcome fields default to absence (false / 0.0). Unknown extra fields
are ignored on parse; the serializer emits keys in the order above.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError


class Sex(str, Enum):
    FEMALE = "female"
    MALE = "male"
    OTHER = "other"


class IcuType(str, Enum):
    MEDICAL = "medical"
    SURGICAL = "surgical"
    NEURO = "neuro"
    CARDIAC = "cardiac"
    BURN = "burn"


ICD_CODE_RE = re.compile(r"^[A-Z][0-9][0-9A-Z](\.[0-9A-Z]{1,4})?$")

# WHO ICD-10 chapters: (first code, last code, chapter name).
_CHAPTERS = (
    ("A00", "B99", "Certain infectious and parasitic diseases"),
    ("C00", "D48", "Neoplasms"),
    (
        "D50",
        "D89",
        "Diseases of the blood and blood-forming organs and certain disorders "
        "involving the immune mechanism",
    ),
    ("E00", "E90", "Endocrine, nutritional and metabolic diseases"),
    ("F00", "F99", "Mental and behavioural disorders"),
    ("G00", "G99", "Diseases of the nervous system"),
    ("H00", "H59", "Diseases of the eye and adnexa"),
    ("H60", "H95", "Diseases of the ear and mastoid process"),
    ("I00", "I99", "Diseases of the circulatory system"),
    ("J00", "J99", "Diseases of the respiratory system"),
    ("K00", "K93", "Diseases of the digestive system"),
    ("L00", "L99", "Diseases of the skin and subcutaneous tissue"),
    ("M00", "M99", "Diseases of the musculoskeletal system and connective tissue"),
    ("N00", "N99", "Diseases of the genitourinary system"),
    ("O00", "O99", "Pregnancy, childbirth and the puerperium"),
    ("P00", "P96", "Certain conditions originating in the perinatal period"),
    (
        "Q00",
        "Q99",
        "Congenital malformations, deformations and chromosomal abnormalities",
    ),
    (
        "R00",
        "R99",
        "Symptoms, signs and abnormal clinical and laboratory findings, "
        "not elsewhere classified",
    ),
    ("S00", "T98", "Injury, poisoning and certain other consequences of external causes"),
    ("U00", "U99", "Codes for special purposes"),
    ("V01", "Y98", "External causes of morbidity and mortality"),
    ("Z00", "Z99", "Factors influencing health status and contact with health services"),
)

ICD10_CHAPTER_LABELS = tuple(
    f"{name} ({start}–{end})" for start, end, name in _CHAPTERS
)


def diagnosis_category(code: str) -> str:
    """Map an ICD-10 code to its WHO chapter label, e.g.
    ``"I21.4" -> "Diseases of the circulatory system (I00–I99)"``.
    """
    if not isinstance(code, str) or not ICD_CODE_RE.match(code):
        raise ValidationError(f"unrecognized ICD-10 code: {code!r}")
    key = code[:3]
    for (start, end, _), label in zip(_CHAPTERS, ICD10_CHAPTER_LABELS):
        if start <= key <= end:
            return label
    raise ValidationError(f"unrecognized ICD-10 code: {code!r} (outside all chapters)")


def resolve_chapter_key(key: str) -> int:
    """Accept a chapter range ("I00-I99", en dash allowed) or full label and
    return the chapter index.
    """
    norm = key.strip().replace("–", "-").upper()
    for idx, ((start, end, _), label) in enumerate(zip(_CHAPTERS, ICD10_CHAPTER_LABELS)):
        if norm == f"{start}-{end}" or key.strip() == label:
            return idx
    raise ValidationError(f"unknown ICD-10 chapter key: {key!r}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


def _parse_sex(value: str) -> Sex:
    v = str(value).strip().lower()
    if v in ("other", "unknown"):
        return Sex.OTHER
    try:
        return Sex(v)
    except ValueError:
        raise ValidationError(f"invalid sex: {value!r}") from None


@dataclass(frozen=True)
class PatientRecord:
    id: str
    age: int
    sex: Sex
    race: str
    admission_diagnosis: str
    problem_list: tuple[str, ...] = ()
    comorbidities: tuple[str, ...] = ()
    icu_type: IcuType = IcuType.MEDICAL
    apache_ii: int | None = None
    mrc_icu: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "problem_list", tuple(self.problem_list))
        object.__setattr__(self, "comorbidities", tuple(self.comorbidities))
        if not self.id:
            raise ValidationError("patient id must be non-empty")
        if not isinstance(self.age, int) or self.age < 18:
            raise ValidationError(f"patient {self.id}: age must be an integer >= 18 (adult cohort)")
        if not self.admission_diagnosis:
            raise ValidationError(f"patient {self.id}: admission diagnosis must be non-empty")
        if self.apache_ii is not None and not (0 <= self.apache_ii <= 71):
            raise ValidationError(f"patient {self.id}: apache_ii must be in [0, 71]")
        if self.mrc_icu is not None and self.mrc_icu < 0:
            raise ValidationError(f"patient {self.id}: mrc_icu must be non-negative")


@dataclass(frozen=True)
class PatientOutcomes:
    mortality: bool = False
    icu_los_days: float = 0.0
    delirium: bool = False
    vent_hours: float = 0.0
    vasopressor_hours: float = 0.0
    aki: bool = False

    def __post_init__(self):
        for name in ("icu_los_days", "vent_hours", "vasopressor_hours"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and non-negative")


@dataclass(frozen=True)
class MedicationOrder:
    drug: str
    dose: float
    unit: str
    route: str
    frequency: str
    start_offset_hours: float = 0.0

    def __post_init__(self):
        if not self.drug:
            raise ValidationError("medication order drug must be non-empty")
        if not self.dose > 0:
            raise ValidationError(f"medication order {self.drug}: dose must be positive")
        if not (0 <= self.start_offset_hours <= 24):
            raise ValidationError(
                f"medication order {self.drug}: start_offset_hours must be in [0, 24]"
            )


@dataclass(frozen=True)
class CohortEntry:
    record: PatientRecord
    outcomes: PatientOutcomes
    meds: tuple[MedicationOrder, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "meds", tuple(self.meds))


@dataclass(frozen=True)
class Cohort:
    entries: tuple[CohortEntry, ...]
    provenance: str = "file"

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValidationError("empty cohort")
        seen = set()
        for entry in self.entries:
            pid = entry.record.id
            if pid in seen:
                raise ValidationError(f"duplicate patient id: {pid}")
            seen.add(pid)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [entry.record.id for entry in self.entries]


# ---------------------------------------------------------------------------
# Parse / serialize
# ---------------------------------------------------------------------------


def _entry_from_obj(obj: dict) -> CohortEntry:
    if not isinstance(obj, dict):
        raise ValidationError("record is not an object")
    try:
        record = PatientRecord(
            id=str(obj["id"]),
            age=int(obj["age"]),
            sex=_parse_sex(obj["sex"]),
            race=str(obj.get("race", "unknown")),
            admission_diagnosis=str(obj["admission_dx"]),
            problem_list=tuple(str(c) for c in obj.get("problem_list", [])),
            comorbidities=tuple(str(c) for c in obj.get("comorbidities", [])),
            icu_type=IcuType(str(obj["icu_type"]).strip().lower()),
            apache_ii=None if obj.get("apache_ii") is None else int(obj["apache_ii"]),
            mrc_icu=None if obj.get("mrc_icu") is None else int(obj["mrc_icu"]),
        )
    except KeyError as exc:
        raise ValidationError(f"missing required field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    raw_outcomes = obj.get("outcomes") or {}
    if not isinstance(raw_outcomes, dict):
        raise ValidationError("outcomes must be an object")
    outcomes = PatientOutcomes(
        mortality=bool(raw_outcomes.get("mortality", False)),
        icu_los_days=float(raw_outcomes.get("icu_los_days", 0.0)),
        delirium=bool(raw_outcomes.get("delirium", False)),
        vent_hours=float(raw_outcomes.get("vent_hours", 0.0)),
        vasopressor_hours=float(raw_outcomes.get("vasopressor_hours", 0.0)),
        aki=bool(raw_outcomes.get("aki", False)),
    )
    meds = []
    for raw in obj.get("meds_24h", []):
        if not isinstance(raw, dict):
            raise ValidationError("meds_24h entries must be objects")
        try:
            meds.append(
                MedicationOrder(
                    drug=str(raw["drug"]),
                    dose=float(raw["dose"]),
                    unit=str(raw.get("unit", "")),
                    route=str(raw.get("route", "")),
                    frequency=str(raw.get("frequency", "")),
                    start_offset_hours=float(raw.get("start_offset_hours", 0.0)),
                )
            )
        except KeyError as exc:
            raise ValidationError(f"medication order missing field {exc.args[0]!r}") from None
    return CohortEntry(record=record, outcomes=outcomes, meds=tuple(meds))


def parse_cohort(text: str) -> Cohort:
    """Parse line-delimited JSON records into a Cohort.

    Raises ValidationError naming the offending line number (1-based) or the
    duplicated patient id.
    """
    if not text or not text.strip():
        raise ValidationError("empty cohort")
    entries = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {lineno}: malformed record: {exc.msg}") from None
        try:
            entry = _entry_from_obj(obj)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        pid = entry.record.id
        if pid in seen:
            raise ValidationError(f"duplicate patient id: {pid}")
        seen.add(pid)
        entries.append(entry)
    return Cohort(entries=tuple(entries), provenance="file")


def _entry_to_obj(entry: CohortEntry) -> dict:
    record, outcomes = entry.record, entry.outcomes
    return {
        "id": record.id,
        "age": record.age,
        "sex": record.sex.value,
        "race": record.race,
        "admission_dx": record.admission_diagnosis,
        "problem_list": list(record.problem_list),
        "comorbidities": list(record.comorbidities),
        "icu_type": record.icu_type.value,
        "apache_ii": record.apache_ii,
        "mrc_icu": record.mrc_icu,
        "outcomes": {
            "mortality": outcomes.mortality,
            "icu_los_days": outcomes.icu_los_days,
            "delirium": outcomes.delirium,
            "vent_hours": outcomes.vent_hours,
            "vasopressor_hours": outcomes.vasopressor_hours,
            "aki": outcomes.aki,
        },
        "meds_24h": [
            {
                "drug": med.drug,
                "dose": med.dose,
                "unit": med.unit,
                "route": med.route,
                "frequency": med.frequency,
                "start_offset_hours": med.start_offset_hours,
            }
            for med in entry.meds
        ],
    }


def serialize_cohort(cohort: Cohort) -> str:
    """Inverse of parse_cohort; emits keys in the documented order."""
    lines = [json.dumps(_entry_to_obj(entry), ensure_ascii=False) for entry in cohort]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Portrait rendering
# ---------------------------------------------------------------------------


def render_portrait(record: PatientRecord) -> str:
    """Deterministic single-paragraph patient portrait.

    Fixed field order: age, sex, race, ICU type, admission diagnosis (code
    plus chapter text when the code is recognized), problem list,
    comorbidities. Outcomes and medications never appear here.
    """
    dx = record.admission_diagnosis
    try:
        dx_text = f"{dx} ({diagnosis_category(dx)})"
    except ValidationError:
        dx_text = dx
    parts = [
        f"{record.age}-year-old {record.sex.value} {record.race} patient "
        f"in the {record.icu_type.value} ICU, admitted with {dx_text}."
    ]
    if record.problem_list:
        parts.append(f"Active problems: {', '.join(record.problem_list)}.")
    if record.comorbidities:
        parts.append(f"Comorbidities: {', '.join(record.comorbidities)}.")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Synthetic cohort generation
# ---------------------------------------------------------------------------

DEFAULT_CATEGORY_MIX = {
    "I00-I99": 1.0,
    "G00-G99": 1.0,
    "J00-J99": 1.0,
    "K00-K93": 1.0,
    "N00-N99": 1.0,
}

_CHAPTER_COMORBIDITIES = {
    "A00": ("recurrent infections", "chronic hepatitis c", "hiv"),
    "C00": ("metastatic disease", "prior chemotherapy", "cancer-related anemia"),
    "E00": ("type 2 diabetes", "hypothyroidism", "obesity"),
    "F00": ("major depression", "alcohol use disorder", "anxiety disorder"),
    "G00": ("epilepsy", "parkinsonism", "myasthenia gravis", "migraine"),
    "I00": ("hypertension", "atrial fibrillation", "coronary artery disease", "heart failure"),
    "J00": ("copd", "asthma", "obstructive sleep apnea", "pulmonary fibrosis"),
    "K00": ("cirrhosis", "gerd", "chronic pancreatitis", "peptic ulcer disease"),
    "N00": ("chronic kidney disease", "nephrolithiasis", "benign prostatic hyperplasia"),
    "S00": ("prior long-bone fracture", "chronic pain syndrome"),
}

_GENERIC_COMORBIDITIES = ("former smoker", "hyperlipidemia", "osteoarthritis")

_PREFERRED_ICU = {
    "G00": IcuType.NEURO,
    "I00": IcuType.CARDIAC,
    "S00": IcuType.SURGICAL,
}

# (drug, unit, route, frequency, dose choices)
_COMMON_MEDS = (
    ("propofol", "mcg/kg/min", "iv", "continuous", (20.0, 40.0, 60.0)),
    ("fentanyl", "mcg/hr", "iv", "continuous", (25.0, 50.0, 100.0)),
    ("norepinephrine", "mcg/min", "iv", "continuous", (4.0, 8.0, 16.0)),
    ("pantoprazole", "mg", "iv", "daily", (40.0,)),
    ("heparin", "units", "sc", "q8h", (5000.0,)),
    ("vancomycin", "mg", "iv", "q12h", (1000.0, 1250.0, 1500.0)),
    ("cefepime", "g", "iv", "q8h", (1.0, 2.0)),
    ("insulin regular", "units/hr", "iv", "continuous", (2.0, 4.0, 6.0)),
    ("acetaminophen", "mg", "po", "q6h", (650.0, 1000.0)),
)

_CHAPTER_MEDS = {
    "A00": (
        ("piperacillin-tazobactam", "g", "iv", "q6h", (3.375, 4.5)),
        ("metronidazole", "mg", "iv", "q8h", (500.0,)),
    ),
    "C00": (
        ("dexamethasone", "mg", "iv", "q6h", (4.0, 10.0)),
        ("ondansetron", "mg", "iv", "q8h", (4.0, 8.0)),
    ),
    "G00": (
        ("levetiracetam", "mg", "iv", "q12h", (500.0, 1000.0, 1500.0)),
        ("mannitol", "g", "iv", "q6h", (25.0, 50.0)),
        ("nimodipine", "mg", "po", "q4h", (60.0,)),
    ),
    "I00": (
        ("metoprolol", "mg", "iv", "q6h", (5.0,)),
        ("amiodarone", "mg/min", "iv", "continuous", (0.5, 1.0)),
        ("furosemide", "mg", "iv", "q12h", (20.0, 40.0, 80.0)),
        ("aspirin", "mg", "po", "daily", (81.0, 325.0)),
    ),
    "J00": (
        ("albuterol", "puffs", "inh", "q4h", (2.0, 4.0)),
        ("ipratropium", "puffs", "inh", "q6h", (2.0,)),
        ("methylprednisolone", "mg", "iv", "q6h", (40.0, 125.0)),
    ),
    "K00": (
        ("lactulose", "ml", "po", "q8h", (30.0,)),
        ("octreotide", "mcg/hr", "iv", "continuous", (50.0,)),
        ("rifaximin", "mg", "po", "q12h", (550.0,)),
    ),
    "N00": (
        ("sodium bicarbonate", "meq/hr", "iv", "continuous", (10.0, 20.0)),
        ("calcium gluconate", "g", "iv", "once", (1.0, 2.0)),
        ("sevelamer", "mg", "po", "q8h", (800.0,)),
    ),
}

_RACES = ("white", "black", "hispanic", "asian", "other")
_RACE_P = (0.60, 0.20, 0.10, 0.06, 0.04)
_SEXES = (Sex.FEMALE, Sex.MALE, Sex.OTHER)
_SEX_P = (0.47, 0.51, 0.02)

_MORTALITY_SLOPE = 0.15  # logistic slope per APACHE II point


def _chapter_code_pool(chapter_idx: int, size: int = 12) -> list[str]:
    start, end, _ = _CHAPTERS[chapter_idx]
    codes = []
    for letter_ord in range(ord(start[0]), ord(end[0]) + 1):
        letter = chr(letter_ord)
        lo = int(start[1:]) if letter == start[0] else 0
        hi = int(end[1:]) if letter == end[0] else 99
        codes.extend(f"{letter}{num:02d}" for num in range(lo, hi + 1))
    idx = np.round(np.linspace(0, len(codes) - 1, size)).astype(int)
    return [codes[i] for i in sorted(set(int(i) for i in idx))]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _calibrate_mortality_pivot(apache: np.ndarray, prevalence: float) -> float:
    """Bisect the logistic pivot c so that mean(sigmoid(slope*(a - c)))
    equals the target prevalence on this cohort's APACHE II values.
    """
    lo, hi = -500.0, 500.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _sigmoid(_MORTALITY_SLOPE * (apache - mid)).mean() > prevalence:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def generate_synthetic_cohort(
    seed: int,
    n: int,
    category_mix: dict[str, float] | None = None,
    mortality_prevalence: float = 0.10,
) -> Cohort:
    """Seeded synthetic stand-in for a private ICU cohort.

    Admission diagnoses follow ``category_mix`` (chapter-range keys such as
    "I00-I99" mapped to positive weights). Mortality follows a logistic link
    on APACHE II, with the pivot calibrated per cohort so that expected
    prevalence equals ``mortality_prevalence``; the other outcomes rise
    monotonically with APACHE II as well. Pure function of its arguments.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not (0.0 < mortality_prevalence < 1.0):
        raise ValidationError("mortality_prevalence must be in (0, 1)")
    mix = DEFAULT_CATEGORY_MIX if category_mix is None else category_mix
    if not mix:
        raise ValidationError("category_mix must be non-empty")
    chapter_idx = []
    weights = []
    for key, weight in mix.items():
        if not weight > 0:
            raise ValidationError(f"category weight for {key!r} must be positive")
        chapter_idx.append(resolve_chapter_key(key))
        weights.append(float(weight))
    probs = np.asarray(weights) / sum(weights)
    pools = {idx: _chapter_code_pool(idx) for idx in chapter_idx}

    rng = np.random.default_rng(seed)
    width = max(4, len(str(n - 1)))

    drafts = []
    for i in range(n):
        cidx = chapter_idx[int(rng.choice(len(chapter_idx), p=probs))]
        chapter_start = _CHAPTERS[cidx][0]
        pool = pools[cidx]
        dx = pool[int(rng.integers(len(pool)))]
        if rng.random() < 0.5:
            dx = f"{dx}.{int(rng.integers(10))}"
        age = int(np.clip(round(rng.normal(62.0, 16.0)), 18, 95))
        sex = _SEXES[int(rng.choice(len(_SEXES), p=_SEX_P))]
        race = _RACES[int(rng.choice(len(_RACES), p=_RACE_P))]
        preferred = _PREFERRED_ICU.get(chapter_start, IcuType.MEDICAL)
        if rng.random() < 0.6:
            icu = preferred
        else:
            icu = list(IcuType)[int(rng.integers(len(IcuType)))]
        n_problems = int(rng.integers(2, 6))
        problems = []
        for _ in range(n_problems):
            if rng.random() < 0.8 or len(chapter_idx) == 1:
                src = pool
            else:
                other = chapter_idx[int(rng.integers(len(chapter_idx)))]
                src = pools[other]
            code = src[int(rng.integers(len(src)))]
            if code not in problems:
                problems.append(code)
        chapter_com = _CHAPTER_COMORBIDITIES.get(chapter_start, ())
        n_com = int(rng.integers(1, 4))
        coms = []
        for _ in range(n_com):
            if chapter_com and rng.random() < 0.7:
                c = chapter_com[int(rng.integers(len(chapter_com)))]
            else:
                c = _GENERIC_COMORBIDITIES[int(rng.integers(len(_GENERIC_COMORBIDITIES)))]
            if c not in coms:
                coms.append(c)
        apache = int(np.clip(round(rng.normal(16.0, 9.0)), 0, 71))
        mrc = int(np.clip(round(rng.normal(10.0 + 0.3 * apache, 4.0)), 0, 60))
        meds_pool = list(_COMMON_MEDS) + list(_CHAPTER_MEDS.get(chapter_start, ()))
        n_meds = int(rng.integers(2, 9))
        picks = rng.choice(len(meds_pool), size=min(n_meds, len(meds_pool)), replace=False)
        meds = []
        for p in sorted(int(x) for x in picks):
            drug, unit, route, freq, doses = meds_pool[p]
            dose = doses[int(rng.integers(len(doses)))]
            start_h = round(float(rng.uniform(0.0, 24.0)) * 2) / 2
            meds.append(MedicationOrder(drug, dose, unit, route, freq, start_h))
        drafts.append(
            {
                "record": PatientRecord(
                    id=f"synth-{i:0{width}d}",
                    age=age,
                    sex=sex,
                    race=race,
                    admission_diagnosis=dx,
                    problem_list=tuple(problems),
                    comorbidities=tuple(coms),
                    icu_type=icu,
                    apache_ii=apache,
                    mrc_icu=mrc,
                ),
                "meds": tuple(meds),
            }
        )

    apaches = np.array([d["record"].apache_ii for d in drafts], dtype=float)
    pivot = _calibrate_mortality_pivot(apaches, mortality_prevalence)
    p_mort = _sigmoid(_MORTALITY_SLOPE * (apaches - pivot))

    entries = []
    for i, draft in enumerate(drafts):
        apache = float(apaches[i])
        mortality = bool(rng.random() < p_mort[i])
        los = float(np.clip(round(math.exp(rng.normal(1.2 + 0.02 * apache, 0.5)), 1), 0.2, 60.0))
        delirium = bool(rng.random() < _sigmoid(0.08 * (apache - 20.0)))
        if rng.random() < _sigmoid(0.1 * (apache - 18.0)):
            vent = float(np.clip(round(math.exp(rng.normal(3.0 + 0.03 * apache, 0.8)), 1), 1.0, 720.0))
        else:
            vent = 0.0
        if rng.random() < _sigmoid(0.1 * (apache - 20.0)):
            pressor = float(np.clip(round(math.exp(rng.normal(2.5 + 0.03 * apache, 0.8)), 1), 1.0, 720.0))
        else:
            pressor = 0.0
        aki = bool(rng.random() < _sigmoid(0.07 * (apache - 22.0)))
        outcomes = PatientOutcomes(
            mortality=mortality,
            icu_los_days=los,
            delirium=delirium,
            vent_hours=vent,
            vasopressor_hours=pressor,
            aki=aki,
        )
        entries.append(CohortEntry(record=draft["record"], outcomes=outcomes, meds=draft["meds"]))
    return Cohort(entries=tuple(entries), provenance=f"synthetic(seed={seed})")
