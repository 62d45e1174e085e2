"""Synthetic identity generation: names, dates, RUN check digit, MRZ, prompts.

Everything here is a pure function of its inputs; batch callers derive
per-item seeds with :func:`mix_seed` so item *i* is reproducible on its own.
"""

from __future__ import annotations

import datetime as dt
import random
import re
from dataclasses import dataclass

from .errors import AlphabetError, EncodingError, InvariantError, MismatchError, RangeError

NAME_ALPHABET = re.compile(r"^[A-ZÑ][A-ZÑ \-]*$")
MRZ_ALPHABET = re.compile(r"^[A-Z0-9<]*$")

RUN_MIN = 1
RUN_MAX = 99_999_999

SPANISH_MONTHS = ("ENE", "FEB", "MAR", "ABR", "MAY", "JUN",
                  "JUL", "AGO", "SEP", "OCT", "NOV", "DIC")

# Fixed in-repo name pools; seeded sampling keeps generation deterministic.
SURNAMES = (
    "GONZALEZ", "MUÑOZ", "ROJAS", "DIAZ", "PEREZ", "SOTO", "CONTRERAS",
    "SILVA", "MARTINEZ", "SEPULVEDA", "MORALES", "RODRIGUEZ", "LOPEZ",
    "FUENTES", "HERNANDEZ", "TORRES", "ARAYA", "FLORES", "ESPINOZA",
    "VALENZUELA", "CASTILLO", "TAPIA", "REYES", "GUTIERREZ", "CASTRO",
    "PIZARRO", "ALVAREZ", "VASQUEZ", "SANCHEZ", "FERNANDEZ", "RAMIREZ",
    "CARRASCO", "GOMEZ", "CORTES", "HERRERA", "NUÑEZ", "JARA", "VERGARA",
    "RIVERA", "FIGUEROA", "RIQUELME", "GARCIA", "MIRANDA", "BRAVO",
    "VERA", "MOLINA", "VEGA", "CAMPOS", "SANDOVAL", "ORELLANA",
)
GIVEN_NAMES_F = (
    "MARIA", "ANA", "CAMILA", "JAVIERA", "FRANCISCA", "VALENTINA",
    "CONSTANZA", "CATALINA", "FERNANDA", "DANIELA", "CAROLINA", "PAULA",
    "ANTONIA", "ISIDORA", "MARTINA", "SOFIA", "AMANDA", "ROSA", "CLAUDIA",
    "PATRICIA", "CARMEN", "ELENA", "VICTORIA", "JOSEFA", "PILAR",
    "MAGDALENA", "LORETO", "PAZ", "BEATRIZ", "GLORIA", "INES", "TERESA",
)
GIVEN_NAMES_M = (
    "JOSE", "JUAN", "LUIS", "CARLOS", "JORGE", "FRANCISCO", "MANUEL",
    "CRISTIAN", "DIEGO", "PEDRO", "PABLO", "RODRIGO", "SEBASTIAN",
    "MATIAS", "FELIPE", "IGNACIO", "VICENTE", "ANDRES", "RICARDO",
    "MAURICIO", "HECTOR", "OSCAR", "RAUL", "SERGIO", "GONZALO", "ALONSO",
    "EDUARDO", "DANIEL", "MARCELO", "PATRICIO", "TOMAS", "ESTEBAN",
)

# Nationality as printed on the card, with the ISO 3166-1 alpha-3 code used
# in the machine-readable zone.
CHILEAN_NATIONALITY = ("CHILENA", "CHL")
FOREIGN_NATIONALITIES = (
    ("ARGENTINA", "ARG"), ("PERUANA", "PER"), ("BOLIVIANA", "BOL"),
    ("COLOMBIANA", "COL"), ("VENEZOLANA", "VEN"), ("ECUATORIANA", "ECU"),
    ("BRASILEÑA", "BRA"), ("PARAGUAYA", "PRY"), ("URUGUAYA", "URY"),
    ("ESPAÑOLA", "ESP"), ("HAITIANA", "HTI"), ("DOMINICANA", "DOM"),
    ("MEXICANA", "MEX"), ("CUBANA", "CUB"),
)
_NATIONALITY_CODES = dict((CHILEAN_NATIONALITY,) + FOREIGN_NATIONALITIES)

PROFILES = ("citizen", "extranjero")


def mix_seed(master_seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for item `index` from a master seed.

    splitmix64 finalizer over (master + index * golden-gamma); documented
    constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB.
    """
    mask = (1 << 64) - 1
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@dataclass(frozen=True)
class Persona:
    """One synthetic identity; field values are the card's source of truth."""

    surnames: str
    given_names: str
    nationality: str
    gender: str  # "F" or "M"
    birth_date: dt.date
    document_number: str
    issue_date: dt.date
    expiry_date: dt.date
    run_number: int
    run_check: str


@dataclass(frozen=True)
class MrzBlock:
    """A TD1 machine-readable zone: three lines of exactly 30 characters."""

    lines: tuple[str, str, str]


@dataclass(frozen=True)
class FaceAttributes:
    age_years: int
    ethnicity: str
    gender: str  # "F" or "M"
    hair_color: str
    hair_or_beard_style: str


def validate_persona(p: Persona) -> list[str]:
    """Return human-readable invariant violations; empty list means valid."""
    problems = []
    for label, value in (("surnames", p.surnames), ("given_names", p.given_names)):
        if not NAME_ALPHABET.match(value):
            problems.append(f"{label} outside allowed alphabet: {value!r}")
    if p.gender not in ("F", "M"):
        problems.append(f"gender must be F or M, got {p.gender!r}")
    if not (p.birth_date < p.issue_date < p.expiry_date):
        problems.append("dates must satisfy birth < issue < expiry")
    age_days = (p.issue_date - p.birth_date).days
    if not (0 <= age_days <= 120 * 366):
        problems.append("age at issue outside [0, 120] years")
    if not p.document_number.isdigit():
        problems.append(f"document_number must be digits: {p.document_number!r}")
    if not (RUN_MIN <= p.run_number <= RUN_MAX):
        problems.append(f"run_number out of range: {p.run_number}")
    elif p.run_check != run_check_digit(p.run_number):
        problems.append(f"run_check {p.run_check!r} inconsistent with run_number")
    return problems


def run_check_digit(number: int) -> str:
    """Modulo-11 check digit for a Chilean RUN.

    Digits are weighted right-to-left with the cycle 2,3,4,5,6,7;
    dv = 11 - (sum mod 11), shown as '0' for 11 and 'K' for 10.
    """
    if not isinstance(number, int) or not (RUN_MIN <= number <= RUN_MAX):
        raise RangeError(f"RUN must be an integer in [{RUN_MIN}, {RUN_MAX}], got {number!r}")
    total = 0
    weight = 2
    n = number
    while n > 0:
        total += (n % 10) * weight
        n //= 10
        weight = 2 if weight == 7 else weight + 1
    dv = 11 - (total % 11)
    if dv == 11:
        return "0"
    if dv == 10:
        return "K"
    return str(dv)


def format_run(number: int, check: str) -> str:
    """Format a RUN for display, e.g. (12345678, '5') -> '12.345.678-5'."""
    expected = run_check_digit(number)
    if check != expected:
        raise MismatchError(f"check digit {check!r} does not match {number} (expected {expected!r})")
    digits = str(number)
    groups = []
    while digits:
        groups.append(digits[-3:])
        digits = digits[:-3]
    return ".".join(reversed(groups)) + "-" + check


def mrz_check_digit(field: str) -> str:
    """ICAO 9303 check digit: values A=10..Z=35, digits face value, '<'=0;
    weights cycle 7,3,1; result is the weighted sum mod 10."""
    if not MRZ_ALPHABET.match(field):
        raise AlphabetError(f"MRZ field has characters outside A-Z, 0-9, '<': {field!r}")
    weights = (7, 3, 1)
    total = 0
    for i, ch in enumerate(field):
        if ch == "<":
            value = 0
        elif ch.isdigit():
            value = int(ch)
        else:
            value = ord(ch) - ord("A") + 10
        total += value * weights[i % 3]
    return str(total % 10)


def _mrz_transliterate(name: str) -> str:
    """Map a card name onto the MRZ alphabet: Ñ->N, space/hyphen -> '<'."""
    out = []
    for ch in name:
        if ch == "Ñ":
            out.append("N")
        elif ch in (" ", "-"):
            out.append("<")
        elif "A" <= ch <= "Z":
            out.append(ch)
        # anything else is dropped
    return "".join(out).strip("<")


def _mrz_date(d: dt.date) -> str:
    return d.strftime("%y%m%d")


def mrz_td1(p: Persona) -> MrzBlock:
    """Build the TD1 3x30 MRZ for a persona.

    Line 1 carries the document number (Chile issues the card, so the
    issuing state is always CHL) with the RUN in the optional-data field;
    line 2 carries birth/expiry dates, gender, nationality and the
    composite check digit; line 3 carries the names.
    """
    surname = _mrz_transliterate(p.surnames)
    given = _mrz_transliterate(p.given_names)
    if not surname or not given:
        raise EncodingError("name transliterates to empty MRZ field")

    doc = p.document_number[:9].ljust(9, "<")
    optional1 = (str(p.run_number) + p.run_check)[:15].ljust(15, "<")
    line1 = "ID" + "CHL" + doc + mrz_check_digit(doc) + optional1

    birth = _mrz_date(p.birth_date)
    expiry = _mrz_date(p.expiry_date)
    nat_code = _NATIONALITY_CODES.get(p.nationality) or (_mrz_transliterate(p.nationality) + "XXX")[:3]
    optional2 = "<" * 11
    line2_head = (birth + mrz_check_digit(birth) + p.gender
                  + expiry + mrz_check_digit(expiry) + nat_code + optional2)
    composite_input = line1[5:30] + line2_head[0:7] + line2_head[8:15] + line2_head[18:29]
    line2 = line2_head + mrz_check_digit(composite_input)

    line3 = (surname + "<<" + given)[:30].ljust(30, "<")

    block = MrzBlock((line1, line2, line3))
    assert all(len(line) == 30 for line in block.lines)
    return block


def mrz_validate(block: MrzBlock) -> list[str]:
    """Recompute every embedded TD1 check digit; empty list means self-valid."""
    l1, l2, l3 = block.lines
    problems = []
    for line in block.lines:
        if len(line) != 30 or not MRZ_ALPHABET.match(line):
            problems.append(f"malformed MRZ line: {line!r}")
    if problems:
        return problems
    if mrz_check_digit(l1[5:14]) != l1[14]:
        problems.append("document number check digit invalid")
    if mrz_check_digit(l2[0:6]) != l2[6]:
        problems.append("birth date check digit invalid")
    if mrz_check_digit(l2[8:14]) != l2[14]:
        problems.append("expiry date check digit invalid")
    composite_input = l1[5:30] + l2[0:7] + l2[8:15] + l2[18:29]
    if mrz_check_digit(composite_input) != l2[29]:
        problems.append("composite check digit invalid")
    return problems


def generate_persona(seed: int, profile: str) -> Persona:
    """Deterministically generate a valid persona for (seed, profile).

    profile "citizen" yields nationality CHILENA; "extranjero" draws a
    non-Chilean nationality from a fixed list. The RUN is uniform in
    [4,000,000, 28,000,000].
    """
    if profile not in PROFILES:
        raise InvariantError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    rng = random.Random(mix_seed(seed, PROFILES.index(profile)))

    gender = rng.choice("FM")
    pool = GIVEN_NAMES_F if gender == "F" else GIVEN_NAMES_M
    given_names = " ".join(rng.sample(pool, 2))
    surnames = " ".join(rng.sample(SURNAMES, 2))

    issue = dt.date(rng.randint(2016, 2024), rng.randint(1, 12), rng.randint(1, 28))
    age_years = rng.randint(18, 90)
    birth = issue - dt.timedelta(days=age_years * 365 + rng.randint(0, 364))
    expiry = issue + dt.timedelta(days=10 * 365)

    if profile == "citizen":
        nationality = CHILEAN_NATIONALITY[0]
    else:
        nationality = rng.choice(FOREIGN_NATIONALITIES)[0]

    run_number = rng.randint(4_000_000, 28_000_000)
    persona = Persona(
        surnames=surnames,
        given_names=given_names,
        nationality=nationality,
        gender=gender,
        birth_date=birth,
        document_number=str(rng.randint(100_000_000, 999_999_999)),
        issue_date=issue,
        expiry_date=expiry,
        run_number=run_number,
        run_check=run_check_digit(run_number),
    )
    problems = validate_persona(persona)
    if problems:  # pragma: no cover - generation is constructed to be valid
        raise InvariantError("; ".join(problems))
    return persona


FACE_ETHNICITIES = ("Chilean", "Argentinian", "Peruvian", "Bolivian",
                    "Colombian", "Venezuelan", "Spanish", "Brazilian")
HAIR_COLORS = ("dark brown", "black", "brown", "light brown", "blonde", "gray")
HAIR_STYLES_F = ("short haircut", "long straight hair", "curly hair", "tied-back hair")
HAIR_STYLES_M = ("short haircut", "buzz cut", "short beard", "clean shaven")


def generate_face_attributes(seed: int) -> FaceAttributes:
    """Deterministic face-prompt attributes for a seed."""
    rng = random.Random(mix_seed(seed, 97))
    gender = rng.choice("FM")
    styles = HAIR_STYLES_F if gender == "F" else HAIR_STYLES_M
    return FaceAttributes(
        age_years=rng.randint(18, 80),
        ethnicity=rng.choice(FACE_ETHNICITIES),
        gender=gender,
        hair_color=rng.choice(HAIR_COLORS),
        hair_or_beard_style=rng.choice(styles),
    )


NEGATIVE_FACE_PROMPT = (
    "(deformed iris, deformed pupils, semi-realistic, CGI, 3D, render, "
    "sketch, cartoon, drawing, anime:1.4), text, close-up, cropped, out of "
    "frame, worst quality, low quality, jpeg artifacts, ugly, duplicate, "
    "morbid, mutilated, extra fingers, mutated hands, poorly drawn hands, "
    "poorly drawn face, mutation, deformed, blurry, dehydrated, bad anatomy, "
    "bad proportions, extra limbs, cloned face, disfigured, gross "
    "proportions, malformed limbs, missing arms, missing legs, extra arms, "
    "extra legs, fused fingers, too many fingers, long neck, hair in front "
    "of the eyes, hat, (shadows), (three-quarter pose), (face in "
    "profile:1.1), teeth, full body, side view."
)

_GENDER_WORDS = {"F": "female", "M": "male"}


def build_face_prompt(a: FaceAttributes, attire: str = "black suits") -> tuple[str, str]:
    """Positive/negative prompt pair for one face.

    The attire slot defaults to the published example wording.
    """
    if not (18 <= a.age_years <= 99):
        raise InvariantError(f"age_years out of [18, 99]: {a.age_years}")
    if a.gender not in _GENDER_WORDS:
        raise InvariantError(f"gender must be F or M, got {a.gender!r}")
    positive = (
        f"RAW front photo, face portrait photo of ({a.age_years} years old:1.1), "
        f"{a.ethnicity} ({_GENDER_WORDS[a.gender]}:1.1), {a.hair_color} hair, "
        f"({a.hair_or_beard_style}:1.1), neutral expression, wearing {attire}, "
        f"(white background:1.4), head horizontally aligned, "
        f"(uniform lighting:1.4), top of the hair visible, photo for ID."
    )
    return positive, NEGATIVE_FACE_PROMPT


def format_date_display(d: dt.date) -> str:
    """Card date format: 'DD MMM YYYY' with Spanish month abbreviations."""
    return f"{d.day:02d} {SPANISH_MONTHS[d.month - 1]} {d.year}"


def display_fields(p: Persona, date_format=format_date_display) -> dict[str, str]:
    """The exact strings rendered onto a card, keyed by layout field_key."""
    return {
        "surnames": p.surnames,
        "given_names": p.given_names,
        "nationality": p.nationality,
        "gender": p.gender,
        "birth_date": date_format(p.birth_date),
        "document_number": p.document_number,
        "issue_date": date_format(p.issue_date),
        "expiry_date": date_format(p.expiry_date),
        "run": format_run(p.run_number, p.run_check),
        "mrz": "\n".join(mrz_td1(p).lines),
    }


def build_card_prompt(p: Persona, date_format=format_date_display) -> str:
    """One-line document prompt naming every variable card field in order."""
    fields = display_fields(p, date_format)
    return (
        f"Chile ID card with surnames {fields['surnames']}, "
        f"names {fields['given_names']}, "
        f"nationality {fields['nationality']}, "
        f"gender {fields['gender']}, "
        f"date of birth {fields['birth_date']}, "
        f"document number {fields['document_number']}, "
        f"issuance date {fields['issue_date']}, "
        f"expiration date {fields['expiry_date']}, "
        f"RUN {fields['run']}."
    )


def persona_json_dict(p: Persona, date_format=format_date_display) -> dict:
    """Sidecar-serializable persona: ISO dates plus the displayed strings."""
    return {
        "surnames": p.surnames,
        "given_names": p.given_names,
        "nationality": p.nationality,
        "gender": p.gender,
        "birth_date": p.birth_date.isoformat(),
        "document_number": p.document_number,
        "issue_date": p.issue_date.isoformat(),
        "expiry_date": p.expiry_date.isoformat(),
        "run_number": p.run_number,
        "run_check": p.run_check,
        "displayed": display_fields(p, date_format),
    }
