"""Packaged case-study data: models, stakeholder referents, and scenarios."""

from __future__ import annotations

from importlib import resources

from ..dsl import parse_model, parse_referent, parse_scenarios
from ..model import EdmModel
from ..validator import Referent

CASE_MODEL = "patient_case.model"
CASE_MODEL_REVISED = "patient_case_revised.model"
REFERENTS = ("patient_advocate.ref", "clinician.ref", "hospital_board.ref")
CASE_SCENARIO = "patient_case.scn"
CASE_SCENARIO_REVISED = "patient_case_revised.scn"


def read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def data_path(name: str) -> str:
    """Filesystem path of a packaged data file (they ship as plain files)."""
    return str(resources.files(__package__).joinpath(name))


def load_case_model() -> EdmModel:
    return parse_model(read_text(CASE_MODEL))


def load_revised_model() -> EdmModel:
    return parse_model(read_text(CASE_MODEL_REVISED))


def load_referents() -> tuple[Referent, ...]:
    return tuple(parse_referent(read_text(name)) for name in REFERENTS)


def load_case_scenarios() -> list[dict[str, float]]:
    return parse_scenarios(read_text(CASE_SCENARIO))


def load_revised_scenarios() -> list[dict[str, float]]:
    return parse_scenarios(read_text(CASE_SCENARIO_REVISED))
