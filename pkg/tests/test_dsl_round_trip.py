"""Catalog scripts elaborate to exactly the bundles the catalog builders produce."""
import logging
import os

import pytest

from grassmann_engine.catalog import SCRIPTS_DIR, THETA_WITNESS, all_cases, build_case
from grassmann_engine.errors import (
    DslBindingError,
    DslElaborationError,
    DslLexError,
    DslSyntaxError,
)
from grassmann_engine.spec_dsl import load_spec

logger = logging.getLogger(__name__)


class TestCatalogScripts:
    @pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.id)
    def test_script_matches_builder(self, case):
        spec = load_spec(case.script_path())
        expected = build_case(case.id)
        assert spec.space == expected.space
        assert spec.bundle.rank == 2
        assert spec.bundle.same_subbundle(expected)

    def test_alpha_family_follows_theta(self):
        case_id = "T1.3-3"
        script = os.path.join(SCRIPTS_DIR, f"{case_id}.gsl")
        moved = load_spec(script, THETA_WITNESS)
        assert moved.bundle.same_subbundle(build_case(case_id, THETA_WITNESS))
        assert not moved.bundle.same_subbundle(build_case(case_id))
        logger.info("theta family checked at %s", THETA_WITNESS)


class TestErrorScripts:
    @pytest.mark.parametrize(
        "name,error",
        [
            ("lex_error.gsl", DslLexError),
            ("syntax_error.gsl", DslSyntaxError),
            ("duplicate_binding.gsl", DslBindingError),
            ("undefined_identifier.gsl", DslBindingError),
            ("dependent_sections.gsl", DslElaborationError),
            ("dimension_mismatch.gsl", DslElaborationError),
            ("weight_conflict.gsl", DslElaborationError),
            ("zero_section.gsl", DslElaborationError),
            ("zero_power_zero.gsl", DslElaborationError),
            ("deep_nesting.gsl", DslSyntaxError),
        ],
    )
    def test_error_class(self, name, error):
        with pytest.raises(error):
            load_spec(os.path.join(SCRIPTS_DIR, "errors", name))
