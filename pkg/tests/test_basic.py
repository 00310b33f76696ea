"""
Test suite for the analyzer front door and the error handling system
"""

import io
import json
import math
from pathlib import Path

import pytest
from jsonschema import Draft7Validator

from src.core import PortraitAnalyzer, setup_logging
from utils.config import AnalysisConfig
from utils.error_handler import (ErrorHandler, ExprSyntaxError, HoloError, NoMatch, OutputError,
                                 PoleEvaluation, safe_execute)
from utils.fieldspec import parse_field


class TestImports:
    """Test that all modules can be imported correctly"""

    def test_core_imports(self):
        """Test core module imports"""
        try:
            import src.core as core
            assert hasattr(core, 'PortraitAnalyzer')
        except ImportError as e:
            pytest.fail(f"Failed to import core module: {e}")

    def test_cli_imports(self):
        """Test CLI module imports"""
        try:
            import src.cli as cli
            assert hasattr(cli, 'cli')
        except ImportError as e:
            pytest.fail(f"Failed to import cli module: {e}")

    def test_utils_imports(self):
        """Test utility module imports"""
        utils_modules = [
            'utils.cpoly',
            'utils.fieldspec',
            'utils.local',
            'utils.infinity',
            'utils.integrals',
            'utils.flow',
            'utils.catalog',
            'utils.portrait',
            'utils.render_svg',
            'utils.config',
            'utils.error_handler',
        ]

        for module_name in utils_modules:
            try:
                module = __import__(module_name, fromlist=[''])
                assert module is not None
            except ImportError as e:
                pytest.fail(f"Failed to import {module_name}: {e}")


class TestErrorHandler:
    """Test error handling system"""

    def setup_method(self):
        """Setup test environment"""
        self.error_handler = ErrorHandler()

    def test_error_handling(self):
        """Test basic error handling"""
        test_error = ValueError("Test error")
        result = self.error_handler.handle_error(test_error, "test_context")

        for key in ('timestamp', 'error_type', 'error_message', 'context', 'traceback',
                    'user_friendly_message', 'recovery_suggestions', 'severity', 'exit_code'):
            assert key in result
        assert result['error_type'] == 'ValueError'
        assert result['error_message'] == 'Test error'
        assert result['context'] == 'test_context'
        assert result['exit_code'] == 1

    def test_user_friendly_messages(self):
        """Test user-friendly error messages"""
        result = self.error_handler.handle_error(ExprSyntaxError("bad", "z +* 2", 3), "analyze")
        assert 'could not be parsed' in result['user_friendly_message']
        assert any('i suffix' in s for s in result['recovery_suggestions'])

        result = self.error_handler.handle_error(NoMatch("no portrait", nearest='Q3'), "classify")
        assert 'no catalog portrait' in result['user_friendly_message']

    def test_context_specific_message(self):
        """Test messages that depend on where the error happened"""
        result = self.error_handler.handle_error(OSError("disk full"), "render")
        assert result['user_friendly_message'] == 'The SVG file could not be written.'
        assert result['exit_code'] == 4

    def test_pole_suggestion(self):
        """Test the suggestion names the offending pole"""
        result = self.error_handler.handle_error(PoleEvaluation("pole", 1 + 0j), "integrate")
        assert any('(1+0j)' in s for s in result['recovery_suggestions'])

    def test_exit_codes(self):
        """Test the exit code of each error group"""
        assert ErrorHandler.exit_code_for(ExprSyntaxError("bad")) == 2
        assert ErrorHandler.exit_code_for(NoMatch("none")) == 3
        assert ErrorHandler.exit_code_for(OutputError("cannot write")) == 4
        assert ErrorHandler.exit_code_for(RuntimeError("boom")) == 1

    def test_caret(self):
        """Test the caret points at the offending character"""
        error = ExprSyntaxError("unexpected '*'", "z +* 2", 3)
        assert error.caret() == "z +* 2\n   ^"


class TestErrorRecovery:
    """Test error recovery mechanisms"""

    def test_safe_execute_success(self):
        """Test a successful call is wrapped"""
        outcome = safe_execute(parse_field, "z^2", context='parse')
        assert outcome['success']
        assert outcome['error'] is None
        assert outcome['result'].degree == 2

    def test_safe_execute_failure(self):
        """Test analysis errors are turned into reports"""
        outcome = safe_execute(parse_field, "z +* 2", context='parse')
        assert not outcome['success']
        assert outcome['result'] is None
        assert outcome['error']['error_type'] == 'ExprSyntaxError'
        assert outcome['error']['context'] == 'parse'

    def test_safe_execute_passes_other_errors(self):
        """Test errors outside the analysis hierarchy propagate"""
        def boom():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            safe_execute(boom)

    def test_error_callbacks(self):
        """Test error callbacks"""
        handler = ErrorHandler()
        seen = []

        handler.add_error_callback(lambda info: seen.append(info['error_type']))
        handler.add_error_callback(lambda info: 1 / 0)
        handler.handle_error(NoMatch("none"), "test_context")

        assert seen == ['NoMatch']


class TestPortraitAnalyzer:
    """Test the analyzer used by the CLI"""

    def setup_method(self):
        """Setup test environment"""
        self.analyzer = PortraitAnalyzer(AnalysisConfig(threads=2))

    def test_setup_logging(self, tmp_path):
        """Test logging writes a file when a directory is given"""
        logger = setup_logging('DEBUG', tmp_path / 'logs')
        logger.info("hello")
        assert (tmp_path / 'logs' / 'holo.log').exists()
        setup_logging('INFO')

    def test_analyze_report(self):
        """Test the report of a quadratic field"""
        report = self.analyzer.analyze("z*(z-1)")
        assert set(report) == {'field', 'kind', 'equilibria', 'normal_forms', 'infinity',
                               'infinity_model', 'first_integral', 'classification', 'flags'}
        assert report['kind'] == 'polynomial'
        assert [e['id'] for e in report['equilibria']] == ['E0', 'E1']
        assert len(report['normal_forms']) == 2
        assert len(report['infinity']) == 2
        assert report['classification']['label'] == 'FF'
        assert report['flags'] == []

    def test_analyze_accepts_fields(self):
        """Test parsed fields are analyzed as given"""
        report = self.analyzer.analyze(parse_field("conj(z^2)"), classify=False)
        assert report['kind'] == 'conjugate'
        assert report['classification'] is None
        assert len(report['infinity']) == 6

    def test_analyze_essential(self):
        """Test the essential demo gets only local analysis"""
        report = self.analyzer.analyze("essential(1;2)")
        assert report['equilibria'] == []
        assert report['classification'] is None
        assert report['flags'] == ['essential singularity: local analysis only']

    def test_unmatched_portrait_is_flagged(self):
        """Test a failed match leaves the rest of the report intact"""
        report = self.analyzer.analyze("z^2*(z-1)^2")
        assert report['classification'] is None
        assert report['flags'][0].startswith('classification:')
        assert len(report['equilibria']) == 2

    def test_time_cap_leaves_connections_incomplete(self):
        """Test a tiny time cap flags the report instead of dropping separatrices"""
        analyzer = PortraitAnalyzer(AnalysisConfig(threads=2, t_cap=1e-3))
        report = analyzer.analyze("1/(z*(z-1))")
        assert 'separatrix connections incomplete' in report['flags']
        assert report['classification']['confidence'] == 'MultisetOnly'
        assert report['classification']['signature']['complete'] is False

    def test_analyze_many(self):
        """Test batch analysis keeps input order and reports failures"""
        reports = self.analyzer.analyze_many(["z^2", "z +* 2", "1/z^2"])
        assert reports[0]['classification']['label'] == 'DD'
        assert reports[1] == {'field': 'z +* 2', 'error': 'ExprSyntaxError',
                              'message': reports[1]['message'], 'exit_code': 2}
        assert reports[2]['classification']['label'] == 'S1'

    def test_integrate_rows(self):
        """Test trajectory rows stay on the circle for a center"""
        rows = self.analyzer.integrate("1i*z", 1 + 0j, 1.0)
        assert rows[0][:3] == (0.0, 1.0, 0.0)
        assert rows[-1][0] == pytest.approx(1.0)
        for _, x, y, H in rows:
            assert math.hypot(x, y) == pytest.approx(1.0, abs=1e-8)
            assert H == pytest.approx(rows[0][3], abs=1e-8)

    def test_write_rows(self):
        """Test CSV output leaves undefined values empty"""
        out = io.StringIO()
        PortraitAnalyzer.write_rows([(0.0, 1.0, 0.0, math.nan)], out)
        assert out.getvalue().splitlines() == ['t,x,y,H', '0.0,1.0,0.0,']

    def test_potential_grid(self):
        """Test the default window covers the equilibria"""
        grid = self.analyzer.potential_grid("z*(z-1)", n=5)
        assert grid.values.shape == (5, 5)
        assert grid.xs[-1] == pytest.approx(4.0)

    def test_render(self, tmp_path):
        """Test rendering writes the SVG file"""
        from utils.render_svg import RenderSpec

        path = tmp_path / 'portrait.svg'
        text = self.analyzer.render("1i*z", RenderSpec(sample_orbit_count=2), path)
        assert path.read_text() == text
        assert text.startswith('<?xml')

    def test_render_unwritable(self, tmp_path):
        """Test an unwritable target raises an output error"""
        from utils.render_svg import RenderSpec

        with pytest.raises(HoloError) as info:
            self.analyzer.render("1i*z", RenderSpec(sample_orbit_count=1),
                                 tmp_path / 'missing' / 'portrait.svg')
        assert info.value.exit_code == 4

    def test_catalog_rows(self):
        """Test catalog rows for one family and for all"""
        assert len(PortraitAnalyzer.catalog_rows('Moebius')) == 9
        assert len(PortraitAnalyzer.catalog_rows()) == 3 + 9 + 29 + 3 + 4 + 11 + 9


class TestReportSchema:
    """Test reports against the shipped JSON schema"""

    def setup_method(self):
        """Setup test environment"""
        path = Path(__file__).parent.parent / 'utils' / 'schemas' / 'report.schema.json'
        self.schema = json.loads(path.read_text())
        self.validator = Draft7Validator(self.schema)
        self.analyzer = PortraitAnalyzer()

    def _errors(self, report):
        return [f"{list(e.absolute_path)}: {e.message}"
                for e in self.validator.iter_errors(json.loads(json.dumps(report)))]

    def _check(self, report):
        assert self._errors(report) == []

    def test_polynomial_report(self):
        """Test a polynomial report validates against the schema"""
        self._check(self.analyzer.analyze("z*(z-1)*(z-2)"))

    def test_conjugate_report(self):
        """Test a conjugate report validates against the schema"""
        self._check(self.analyzer.analyze("conj(z^2)"))

    def test_inverse_report(self):
        """Test an inverse report with its model near infinity validates"""
        self._check(self.analyzer.analyze("1/(z^2+1)"))

    def test_moebius_report(self):
        """Test a Moebius report validates"""
        self._check(self.analyzer.analyze("(z+1)/(z-2)"))

    def test_essential_report(self):
        """Test the essential demo report validates"""
        self._check(self.analyzer.analyze("essential(1;2)"))

    def test_capped_report(self):
        """Test a report with unresolved separatrices validates"""
        analyzer = PortraitAnalyzer(AnalysisConfig(t_cap=1e-3))
        self._check(analyzer.analyze("1/(z*(z-1))"))

    def test_schema_rejects_bad_reports(self):
        """Test the schema catches a stray key and a malformed equilibrium"""
        report = self.analyzer.analyze("z*(z-1)", classify=False)
        report['extra'] = 1
        report['equilibria'][0]['id'] = 'X0'
        report['equilibria'][1]['z'] = [0.0]
        errors = self._errors(report)
        assert len(errors) == 3
        assert any('extra' in e for e in errors)
