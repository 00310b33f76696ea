"""
Error types and error handling utilities for holomorphic portrait analysis
"""

import logging
import traceback
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class HoloError(Exception):
    """Base class for every error raised by the analysis modules"""

    exit_code = 3
    severity = "medium"


# Input errors (exit 2)

class FieldParseError(HoloError):
    exit_code = 2
    severity = "low"


class ExprSyntaxError(FieldParseError):
    """Malformed field expression, carrying the offending position"""

    def __init__(self, message: str, text: str = "", position: int = 0,
                 expected: Optional[str] = None):
        self.text = text
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)

    def caret(self) -> str:
        """Two-line rendering of the expression with a caret under the error"""
        return f"{self.text}\n{' ' * self.position}^"


class NotRecognizedForm(FieldParseError):
    pass


class ConfigError(HoloError):
    exit_code = 2
    severity = "low"


# Domain errors (exit 3)

class DomainError(HoloError):
    pass


class DegenerateField(DomainError):
    pass


class UnsupportedKind(DomainError):
    pass


class EssentialNotSupported(UnsupportedKind):
    pass


class PoleEvaluation(DomainError):
    def __init__(self, message: str, pole: complex):
        self.pole = pole
        super().__init__(message)


class NotSimple(DomainError):
    pass


class WrongDegree(DomainError):
    pass


class OrderMismatch(DomainError):
    pass


class IllConditioned(DomainError):
    pass


class DegenerateEquator(DomainError):
    pass


class BadStart(DomainError):
    pass


class SingularPath(DomainError):
    pass


class CriticalPointHit(DomainError):
    def __init__(self, message: str, point: complex):
        self.point = point
        super().__init__(message)


# Numerical failures (exit 3)

class NumericError(HoloError):
    severity = "high"


class NonConvergence(NumericError):
    def __init__(self, message: str, best: Any = None, residual: float = float("nan")):
        self.best = best
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class NoRotation(NumericError):
    pass


class GridEscape(NumericError):
    pass


class BranchJump(NumericError):
    def __init__(self, message: str, index: int):
        self.index = index
        super().__init__(message)


class InconclusiveLimit(NumericError):
    pass


class Undetermined(InconclusiveLimit):
    pass


class NoMatch(NumericError):
    def __init__(self, message: str, nearest: Optional[str] = None,
                 diff: Optional[Dict[str, Any]] = None):
        self.nearest = nearest
        self.diff = diff or {}
        super().__init__(message)


# Output errors (exit 4)

class OutputError(HoloError):
    exit_code = 4
    severity = "high"


class ErrorHandler:
    """Turns exceptions into structured reports with user-facing hints"""

    def __init__(self):
        self.error_callbacks: List[Callable[[Dict[str, Any]], None]] = []

    def handle_error(self, error: Exception, context: str = "") -> Dict[str, Any]:
        """Log an error and describe it for the user"""
        error_info = {
            'timestamp': datetime.now().isoformat(),
            'error_type': type(error).__name__,
            'error_message': str(error),
            'context': context,
            'traceback': traceback.format_exc(),
            'user_friendly_message': self._get_user_friendly_message(error, context),
            'recovery_suggestions': self._get_recovery_suggestions(error, context),
            'severity': self._get_error_severity(error),
            'exit_code': self.exit_code_for(error),
        }

        logger.error(f"Error in {context or 'analysis'}: {error}")
        logger.debug(f"Full traceback: {error_info['traceback']}")

        for callback in self.error_callbacks:
            try:
                callback(error_info)
            except Exception as callback_error:
                logger.error(f"Error in error callback: {callback_error}")

        return error_info

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        if isinstance(error, HoloError):
            return error.exit_code
        if isinstance(error, OSError):
            return 4
        return 1

    def _get_user_friendly_message(self, error: Exception, context: str) -> str:
        error_type = type(error).__name__

        error_messages = {
            'ExprSyntaxError': {
                'default': 'The field expression could not be parsed.',
            },
            'NotRecognizedForm': {
                'default': 'The expression is not a polynomial, inverse polynomial, '
                           'conjugate polynomial, Moebius or essential demo field.',
            },
            'DegenerateField': {
                'default': 'The field is degenerate (zero, constant, or AD - BC = 0).',
            },
            'NonConvergence': {
                'default': 'A numerical iteration did not converge.',
                'roots': 'The polynomial root finder did not converge.',
            },
            'InconclusiveLimit': {
                'default': 'A trajectory could not be followed to its limit set.',
                'classify': 'Some separatrices were left unresolved; the label is tentative.',
            },
            'NoMatch': {
                'default': 'The computed signature matches no catalog portrait.',
            },
            'OSError': {
                'default': 'Reading or writing a file failed.',
                'render': 'The SVG file could not be written.',
            },
        }

        if error_type in error_messages:
            messages = error_messages[error_type]
            return messages.get(context, messages['default'])
        if isinstance(error, HoloError):
            return str(error)
        return f"An unexpected error occurred: {error}"

    def _get_recovery_suggestions(self, error: Exception, context: str) -> List[str]:
        suggestions = []

        if isinstance(error, ExprSyntaxError):
            suggestions.extend([
                "Write complex literals with an explicit i suffix, e.g. (3+2i)",
                "Use ^ for integer powers and * or juxtaposition for products",
            ])
        elif isinstance(error, NotRecognizedForm):
            suggestions.append("Use 1/(...) for inverse fields, conj(...) for conjugate "
                               "fields and moebius(A;B;C;D) for Moebius fields")
        elif isinstance(error, (NonConvergence, InconclusiveLimit)):
            suggestions.extend([
                "Tighten --rtol/--atol or raise --tcap",
                "Check whether the field sits on a bifurcation boundary",
            ])
        elif isinstance(error, PoleEvaluation):
            suggestions.append(f"Move the start point away from the pole at {error.pole}")
        elif isinstance(error, OSError):
            suggestions.append("Check that the output directory exists and is writable")

        suggestions.append("Re-run with --verbose for the full log")
        return suggestions

    def _get_error_severity(self, error: Exception) -> str:
        if isinstance(error, (KeyboardInterrupt, SystemExit)):
            return 'critical'
        if isinstance(error, HoloError):
            return error.severity
        if isinstance(error, OSError):
            return 'high'
        return 'low'

    def add_error_callback(self, callback: Callable[[Dict[str, Any]], None]):
        """Add a callback invoked with every error report"""
        self.error_callbacks.append(callback)


# Global error handler instance
error_handler = ErrorHandler()


def safe_execute(func: Callable, *args, context: str = "", **kwargs) -> Dict[str, Any]:
    """Run func and wrap the outcome in a success/result/error dict"""
    try:
        result = func(*args, **kwargs)
        return {
            'success': True,
            'result': result,
            'error': None
        }
    except HoloError as e:
        error_info = error_handler.handle_error(e, context)
        return {
            'success': False,
            'result': None,
            'error': error_info
        }
