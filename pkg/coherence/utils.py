"""Utility functions for angle parsing and formatting."""
import math
import re
from fractions import Fraction

import numpy as np

from coherence.errors import InvalidParameterError

_PI_FRACTION = re.compile(
    r"^(?P<sign>[+-]?)\s*(?P<num>\d+(?:\.\d+)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d+)?))?$"
)


def parse_angle(text: str) -> float:
    """
    Convert an angle written as a fraction of pi or as a decimal to radians.

    Examples:
        "pi/12" -> 0.2617993877991494
        "3pi/4" -> 2.356194490192345
        "-pi/6" -> -0.5235987755982988
        "0.5"   -> 0.5

    Args:
        text: Angle expression

    Returns:
        Angle in radians
    """
    cleaned = text.strip().lower().replace("π", "pi")
    match = _PI_FRACTION.match(cleaned)
    if match:
        num = float(match.group("num") or 1.0)
        den = float(match.group("den") or 1.0)
        if den == 0:
            raise InvalidParameterError(f"Zero denominator in angle '{text}'")
        value = num * math.pi / den
        return -value if match.group("sign") == "-" else value
    try:
        return float(cleaned)
    except ValueError:
        raise InvalidParameterError(f"Cannot parse angle '{text}'") from None


def parse_angle_grid(text: str) -> list[float]:
    """
    Parse a comma-separated angle list or a ``linspace:start:stop:num`` grid.

    Examples:
        "pi/12,pi/8,pi/6,pi/4" -> four angles
        "linspace:pi/24:11pi/24:11" -> eleven equally spaced angles

    Args:
        text: Grid expression

    Returns:
        Angles in radians, in the given order
    """
    text = text.strip()
    if not text:
        raise InvalidParameterError("Angle grid is empty")
    if text.lower().startswith("linspace:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidParameterError(f"Expected linspace:start:stop:num, got '{text}'")
        start, stop = parse_angle(parts[1]), parse_angle(parts[2])
        try:
            num = int(parts[3])
        except ValueError:
            raise InvalidParameterError(f"Grid size must be an integer in '{text}'") from None
        if num < 1:
            raise InvalidParameterError("Angle grid is empty")
        return [float(a) for a in np.linspace(start, stop, num)]
    angles = [parse_angle(part) for part in text.split(",") if part.strip()]
    if not angles:
        raise InvalidParameterError("Angle grid is empty")
    return angles


def format_angle(theta: float, max_denominator: int = 48) -> str:
    """
    Render an angle as a fraction of pi when it is one, otherwise as a decimal.

    Examples:
        math.pi / 12 -> "pi/12"
        3 * math.pi / 4 -> "3pi/4"
        0.3 -> "0.300000"
    """
    ratio = Fraction(theta / math.pi).limit_denominator(max_denominator)
    if math.isclose(float(ratio) * math.pi, theta, rel_tol=0.0, abs_tol=1e-12):
        if ratio == 0:
            return "0"
        num = "" if abs(ratio.numerator) == 1 else str(abs(ratio.numerator))
        sign = "-" if ratio < 0 else ""
        den = "" if ratio.denominator == 1 else f"/{ratio.denominator}"
        return f"{sign}{num}pi{den}"
    return f"{theta:.6f}"
