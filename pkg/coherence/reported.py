"""Published experimental values of the two-photon coherence experiment.

Each correlator entry is (value, uncertainty). These numbers are hardware data; the
simulator reproduces their statistical envelope, not the values themselves.
"""
import math

from coherence.qstate import visibility_for_fidelity

# <ZZ> and <AA> on the |01> and |10> sources, shared by the X and Y tables
ZZ_01 = (-0.9967, 0.0005)
ZZ_10 = (-0.9912, 0.0007)
AA_01 = (0.0625, 0.0084)
AA_10 = (0.0317, 0.0080)

SUPERPOSED_XX = {
    math.pi / 12: (0.4944, 0.0081),
    math.pi / 8: (0.7076, 0.0057),
    math.pi / 6: (0.8685, 0.0039),
    math.pi / 4: (0.9949, 0.0006),
}

SUPERPOSED_YY = {
    math.pi / 12: (0.4937, 0.0100),
    math.pi / 8: (0.7203, 0.0083),
    math.pi / 6: (0.8566, 0.0052),
    math.pi / 4: (0.9885, 0.0011),
}

SUPERPOSED_ZZ = {
    math.pi / 12: (-0.9958, 0.0007),
    math.pi / 8: (-0.9806, 0.0013),
    math.pi / 6: (-0.9777, 0.0014),
    math.pi / 4: (-0.9973, 0.0004),
}

GAME_P_WIN_X = {
    math.pi / 12: (0.5500, 0.0031),
    math.pi / 8: (0.5767, 0.0028),
    math.pi / 6: (0.5968, 0.0025),
    math.pi / 4: (0.6126, 0.0021),
}

GAME_P_WIN_Z = {
    math.pi / 12: (0.6240, 0.0002),
    math.pi / 8: (0.6259, 0.0003),
    math.pi / 6: (0.6263, 0.0003),
    math.pi / 4: (0.6238, 0.0002),
}

STATE_FIDELITIES = {
    "psi01": (0.9973, 0.0004),
    "psi00(pi/12)": (0.9946, 0.0008),
    "psi00(pi/8)": (0.9686, 0.0013),
    "psi00(pi/6)": (0.9771, 0.0008),
    "psi00(pi/4)": (0.9937, 0.0017),
    "psi10": (0.9939, 0.0001),
}

VISIBILITY_HV = (0.9966, 0.0008)
VISIBILITY_DA = (0.9802, 0.0020)


def lookup(table: dict[float, tuple[float, float]], theta: float) -> tuple[float, float] | None:
    """Entry for ``theta`` when it is one of the measured angles."""
    for angle, entry in table.items():
        if math.isclose(angle, theta, abs_tol=1e-9):
            return entry
    return None


def observed_paradox_values(theta: float, axis: str) -> dict[tuple[str, str], float] | None:
    """Measured values keyed like the constraints of the coherence paradox at ``theta``."""
    superposed = lookup(SUPERPOSED_XX if axis.upper() == "X" else SUPERPOSED_YY, theta)
    if superposed is None:
        return None
    pair = axis.upper() * 2
    return {
        ("01", "ZZ"): ZZ_01[0],
        ("10", "ZZ"): ZZ_10[0],
        ("01", pair): AA_01[0],
        ("10", pair): AA_10[0],
        ("00", pair): superposed[0],
    }


def calibrated_visibilities() -> dict[str, float]:
    """Werner visibility per prepared state reproducing its measured fidelity."""
    return {label: visibility_for_fidelity(value) for label, (value, _) in STATE_FIDELITIES.items()}
