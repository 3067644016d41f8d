from fractions import Fraction

import pytest

from nonrecurrent import parse_angle

TRIANGULAR = {k * (k + 1) // 2 for k in range(1, 200)}


def triangular_bits(n):
    """Digits of theta* straight from the position rule."""
    return "".join("1" if i in TRIANGULAR else "0" for i in range(1, n + 1))


def triangular_value(n=60):
    return sum(Fraction(1, 2**i) for i in range(1, n + 1) if i in TRIANGULAR)


def rational_bits(x: Fraction, n):
    """Long division; terminating form for dyadics."""
    x = Fraction(x) % 1
    out = []
    for _ in range(n):
        x *= 2
        out.append("1" if x >= 1 else "0")
        x -= int(x)
    return "".join(out)


@pytest.fixture(scope="session")
def theta_star():
    return parse_angle("rule:triangular")


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: dict = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
