from fractions import Fraction

from hypothesis import strategies as st

from patrolsched.core import ValueVector


def repair_composition(parts: list[int]) -> list[int]:
    """Move units from the largest part to the smallest until every part is
    at most half the total (needs three or more parts, or an even total)."""
    total = sum(parts)
    if len(parts) == 2 and total % 2:
        raise ValueError("two parts of an odd total cannot both be at most half")
    parts = list(parts)
    while 2 * max(parts) > total:
        parts[parts.index(max(parts))] -= 1
        parts[parts.index(min(parts))] += 1
    return parts


def _denominator(n: int, den: int) -> int:
    return den - 1 if n == 2 and den % 2 else den


def random_value_vector(rng, max_n: int = 8, max_den: int = 64) -> ValueVector:
    """A random value vector with n <= max_n and a common denominator <= max_den."""
    n = int(rng.integers(2, max_n + 1))
    den = _denominator(n, int(rng.integers(n, max_den + 1)))
    cuts = sorted(rng.choice(range(1, den), size=n - 1, replace=False).tolist())
    parts = repair_composition([b - a for a, b in zip([0] + cuts, cuts + [den])])
    return ValueVector([Fraction(p, den) for p in parts])


@st.composite
def value_vectors(draw, max_n: int = 8, max_den: int = 64):
    n = draw(st.integers(2, max_n))
    den = _denominator(n, draw(st.integers(n, max_den)))
    cuts = sorted(draw(st.lists(st.integers(1, den - 1), min_size=n - 1, max_size=n - 1, unique=True)))
    parts = repair_composition([b - a for a, b in zip([0] + cuts, cuts + [den])])
    return ValueVector([Fraction(p, den) for p in parts])


# One PASS/FAIL line per acceptance criterion, repeated in the run summary so
# the verdicts are visible even when pytest captures test output.
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
