from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

from motivic_serre.ring import FormalClass, LPoly

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def lpolys(max_degree=6):
    return st.lists(rationals, max_size=max_degree + 1).map(LPoly)


monomials = st.lists(st.sampled_from(["s", "t", "u"]), max_size=3).map(tuple)


def formal_classes(max_terms=4):
    return st.dictionaries(monomials, lpolys(4), max_size=max_terms).map(FormalClass)


def sym(name, *coeffs):
    """[name] * (c0 + c1 L + ...)."""
    return FormalClass.symbol(name, LPoly(coeffs or (1,)))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


__all__ = ["Fraction", "rationals", "lpolys", "formal_classes", "sym", "ACCEPTANCE_LINES"]
