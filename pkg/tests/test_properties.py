"""
Property tests over randomly drawn spectra and matrices.
"""

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from niep.core.dispatcher import RunConfig, run
from niep.core.errors import EmptyInterval
from niep.core.layout import first_violation, realize_layout
from niep.core.matrix import (
    Matrix,
    Polynomial,
    UnitLowerTriangular,
    char_poly,
    is_nonnegative,
    similarity_transform,
    unit_lower_inverse,
)
from niep.core.scalar import ExactScalar, format_scalar, parse_scalar
from niep.core.solver import solve_layout
from niep.core.spectrum import format_spectrum, necessary_conditions
from niep.core.staircase import realize_one_positive
from niep.core.verification import verify_realization

from conftest import cell_layout, classified

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
negative_ints = st.integers(min_value=-6, max_value=-1)


@st.composite
def unit_lower(draw, size=st.integers(min_value=1, max_value=5)):
    n = draw(size)
    rows = [
        [draw(fractions) if j < i else (1 if j == i else 0) for j in range(n)]
        for i in range(n)
    ]
    return UnitLowerTriangular.from_rows(rows)


@st.composite
def upper_triangular(draw, n):
    return Matrix.from_rows(
        [[draw(fractions) if j >= i else 0 for j in range(n)] for i in range(n)]
    )


def _text(values) -> str:
    return ",".join(str(v) for v in values)


@st.composite
def one_positive_spectra(draw):
    negatives = draw(st.lists(st.integers(min_value=-6, max_value=0), min_size=1, max_size=5))
    perron = -sum(negatives) + draw(st.integers(min_value=1, max_value=4))
    return _text([perron, *negatives])


@st.composite
def two_positive_spectra(draw):
    negatives = draw(st.lists(negative_ints, min_size=2, max_size=6))
    mass = -sum(negatives)
    second = draw(st.integers(min_value=1, max_value=mass))
    perron = mass + draw(st.integers(min_value=0, max_value=3))
    return _text([perron, second, *negatives])


@st.composite
def k_positive_spectra(draw):
    negatives = draw(st.lists(negative_ints, min_size=3, max_size=5))
    positives = draw(st.lists(st.integers(min_value=1, max_value=3), min_size=2, max_size=2))
    perron = -sum(negatives) + sum(positives) + draw(st.integers(min_value=0, max_value=3))
    return _text([perron, *positives, *negatives])


@st.composite
def many_positive_spectra(draw):
    negatives = draw(st.lists(st.integers(min_value=-6, max_value=-2), min_size=2, max_size=3))
    count = draw(st.integers(min_value=len(negatives), max_value=7 - len(negatives)))
    positives = draw(
        st.lists(st.integers(min_value=1, max_value=2), min_size=count, max_size=count)
    )
    perron = -sum(negatives) + draw(st.integers(min_value=0, max_value=4))
    return _text([perron, *positives, *negatives])


@st.composite
def complex_spectra(draw):
    cells = draw(
        st.lists(
            st.tuples(
                st.integers(min_value=-3, max_value=-1), st.integers(min_value=1, max_value=3)
            ),
            min_size=1,
            max_size=2,
        )
    )
    negatives = draw(st.lists(negative_ints, min_size=0, max_size=2))
    mass = sum(2 * (mu - re) for re, mu in cells) - sum(negatives)
    perron = mass + draw(st.integers(min_value=0, max_value=4))
    values = [str(perron), *(str(v) for v in negatives)]
    for re, mu in cells:
        values += [f"{re}+{mu}i", f"{re}-{mu}i"]
    return ",".join(values)


realizable_spectra = st.one_of(
    one_positive_spectra(),
    two_positive_spectra(),
    k_positive_spectra(),
    many_positive_spectra(),
    complex_spectra(),
)


@st.composite
def conjugate_closed(draw):
    reals = draw(st.lists(fractions, min_size=0, max_size=4))
    pairs = draw(
        st.lists(
            st.tuples(fractions, st.fractions(min_value=Fraction(1, 12), max_value=20)),
            max_size=2,
        )
    )
    perron = 1 + sum(abs(x) for x in reals) + sum(abs(re) + mu for re, mu in pairs)
    values = [ExactScalar(perron), *(ExactScalar(x) for x in reals)]
    for re, mu in pairs:
        values += [ExactScalar(re, mu), ExactScalar(re, -mu)]
    return format_spectrum(values)


@st.composite
def block_matrices(draw):
    """Direct sums of [[a, b], [b, a]] and [c] blocks with their spectra."""
    small = st.integers(min_value=0, max_value=6)
    positive = st.integers(min_value=1, max_value=6)
    blocks = draw(st.lists(st.sampled_from(["pair", "single"]), min_size=1, max_size=4))
    matrix, spectrum = None, []
    for kind in blocks:
        if kind == "pair":
            a, b = draw(positive), draw(small)
            block = Matrix.from_rows([[a, b], [b, a]])
            spectrum += [a + b, a - b]
        else:
            c = draw(positive)
            block = Matrix.from_rows([[c]])
            spectrum.append(c)
        matrix = block if matrix is None else matrix.direct_sum(block)
    return matrix, spectrum


class TestAlgebraProperties:
    """Exact arithmetic identities."""

    @given(unit_lower())
    def test_unit_lower_inverse(self, L):
        """Test L·L⁻¹ = I for rational unit lower triangular L."""
        assert L @ unit_lower_inverse(L) == Matrix.identity(L.n)

    @given(fractions, fractions)
    def test_format_parse(self, re, im):
        """Test that a rendered Gaussian rational parses back to itself."""
        value, exact = parse_scalar(format_scalar(ExactScalar(re, im)))
        assert exact
        assert value == ExactScalar(re, im)

    @given(fractions, fractions, fractions, fractions)
    def test_add_then_subtract(self, a_re, a_im, b_re, b_im):
        """Test (a + b) - b == a for Gaussian rationals."""
        a, b = ExactScalar(a_re, a_im), ExactScalar(b_re, b_im)
        assert (a + b) - b == a

    @given(st.data())
    def test_similarity_keeps_char_poly(self, data):
        """Test that L·A·L⁻¹ has the characteristic polynomial of A."""
        L = data.draw(unit_lower())
        A = data.draw(upper_triangular(L.n))
        assert char_poly(similarity_transform(L, A)) == char_poly(A)
        assert char_poly(A) == Polynomial.from_roots(A.diagonal())


class TestSpectrumProperties:
    """Classification and necessary conditions."""

    @given(conjugate_closed())
    def test_classify_after_reserialization(self, text):
        """Test that classifying a re-rendered spectrum gives the same result."""
        c = classified(text)
        assert classified(format_spectrum(c.values)) == c

    @given(block_matrices())
    def test_nonnegative_matrix_passes_conditions(self, drawn):
        """Test that the spectrum of a nonnegative block matrix meets every condition."""
        M, spectrum = drawn
        assert is_nonnegative(M)[0]
        assert char_poly(M) == Polynomial.from_roots(spectrum)
        report = necessary_conditions(classified(_text(spectrum)))
        assert report.overall


class TestCertificateProperties:
    """Interval endpoints of the complex cell (6, -2 ± 2i)."""

    @pytest.mark.parametrize("endpoint", ["2", "3"])
    def test_endpoints_hold(self, endpoint):
        """Test that both ends of [2, 3] give a nonnegative C."""
        layout = cell_layout(**{"l.2.1": endpoint})
        outcome = solve_layout(layout)
        assert outcome.stage == "constant"
        assert first_violation(realize_layout(layout, outcome.values).C) is None

    @given(st.fractions(min_value=Fraction(1, 1000), max_value=1, max_denominator=1000))
    def test_past_endpoint_fails(self, eps):
        """Test that l pushed past either end by eps leaves a negative entry."""
        with pytest.raises(EmptyInterval):
            solve_layout(cell_layout(**{"l.2.1": 3 + eps}))
        with pytest.raises(EmptyInterval):
            solve_layout(cell_layout(**{"l.2.1": 2 - eps}))


@pytest.mark.slow
class TestRealizationProperties:
    """Randomized realization suites."""

    @settings(max_examples=40, deadline=None)
    @given(one_positive_spectra())
    def test_one_positive_always_realizes(self, text):
        """Test that every spectrum with one positive eigenvalue realizes and verifies."""
        c = classified(text)
        realization = realize_one_positive(c)
        assert verify_realization(realization, c.values).verified
        assert all(v >= 0 for row in realization.C.rows for v in row)

    @settings(max_examples=50, deadline=None)
    @given(two_positive_spectra())
    def test_two_positive_always_realizes(self, text):
        """Test that λ₂ up to the negative mass and λ₁ above it always realize."""
        assert run(RunConfig(spectrum=text, permutation_search=False)).exit_code == 0

    @settings(
        max_examples=500,
        deadline=None,
        suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
    )
    @given(realizable_spectra)
    def test_realization_invariants(self, text):
        """Test C = L·A·L⁻¹, trace(C) = s₁ and diag(A) = σ for every realizer family."""
        c = classified(text)
        report = run(RunConfig(spectrum=text, permutation_search=False))
        assume(report.exit_code == 0)
        r = report.realization
        assert similarity_transform(r.L, r.A) == r.C
        assert format_scalar(r.C.trace()) == format_scalar(c.s1)
        assert sorted(format_scalar(x) for x in r.A.diagonal()) == sorted(
            format_scalar(v) for v in c.values
        )
        assert is_nonnegative(r.C)[0]
        assert report.verification.verified
