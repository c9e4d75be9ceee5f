from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from propcalc import linalg


def _columns(matrix):
    """Column-stored map from a list of rows; columns c0.., rows r0.."""
    cols = {}
    for i, row in enumerate(matrix):
        for j, value in enumerate(row):
            if value:
                cols.setdefault(f"c{j}", {})[f"r{i}"] = Fraction(value)
    return cols


small_matrices = st.integers(min_value=1, max_value=4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=4)
)


class TestVector:
    def test_drops_zeros(self):
        assert linalg.vector({"a": 0, "b": "1/2"}) == {"b": Fraction(1, 2)}

    def test_pairs_accumulate(self):
        assert linalg.vector([("a", 1), ("a", -1), ("b", 2)]) == {"b": Fraction(2)}

    def test_add_into_cancels(self):
        v = {"a": Fraction(1)}
        linalg.add_into(v, {"a": Fraction(1)}, -1)
        assert v == {}

    def test_combine(self):
        v = linalg.combine([(2, {"a": Fraction(1)}), (1, {"a": Fraction(-1), "b": Fraction(3)})])
        assert v == {"a": Fraction(1), "b": Fraction(3)}

    def test_vectors_equal_ignores_explicit_zero(self):
        assert linalg.vectors_equal({"a": Fraction(0)}, {})


class TestRankAndKernel:
    def test_rank_of_dependent_columns(self):
        cols = {"a": {"x": Fraction(1)}, "b": {"x": Fraction(2)}}
        assert linalg.rank(cols, ["a", "b"]) == 1

    def test_kernel_has_identity_on_free_labels(self):
        cols = {"a": {"x": Fraction(1)}, "b": {"x": Fraction(2)}}
        assert linalg.kernel(cols, ["a", "b"]) == [("b", {"b": Fraction(1), "a": Fraction(-2)})]

    def test_zero_map_kernel_is_everything(self):
        assert [free for free, _ in linalg.kernel({}, ["a", "b"])] == ["a", "b"]

    @given(small_matrices)
    def test_rank_matches_dense_elimination(self, matrix):
        cols = _columns(matrix)
        source = [f"c{j}" for j in range(len(matrix[0]))]
        rows = [f"r{i}" for i in range(len(matrix))]
        assert linalg.rank(cols, source) == linalg.dense_rank(linalg.to_dense(cols, rows, source))

    @given(small_matrices)
    def test_kernel_vectors_map_to_zero(self, matrix):
        cols = _columns(matrix)
        source = [f"c{j}" for j in range(len(matrix[0]))]
        basis = linalg.kernel(cols, source)
        assert len(basis) == len(source) - linalg.rank(cols, source)
        for _, v in basis:
            assert linalg.apply(cols, v) == {}


class TestSolve:
    def test_consistent_system(self):
        x, witness = linalg.solve({"a": {"r": Fraction(1)}}, {"r": Fraction(3)}, ["a"])
        assert x == {"a": Fraction(3)}
        assert witness is None

    def test_free_variables_are_zero(self):
        cols = {"a": {"r": Fraction(1)}, "b": {"r": Fraction(1)}}
        x, _ = linalg.solve(cols, {"r": Fraction(2)}, ["a", "b"])
        assert x == {"a": Fraction(2)}

    def test_inconsistent_system_has_witness(self):
        cols = {"a": {"r": Fraction(1), "s": Fraction(1)}}
        rhs = {"r": Fraction(1)}
        x, witness = linalg.solve(cols, rhs, ["a"])
        assert x is None
        assert witness
        annihilates = sum(witness.get(row, 0) * c for row, c in cols["a"].items())
        assert annihilates == 0
        assert sum(witness.get(row, 0) * c for row, c in rhs.items()) != 0

    @given(small_matrices, st.lists(st.integers(-2, 2), min_size=4, max_size=4))
    def test_solution_reproduces_rhs(self, matrix, coefficients):
        cols = _columns(matrix)
        source = [f"c{j}" for j in range(len(matrix[0]))]
        rhs = linalg.apply(cols, {s: Fraction(c) for s, c in zip(source, coefficients)})
        x, witness = linalg.solve(cols, rhs, source)
        assert witness is None
        assert linalg.vectors_equal(linalg.apply(cols, x), rhs)

    @given(small_matrices)
    def test_kernel_dimension_matches_dense_kernel(self, matrix):
        cols = _columns(matrix)
        source = [f"c{j}" for j in range(len(matrix[0]))]
        rows = [f"r{i}" for i in range(len(matrix))]
        dense = linalg.to_dense(cols, rows, source)
        dense_basis = linalg.dense_kernel(dense)
        assert len(dense_basis) == len(linalg.kernel(cols, source))
        for v in dense_basis:
            assert all(x == 0 for x in dense.dot(v))
