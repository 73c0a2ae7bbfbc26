import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hadamard_outcome_law
from robust_qpke.bits import BitString
from robust_qpke.errors import (
    DimensionMismatch, EqualBasisStrings, FormatError, IndexOutOfRange, TooManyQubits,
    UnsupportedTermCount,
)
from robust_qpke.primitives import RngStream
from robust_qpke.qsim import (
    BasisPredicate, DenseState, Outcome, SparseState, apply_x, apply_z_phase,
    dense_from_sparse, dense_hadamard_distribution, dense_project, hadamard_law,
    make_basis, measure_computational, measure_hadamard_all, project, superpose2,
    walsh_hadamard,
)
from robust_qpke.stats import within_sigma

B = BitString.from_str


def terms_of(state):
    return {(str(b), s) for b, s in state.terms}


@st.composite
def small_states(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, 2))
    values = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=k, max_size=k, unique=True))
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=len(values), max_size=len(values)))
    return SparseState(n, tuple((BitString(v, n), s) for v, s in zip(values, signs)))


class TestPreparation:
    @pytest.mark.parametrize("text", ["000", "1", "1011"])
    def test_make_basis(self, text):
        s = make_basis(B(text))
        assert terms_of(s) == {(text, 1)}
        assert s.n_qubits == len(text)

    def test_superpose2_phases(self):
        assert terms_of(superpose2(B("000"), B("111"), 0)) == {("000", 1), ("111", 1)}
        assert terms_of(superpose2(B("000"), B("111"), 1)) == {("000", 1), ("111", -1)}

    def test_superpose2_equal_strings(self):
        with pytest.raises(EqualBasisStrings):
            superpose2(B("01"), B("01"), 0)

    def test_term_validation(self):
        with pytest.raises(UnsupportedTermCount):
            SparseState(2, ())
        with pytest.raises(UnsupportedTermCount):
            SparseState(2, ((B("00"), 1), (B("01"), 1), (B("10"), 1)))
        with pytest.raises(EqualBasisStrings):
            SparseState(2, ((B("00"), 1), (B("00"), -1)))
        with pytest.raises(DimensionMismatch):
            SparseState(3, ((B("00"), 1),))

    def test_text_round_trip(self):
        s = superpose2(B("0101"), B("1110"), 1)
        text = s.to_text()
        assert text.splitlines()[0] == "n=4 k=2"
        assert SparseState.from_text(text) == s

    def test_text_errors_name_line(self):
        with pytest.raises(FormatError, match="line 1"):
            SparseState.from_text("n=3\n+ 000")
        with pytest.raises(FormatError, match="line 2"):
            SparseState.from_text("n=3 k=1\n* 000")


class TestUnitaries:
    def test_z_examples(self):
        s = superpose2(B("000"), B("111"), 0)
        assert apply_z_phase(s, 0, 0) == s
        assert terms_of(apply_z_phase(s, 0, 1)) == {("000", 1), ("111", -1)}
        assert apply_z_phase(make_basis(B("011")), 0, 1) == make_basis(B("011"))

    def test_z_index_checked(self):
        with pytest.raises(IndexOutOfRange):
            apply_z_phase(make_basis(B("01")), 2, 1)

    @given(small_states(), st.data())
    def test_z_twice_is_identity(self, s, data):
        q = data.draw(st.integers(0, s.n_qubits - 1))
        assert apply_z_phase(apply_z_phase(s, q, 1), q, 1) == s

    def test_x_flips(self):
        assert apply_x(make_basis(B("010")), 0) == make_basis(B("110"))


class TestProject:
    def setup_method(self):
        self.valid = {B("0110"), B("1011")}
        self.pred = BasisPredicate(4, lambda x: x in self.valid)

    def test_all_valid_accepts_unchanged(self):
        s = superpose2(B("0110"), B("1011"), 1)
        out, post = project(s, self.pred, RngStream(0))
        assert out is Outcome.ACCEPT and post == s

    def test_invalid_rejects(self):
        out, post = project(make_basis(B("1000")), self.pred, RngStream(0))
        assert out is Outcome.REJECT and post is None

    def test_half_valid_matches_dense_born_rule(self):
        s = superpose2(B("0110"), B("1000"), 0)
        p_dense, post_dense = dense_project(dense_from_sparse(s), self.pred)
        assert abs(p_dense - 0.5) < 1e-12
        accepts = 0
        trials = 20000
        rng = RngStream(3)
        for _ in range(trials):
            out, post = project(s, self.pred, rng)
            if out is Outcome.ACCEPT:
                accepts += 1
                assert terms_of(post) == {("0110", 1)}
        assert np.allclose(dense_from_sparse(post).amplitudes, post_dense.amplitudes)
        assert within_sigma(accepts, trials, p_dense)

    def test_idempotent_on_accept(self):
        s = superpose2(B("0110"), B("1000"), 0)
        rng = RngStream(9)
        for _ in range(50):
            out, post = project(s, self.pred, rng)
            if out is Outcome.ACCEPT:
                assert project(post, self.pred, rng) == (Outcome.ACCEPT, post)

    def test_length_checked(self):
        with pytest.raises(DimensionMismatch):
            project(make_basis(B("01")), self.pred, RngStream(0))


class TestMeasurement:
    def test_computational_basis_state(self):
        assert measure_computational(make_basis(B("101")), RngStream(0)) == B("101")

    def test_computational_two_terms_frequency(self):
        s = superpose2(B("000"), B("111"), 1)
        rng = RngStream(11)
        n = 100_000
        ones = sum(measure_computational(s, rng) == B("111") for _ in range(n))
        assert within_sigma(ones, n, 0.5)

    def test_hadamard_support_sets(self):
        s0 = superpose2(B("000"), B("111"), 0)
        s1 = superpose2(B("000"), B("111"), 1)
        law0, law1 = hadamard_law(s0), hadamard_law(s1)
        support0 = {format(i, "03b") for i in range(8) if law0[i] > 0}
        support1 = {format(i, "03b") for i in range(8) if law1[i] > 0}
        assert support0 == {"000", "101", "110", "011"}
        assert support1 == {"100", "001", "010", "111"}
        assert np.allclose(law0[law0 > 0], 0.25)

    def test_hadamard_one_term_is_uniform(self):
        assert np.allclose(hadamard_law(make_basis(B("000"))), 1 / 8)

    def test_three_terms_unsupported(self):
        s = SparseState(2, ((B("00"), 1), (B("01"), 1), (B("10"), 1)), max_terms=3)
        with pytest.raises(UnsupportedTermCount):
            measure_hadamard_all(s, RngStream(0))

    @given(small_states(), st.integers(0, 2**32))
    @settings(max_examples=60)
    def test_every_sample_obeys_parity(self, s, seed):
        rng = RngStream(seed)
        if s.k == 2:
            delta = s.terms[0][0] ^ s.terms[1][0]
            phase = 0 if s.terms[0][1] == s.terms[1][1] else 1
            for _ in range(20):
                assert measure_hadamard_all(s, rng).dot(delta) == phase

    def test_sampling_is_seed_deterministic(self):
        s = superpose2(B("01101"), B("10011"), 1)
        a = [measure_hadamard_all(s, RngStream(5)) for _ in range(3)]
        assert a[0] == a[1] == a[2]


class TestDenseOracle:
    def test_dense_examples(self):
        assert np.allclose(dense_from_sparse(make_basis(B("0"))).amplitudes, [1, 0])
        v = dense_from_sparse(superpose2(B("0"), B("1"), 1)).amplitudes
        assert np.allclose(v, [2 ** -0.5, -(2 ** -0.5)])

    def test_basis_state_flat_spectrum(self):
        table = dense_hadamard_distribution(dense_from_sparse(make_basis(B("1011"))))
        assert np.allclose(table, 1 / 16)
        assert abs(table.sum() - 1) < 1e-9

    def test_wht_matches_kron_matrix(self):
        from oracles import hadamard_matrix

        rng = np.random.default_rng(0)
        v = rng.normal(size=32)
        v /= np.linalg.norm(v)
        assert np.allclose(walsh_hadamard(v), hadamard_matrix(5) @ v)

    @given(small_states())
    @settings(max_examples=150)
    def test_analytic_law_equals_dense(self, s):
        dense = dense_hadamard_distribution(dense_from_sparse(s))
        assert np.max(np.abs(hadamard_law(s) - dense)) <= 1e-9
        kron = hadamard_outcome_law(s.n_qubits, [(str(b), sg) for b, sg in s.terms])
        assert np.max(np.abs(dense - kron)) <= 1e-9

    def test_limits(self):
        with pytest.raises(TooManyQubits):
            dense_from_sparse(make_basis(BitString(0, 21)))
        with pytest.raises(ValueError):
            DenseState(1, np.array([1.0, 1.0]))
