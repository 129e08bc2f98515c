import numpy as np
import pytest

from oracles import bisect_nonneg_min, golden_minimize, poisson_code_objective
from stc.coder import (
    DocEncoding,
    Hyperparams,
    document_objective,
    encode_document,
    encode_document_supervised,
    update_document_code,
    update_word_code,
    update_word_code_element,
)
from stc.corpus import Document
from stc.numerics import project_rows_to_simplex


def doc_of(indices, counts):
    return Document(np.asarray(indices, dtype=np.int64), np.asarray(counts, dtype=np.int64))


class TestHyperparams:
    def test_defaults_resolve_gamma_rho(self):
        hp = Hyperparams(lam=0.3)
        assert hp.gamma == 0.3
        assert hp.rho == 0.3

    def test_explicit_override(self):
        hp = Hyperparams(lam=0.3, gamma=1.0, rho=2.0)
        assert hp.gamma == 1.0
        assert hp.rho == 2.0

    def test_rejects_zero_gamma(self):
        with pytest.raises(ValueError):
            Hyperparams(lam=0.1, gamma=0.0)

    def test_rejects_negative_lam(self):
        with pytest.raises(ValueError):
            Hyperparams(lam=-0.1)

    def test_rejects_bad_reg_mode(self):
        with pytest.raises(ValueError):
            Hyperparams(lam=0.1, theta_reg="l3")

    def test_rejects_large_mean_floor(self):
        with pytest.raises(ValueError):
            Hyperparams(lam=0.1, mean_floor=1e-3)

    def test_allows_zero_outer_iters(self):
        assert Hyperparams(lam=0.1, outer_iters=0).outer_iters == 0

    def test_frozen(self):
        hp = Hyperparams(lam=0.1)
        with pytest.raises(AttributeError):
            hp.lam = 0.5


class TestWordCodeElement:
    def test_golden_ratio_case(self):
        # gamma=0.5, rho=0, theta=0, beta=1, mu=0, w=1: minimizer of
        # (s - log s) + 0.5 s^2 solves s^2 + s - 1 = 0
        hp = Hyperparams(lam=0.1, gamma=0.5, rho=0.0)
        got = update_word_code_element(0, np.array([0.5]), np.array([0.0]),
                                       np.array([1.0]), 1.0, hp)
        assert got == pytest.approx((np.sqrt(5.0) - 1.0) / 2.0, abs=1e-12)

    def test_zero_dictionary_weight_branch(self):
        # beta=0, theta=1, rho=1, gamma=0.5 -> max(0, 1 - 1/(2*0.5)) = 0
        hp = Hyperparams(lam=0.1, gamma=0.5, rho=1.0)
        got = update_word_code_element(0, np.array([0.2]), np.array([1.0]),
                                       np.array([0.0]), 1.0, hp)
        assert got == 0.0

    def test_negative_root_clamped(self):
        # gamma=0.5, rho=10, theta=0, beta=1, mu=1, w=1: larger root of
        # v^2 + 12v + 10 is about -0.901, so the constrained answer is 0
        hp = Hyperparams(lam=0.1, gamma=0.5, rho=10.0)
        got = update_word_code_element(1, np.array([1.0, 0.3]), np.array([0.0, 0.0]),
                                       np.array([1.0, 1.0]), 1.0, hp)
        assert got == 0.0

    def test_zero_beta_l2_branch(self):
        # with the squared penalty the beta=0 limit is gamma*theta/(gamma+rho)
        hp = Hyperparams(lam=0.1, gamma=2.0, rho=1.0, s_reg="l2")
        got = update_word_code_element(0, np.array([0.2]), np.array([3.0]),
                                       np.array([0.0]), 1.0, hp)
        assert got == pytest.approx(2.0 * 3.0 / 3.0, abs=1e-14)

    @pytest.mark.parametrize("s_reg", ["l1", "l2"])
    def test_matches_golden_oracle(self, s_reg):
        rng = np.random.default_rng(42)
        for _ in range(300):
            gamma = float(rng.uniform(0.05, 3.0))
            rho = float(rng.uniform(0.0, 3.0))
            hp = Hyperparams(lam=0.1, gamma=gamma, rho=rho, s_reg=s_reg)
            beta_k = float(rng.uniform(0.0, 1.0))
            mu = float(rng.uniform(0.0, 5.0))
            w = float(rng.integers(0, 20))
            theta_k = float(rng.uniform(0.0, 5.0))
            got = update_word_code_element(
                0, np.array([0.0]), np.array([theta_k]), np.array([beta_k]), w, hp)
            want = float(golden_minimize(
                lambda nu: poisson_code_objective(nu, mu * 0.0, beta_k, w, theta_k,
                                                  gamma, rho, s_reg),
                0.0, 100.0))
            assert got == pytest.approx(want, abs=1e-6)

    def test_residual_reconstruction_enters(self):
        # a second active coordinate shifts this coordinate's minimizer
        hp = Hyperparams(lam=0.1, gamma=0.5, rho=0.1)
        code = np.array([0.0, 2.0])
        beta = np.array([0.6, 0.4])
        lone = update_word_code_element(0, np.array([0.0, 0.0]), np.zeros(2), beta, 3.0, hp)
        shifted = update_word_code_element(0, code, np.zeros(2), beta, 3.0, hp)
        assert shifted < lone

    def test_l1_and_l2_agree_at_rho_zero(self):
        rng = np.random.default_rng(7)
        hp1 = Hyperparams(lam=0.1, gamma=0.7, rho=0.0, s_reg="l1")
        hp2 = Hyperparams(lam=0.1, gamma=0.7, rho=0.0, s_reg="l2")
        for _ in range(50):
            beta_k = float(rng.uniform(0.0, 1.0))
            theta_k = float(rng.uniform(0.0, 3.0))
            w = float(rng.integers(0, 10))
            a = update_word_code_element(0, np.array([0.1]), np.array([theta_k]),
                                         np.array([beta_k]), w, hp1)
            b = update_word_code_element(0, np.array([0.1]), np.array([theta_k]),
                                         np.array([beta_k]), w, hp2)
            assert a == pytest.approx(b, abs=1e-10)


class TestWordCodeSweep:
    def test_full_sweep_non_increasing(self):
        rng = np.random.default_rng(3)
        hp = Hyperparams(lam=0.1)
        K = 6
        beta_col = rng.dirichlet(np.ones(K))
        theta = rng.uniform(0.0, 2.0, size=K)
        s = rng.uniform(0.0, 2.0, size=K)
        w = 5.0

        def obj(code):
            mean = max(float(code @ beta_col), 1e-12)
            loss = mean - w * np.log(mean)
            return (loss + hp.gamma * float(((code - theta) ** 2).sum())
                    + hp.rho * float(code.sum()))

        before = obj(s)
        out = update_word_code(s, theta, beta_col, w, hp)
        assert obj(out) <= before + 1e-12
        assert np.all(out >= 0)

    def test_sweep_is_coordinatewise_fixed_point_stable(self):
        # applying the element update at the sweep's output moves nothing
        rng = np.random.default_rng(4)
        hp = Hyperparams(lam=0.1)
        K = 4
        beta_col = rng.dirichlet(np.ones(K))
        theta = rng.uniform(0.0, 1.0, size=K)
        s = rng.uniform(0.0, 1.0, size=K)
        out = s
        for _ in range(200):
            out = update_word_code(out, theta, beta_col, 4.0, hp)
        for k in range(K):
            nxt = update_word_code_element(k, out, theta, beta_col, 4.0, hp)
            assert nxt == pytest.approx(out[k], abs=1e-8)


class TestDocumentCode:
    def test_l1_truncated_average(self):
        hp = Hyperparams(lam=1.0, gamma=1.0)
        codes = np.full((10, 1), 0.5)
        got = update_document_code(codes, hp)
        assert got[0] == pytest.approx(0.45, abs=1e-15)

    def test_l1_truncates_to_zero(self):
        hp = Hyperparams(lam=1.0, gamma=1.0)
        codes = np.full((10, 1), 0.01)
        assert update_document_code(codes, hp)[0] == 0.0

    def test_l2_scaled_average(self):
        hp = Hyperparams(lam=0.7, gamma=0.7, theta_reg="l2")
        codes = np.ones((9, 1))
        got = update_document_code(codes, hp)
        assert got[0] == pytest.approx(0.9, abs=1e-142 + 1e-14)

    def test_shift_enters_before_truncation(self):
        hp = Hyperparams(lam=1.0, gamma=1.0)
        codes = np.full((10, 2), 0.5)
        got = update_document_code(codes, hp, shift=np.array([0.55, -10.0]))
        assert got[0] == pytest.approx(1.0, abs=1e-15)
        assert got[1] == 0.0

    def test_empty_rejected(self):
        hp = Hyperparams(lam=0.1)
        with pytest.raises(ValueError):
            update_document_code(np.zeros((0, 3)), hp)

    @pytest.mark.parametrize("theta_reg", ["l1", "l2"])
    def test_matches_numeric_minimizer(self, theta_reg):
        rng = np.random.default_rng(11)
        for _ in range(200):
            lam = float(rng.uniform(0.01, 2.0))
            gamma = float(rng.uniform(0.05, 2.0))
            hp = Hyperparams(lam=lam, gamma=gamma, theta_reg=theta_reg)
            n_words = int(rng.integers(1, 12))
            codes = rng.uniform(0.0, 3.0, size=(n_words, 1))
            got = float(update_document_code(codes, hp)[0])

            def dobj(t):
                t = np.asarray(t, dtype=float)
                dpen = lam if theta_reg == "l1" else 2.0 * lam * t
                diffs = t - codes[:, 0].reshape((-1,) + (1,) * t.ndim)
                return dpen + 2.0 * gamma * diffs.sum(axis=0)

            want = float(bisect_nonneg_min(dobj, 10.0))
            assert got == pytest.approx(want, abs=1e-10)


class TestEncodeDocument:
    def setup_method(self):
        rng = np.random.default_rng(0)
        self.K, self.N = 4, 12
        self.beta = project_rows_to_simplex(rng.uniform(0.0, 1.0, size=(self.K, self.N)))
        self.doc = doc_of([0, 3, 7], [2, 5, 1])
        self.hp = Hyperparams(lam=0.1)

    def test_shapes_and_feasibility(self):
        enc = encode_document(self.doc, self.beta, self.hp)
        assert enc.theta.shape == (self.K,)
        assert enc.word_codes.shape == (3, self.K)
        assert np.all(enc.theta >= 0)
        assert np.all(enc.word_codes >= 0)
        assert np.isfinite(enc.objective)

    def test_objective_matches_public_function(self):
        enc = encode_document(self.doc, self.beta, self.hp)
        val = document_objective(self.doc, self.beta, enc.theta, enc.word_codes, self.hp)
        assert val == pytest.approx(enc.objective, rel=1e-12)

    def test_sweeps_only_improve(self):
        one = Hyperparams(lam=0.1, inner_sweeps=1, inner_tol=1e-14)
        many = Hyperparams(lam=0.1, inner_sweeps=30, inner_tol=1e-14)
        o1 = encode_document(self.doc, self.beta, one).objective
        o2 = encode_document(self.doc, self.beta, many).objective
        assert o2 <= o1 + 1e-12

    def test_warm_start_no_worse(self):
        cold = encode_document(self.doc, self.beta, self.hp)
        warm = encode_document(self.doc, self.beta, self.hp, init=cold)
        assert warm.objective <= cold.objective + 1e-9 * max(1.0, abs(cold.objective))

    def test_deterministic(self):
        a = encode_document(self.doc, self.beta, self.hp)
        b = encode_document(self.doc, self.beta, self.hp)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.word_codes, b.word_codes)

    def test_high_rho_sparsifies(self):
        sparse_hp = Hyperparams(lam=0.1, rho=5.0)
        enc = encode_document(self.doc, self.beta, sparse_hp)
        dense = encode_document(self.doc, self.beta, Hyperparams(lam=0.1, rho=0.001))
        assert (enc.word_codes == 0).sum() >= (dense.word_codes == 0).sum()

    def test_init_shape_mismatch_rejected(self):
        bad = DocEncoding(theta=np.zeros(self.K + 1),
                          word_codes=np.zeros((3, self.K + 1)), objective=0.0)
        with pytest.raises(ValueError):
            encode_document(self.doc, self.beta, self.hp, init=bad)


class TestEncodeSupervised:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.K, self.N, self.L = 3, 10, 2
        self.beta = project_rows_to_simplex(rng.uniform(0.0, 1.0, size=(self.K, self.N)))
        self.doc = doc_of([1, 4, 6], [3, 2, 2])
        self.eta = rng.normal(size=(self.L, self.K))

    def test_svm_c_zero_identical_to_unsupervised(self):
        hp = Hyperparams(lam=0.1, svm_c=0.0)
        a = encode_document(self.doc, self.beta, hp)
        b = encode_document_supervised(self.doc, self.beta, hp, self.eta, 0, 50)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.word_codes, b.word_codes)
        assert a.objective == b.objective

    def test_supervised_term_monotone(self):
        from stc.svm import margin_violation
        hp = Hyperparams(lam=0.5, svm_c=2.0, cost_ell=5.0, inner_sweeps=40)
        enc = encode_document_supervised(self.doc, self.beta, hp, self.eta, 1, 10)
        base = document_objective(self.doc, self.beta, enc.theta, enc.word_codes, hp)
        total = base + (hp.svm_c / 10) * margin_violation(self.eta, enc.theta, 1, hp.cost_ell)
        assert np.isfinite(total)
        assert enc.objective == pytest.approx(total, rel=1e-10)

    def test_pull_toward_true_label(self):
        # with a strong classifier the encoder widens the margin of the true
        # label relative to the unsupervised code
        eta = np.array([[8.0, 0.0, 0.0], [0.0, 8.0, 0.0]])
        hp = Hyperparams(lam=0.5, svm_c=50.0, cost_ell=10.0)
        un = encode_document(self.doc, self.beta, hp)
        sup = encode_document_supervised(self.doc, self.beta, hp, eta, 0, 100)
        score_gap_sup = eta[0] @ sup.theta - eta[1] @ sup.theta
        score_gap_un = eta[0] @ un.theta - eta[1] @ un.theta
        assert score_gap_sup >= score_gap_un - 1e-9

    def test_overshooting_shift_still_makes_progress(self):
        # absurdly large shift coefficient: every shifted proposal fails the
        # descent guard, but the unshifted fallback keeps improving theta
        eta = np.array([[8.0, 0.0, 0.0], [0.0, 8.0, 0.0]])
        hp = Hyperparams(lam=0.5, svm_c=50.0, cost_ell=10.0)
        sup = encode_document_supervised(self.doc, self.beta, hp, eta, 0, 1)
        start = np.full(self.K, 1.0 / self.K)
        assert not np.allclose(sup.theta, start)

    def test_requires_positive_lam(self):
        hp = Hyperparams(lam=0.0, gamma=0.5, svm_c=1.0)
        with pytest.raises(ValueError, match="lam"):
            encode_document_supervised(self.doc, self.beta, hp, self.eta, 0, 5)

    def test_label_out_of_range(self):
        hp = Hyperparams(lam=0.1, svm_c=1.0)
        with pytest.raises(ValueError):
            encode_document_supervised(self.doc, self.beta, hp, self.eta, 5, 5)
