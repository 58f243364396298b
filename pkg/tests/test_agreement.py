"""Tests for Krippendorff's alpha and fold-profile correlation."""

import numpy as np
import pytest
from pydantic import ValidationError

from gatekeeper_ensemble.data.models import EnsembleConfig
from gatekeeper_ensemble.evaluation.agreement import (
    FoldProfile,
    alpha_from_matrix,
    krippendorff_alpha,
    mean_pairwise_alpha,
    pairwise_alpha_decomposition,
    pearson,
    system_alpha,
)

from .conftest import make_meta, make_voter, sample_ids


def voters(rows, branch="b"):
    samples = sample_ids(len(rows[0]))
    return [make_voter(make_meta(f"{branch}{i}", branch, i), row, samples) for i, row in enumerate(rows)]


class TestAlpha:
    """Hand-computed coincidence-matrix values."""

    def test_two_voters_one_disagreement(self):
        assert alpha_from_matrix(np.array([[1, 1, 2], [2, 1, 2]])) == pytest.approx(4 / 9, abs=1e-9)

    def test_negative_alpha(self):
        assert alpha_from_matrix(np.array([[1, 2], [2, 1]])) == pytest.approx(-0.5, abs=1e-9)

    def test_three_voters(self):
        assert alpha_from_matrix(np.array([[1, 1], [1, 2], [1, 2]])) == pytest.approx(0.375, abs=1e-9)

    def test_identical_voters(self):
        assert alpha_from_matrix(np.array([[1, 2, 3, 7], [1, 2, 3, 7]])) == pytest.approx(1.0)

    def test_single_label_everywhere(self):
        assert alpha_from_matrix(np.array([[7, 7, 7], [7, 7, 7]])) == 1.0

    def test_needs_two_voters(self):
        with pytest.raises(ValueError):
            alpha_from_matrix(np.array([[1, 2, 3]]))

    def test_missing_cells_rejected(self):
        first, second = voters([[1, 2, 3], [1, 2, 3]])
        short = make_voter(make_meta("x", "b", 5), [1, 2], sample_ids(2))
        with pytest.raises(ValueError, match="common sample set"):
            krippendorff_alpha([first, second, short])

    def test_invariant_under_relabelling(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            votes = rng.integers(0, 9, size=(4, 30))
            relabel = rng.permutation(9)
            assert alpha_from_matrix(relabel[votes]) == pytest.approx(alpha_from_matrix(votes), abs=1e-12)

    def test_mean_pairwise(self):
        pool = voters([[1, 1, 2], [2, 1, 2], [1, 1, 2]])
        # pairs: 4/9, 1.0, 4/9
        assert mean_pairwise_alpha(pool) == pytest.approx((4 / 9 + 1.0 + 4 / 9) / 3)

    def test_system_alpha_over_config(self):
        """Every voter of the configuration counts, gatekeepers included."""
        pool = {v.voter_id: v for v in voters([[1, 1, 2], [2, 1, 2], [2, 1, 2]])}
        config = EnsembleConfig(gatekeeper_voters=("b0",), specialist_voters=("b1",))
        assert system_alpha(config, pool.__getitem__) == pytest.approx(4 / 9, abs=1e-9)
        wider = config.with_specialists(["b2"])
        assert system_alpha(wider, pool.__getitem__) == pytest.approx(
            alpha_from_matrix(np.array([[1, 1, 2], [2, 1, 2], [2, 1, 2]]))
        )


class TestDecomposition:
    """Tests for the within/cross branch alpha decomposition."""

    def test_cross_pair_of_opposed_branches(self):
        pool = {
            "a": voters([[1, 1, 2, 2], [1, 1, 2, 2]], "a"),
            "b": voters([[2, 2, 1, 1], [2, 2, 1, 1]], "b"),
        }
        result = pairwise_alpha_decomposition(pool)
        assert result.within == {"a": 1.0, "b": 1.0}
        assert len(result.cross) == 1
        assert result.cross[0].alpha == pytest.approx(-0.25, abs=1e-9)
        assert result.minimum_cross.first == "a"
        assert result.system == pytest.approx(-0.25, abs=1e-9)

    def test_minimum_cross_pair(self):
        pool = {
            "a": voters([[1, 1, 2, 2], [1, 1, 2, 2]], "a"),
            "b": voters([[1, 1, 2, 2], [1, 1, 2, 2]], "b"),
            "c": voters([[2, 2, 1, 1], [2, 2, 1, 1]], "c"),
        }
        result = pairwise_alpha_decomposition(pool)
        assert [(p.first, p.second) for p in result.cross] == [("a", "b"), ("a", "c"), ("b", "c")]
        assert result.minimum_cross.first == "a"
        assert result.minimum_cross.second == "c"

    def test_single_voter_branch_skipped(self):
        pool = {
            "a": voters([[1, 2], [1, 2]], "a"),
            "b": voters([[1, 2], [2, 2]], "b"),
            "solo": voters([[1, 1]], "solo"),
        }
        result = pairwise_alpha_decomposition(pool)
        assert result.skipped == ["solo"]
        assert "solo" not in result.within

    def test_needs_two_branches(self):
        with pytest.raises(ValueError):
            pairwise_alpha_decomposition({"a": voters([[1, 2], [1, 2]], "a")})


class TestPearson:
    """Tests for fold-profile correlation."""

    def test_perfect_anti_correlation(self):
        assert pearson([0.1, 0.2, 0.3], [0.3, 0.2, 0.1]).r == pytest.approx(-1.0, abs=1e-12)

    def test_hand_value(self):
        # dx = (-1, 0, 1), dy = (-1, -1, 2): r = 3 / sqrt(2 * 6)
        r = pearson([1.0, 2.0, 3.0], [1.0, 1.0, 4.0]).r
        assert r == pytest.approx(3 / np.sqrt(12), abs=1e-12)

    def test_constant_profile_is_degenerate(self):
        result = pearson([0.4, 0.4, 0.4], [0.1, 0.2, 0.3])
        assert result.degenerate
        assert result.r is None

    @pytest.mark.parametrize("constant", [[0.7] * 3, [0.1] * 3, [0.412] * 5, [0.1] * 7, [0.7] * 7])
    def test_constant_float_profiles_are_degenerate(self, constant):
        """Values that are not exact in binary still count as constant."""
        other = np.linspace(0.1, 0.4, len(constant)).tolist()
        assert pearson(constant, other).degenerate
        assert pearson(other, constant).r is None

    def test_symmetric_and_affine_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.uniform(0.0, 1.0, 5)
            y = rng.uniform(0.0, 1.0, 5)
            r = pearson(x, y).r
            assert pearson(y, x).r == pytest.approx(r, abs=1e-12)
            scale, shift = rng.uniform(0.1, 3.0), rng.uniform(-2.0, 2.0)
            assert pearson(scale * x + shift, y).r == pytest.approx(r, abs=1e-9)
            assert pearson(x, scale * y + shift).r == pytest.approx(r, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson([0.1, 0.2], [0.1, 0.2, 0.3])

    def test_too_short(self):
        with pytest.raises(ValueError):
            pearson([0.1], [0.2])

    def test_accepts_fold_profiles(self):
        a = FoldProfile(values=(0.40, 0.45, 0.42))
        b = FoldProfile(values=(0.44, 0.38, 0.41))
        assert pearson(a, b).r < 0


def test_fold_profile_bounds():
    with pytest.raises(ValidationError):
        FoldProfile(values=(0.5, 1.5))
    with pytest.raises(ValidationError):
        FoldProfile(values=())
    assert len(FoldProfile(values=(0.1, 0.2, 0.3))) == 3
