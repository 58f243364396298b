"""Tests for seeded simulation of gold sets and correlated voter pools."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from gatekeeper_ensemble.data.models import EnsembleConfig
from gatekeeper_ensemble.evaluation import macro_f1, mean_pairwise_alpha
from gatekeeper_ensemble.simulator.engine import _draw
from gatekeeper_ensemble.simulator import (
    SimConfig,
    SimVoter,
    prior_from_counts,
    simulate,
    stream,
    uniform_confusion,
    voters_with_accuracy,
    write_pool,
)
from gatekeeper_ensemble.storage import load_pool
from gatekeeper_ensemble.utils.validation import ConfigurationError
from gatekeeper_ensemble.voting import ensemble_predict

from .conftest import TEST_SET_SUPPORTS, make_meta

TEST_SET_PRIOR = prior_from_counts(TEST_SET_SUPPORTS)


def nine_voter_config(accuracy=0.6, rho=0.0, seed=0, n_samples=500):
    return SimConfig(
        n_samples=n_samples,
        class_prior=TEST_SET_PRIOR,
        voters=voters_with_accuracy(9, accuracy, "9c"),
        rho=rho,
        seed=seed,
    )


ENSEMBLE = EnsembleConfig(
    gatekeeper_voters=("v00", "v01", "v02"),
    specialist_voters=tuple(f"v{i:02d}" for i in range(3, 9)),
    allow_9c_specialists=True,
)


def labels(pool):
    return [[int(p.entries[s]) for s in pool.gold.sample_ids()] for p in pool.predictions]


class TestPriorAndConfusion:
    def test_prior_from_list(self):
        prior = prior_from_counts(TEST_SET_SUPPORTS)
        assert prior[0] == pytest.approx(75 / 472)
        assert sum(prior) == pytest.approx(1.0)

    def test_prior_from_mapping(self):
        prior = prior_from_counts({1: 1, 7: 3})
        assert prior[7] == 0.75
        assert prior[0] == 0.0

    @pytest.mark.parametrize("counts", [[1] * 8, {9: 1}, {1: -1, 2: 2}, [0] * 9])
    def test_prior_invalid(self, counts):
        with pytest.raises(ValueError):
            prior_from_counts(counts)

    def test_uniform_confusion_rows(self):
        rows = np.asarray(uniform_confusion(0.6))
        assert np.allclose(rows.sum(axis=1), 1.0)
        assert rows[3, 3] == 0.6
        assert rows[3, 0] == pytest.approx(0.05)

    def test_eight_class_confusion_avoids_zero(self):
        rows = np.asarray(uniform_confusion(0.6, "8c"))
        assert (rows[:, 0] == 0).all()
        assert rows[0, 1:] == pytest.approx([1 / 8] * 8)
        assert rows[5, 5] == 0.6

    def test_accuracy_out_of_range(self):
        with pytest.raises(ValueError):
            uniform_confusion(1.5)


class TestConfigValidation:
    """Tests for SimVoter and SimConfig validation."""

    def test_eight_class_voter_with_zero_mass(self):
        with pytest.raises(ValidationError, match="label 0"):
            SimVoter(meta=make_meta("s0", "sp", 0), confusion=uniform_confusion(0.6, "9c"))

    def test_rows_must_sum_to_one(self):
        rows = [list(r) for r in uniform_confusion(0.6)]
        rows[2][2] += 0.1
        with pytest.raises(ValidationError, match="row 2"):
            SimVoter(meta=make_meta("g0", "gk", 0, role="gatekeeper", class_mode="9c"), confusion=rows)

    def test_prior_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            SimConfig(n_samples=10, class_prior=(0.5,) * 9, voters=voters_with_accuracy(3, 0.6))

    def test_duplicate_voters(self):
        voters = voters_with_accuracy(3, 0.6)
        with pytest.raises(ValidationError, match="unique"):
            SimConfig(n_samples=10, class_prior=TEST_SET_PRIOR, voters=voters + voters[:1])

    def test_needs_voters(self):
        with pytest.raises(ValidationError):
            SimConfig(n_samples=10, class_prior=TEST_SET_PRIOR, voters=())

    def test_rho_range(self):
        with pytest.raises(ValidationError):
            nine_voter_config(rho=1.5)

    def test_branches_of_three(self):
        voters = voters_with_accuracy(9, 0.6, "9c")
        assert [v.meta.branch_id for v in voters[::3]] == ["b00", "b01", "b02"]
        assert voters[0].meta.role.value == "gatekeeper"
        assert voters[3].meta.role.value == "specialist"


class TestFromDict:
    """Tests for building configurations from their JSON form."""

    def voter(self, voter_id="g0", **extra):
        data = {
            "voter_id": voter_id,
            "branch_id": "gk",
            "role": "gatekeeper",
            "method": "SFT",
            "class_mode": "9c",
            "base_model": "m",
            "fold": 0,
        }
        data.update(extra)
        return data

    def test_counts_and_accuracy(self):
        config = SimConfig.from_dict(
            {"n_samples": 20, "class_counts": {"0": 1, "7": 3}, "voters": [self.voter(accuracy=0.7)]}
        )
        assert config.class_prior[7] == 0.75
        assert config.voters[0].confusion[1][1] == 0.7
        assert config.voters[0].recompute_f1_cv

    def test_explicit_confusion_and_f1(self):
        confusion = [list(r) for r in uniform_confusion(0.5)]
        config = SimConfig.from_dict(
            {
                "n_samples": 20,
                "class_prior": list(TEST_SET_PRIOR),
                "voters": [self.voter(confusion=confusion, f1_cv=0.4)],
            }
        )
        assert not config.voters[0].recompute_f1_cv
        assert config.voters[0].meta.f1_cv == 0.4

    def test_accuracy_or_confusion_required(self):
        with pytest.raises(ValueError, match="exactly one"):
            SimConfig.from_dict({"n_samples": 5, "class_prior": list(TEST_SET_PRIOR), "voters": [self.voter()]})

    def test_counts_and_prior_conflict(self):
        with pytest.raises(ValueError, match="either"):
            SimConfig.from_dict(
                {"n_samples": 5, "class_counts": [1] * 9, "class_prior": list(TEST_SET_PRIOR), "voters": []}
            )

    def test_from_file(self, write_json):
        path = write_json(
            "sim.json",
            {"n_samples": 8, "class_counts": list(TEST_SET_SUPPORTS), "seed": 3, "voters": [self.voter(accuracy=0.9)]},
        )
        config = SimConfig.from_file(path)
        assert config.seed == 3
        assert config.n_samples == 8

    def test_from_file_missing(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            SimConfig.from_file(tmp_path / "absent.json")

    def test_from_file_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n_samples": 5,\n  oops}', encoding="utf-8")
        with pytest.raises(ConfigurationError, match="bad.json:2"):
            SimConfig.from_file(path)

    def test_from_file_invalid_content(self, write_json):
        path = write_json("sim.json", {"n_samples": 0, "class_counts": [1] * 9, "voters": [self.voter(accuracy=0.5)]})
        with pytest.raises(ConfigurationError):
            SimConfig.from_file(path)


class TestSimulate:
    """Tests for drawing gold labels and voter predictions."""

    def test_deterministic_for_seed(self):
        first = simulate(nine_voter_config(seed=11))
        second = simulate(nine_voter_config(seed=11))
        assert first.gold == second.gold
        assert labels(first) == labels(second)

    def test_seeds_differ(self):
        assert labels(simulate(nine_voter_config(seed=1))) != labels(simulate(nine_voter_config(seed=2)))

    def test_adding_voters_keeps_earlier_streams(self):
        small = SimConfig(n_samples=200, class_prior=TEST_SET_PRIOR, voters=voters_with_accuracy(3, 0.6), seed=4)
        large = small.model_copy(update={"voters": voters_with_accuracy(6, 0.6)})
        assert labels(simulate(large))[:3] == labels(simulate(small))

    def test_streams_are_independent(self):
        assert stream(0, 1).random() != stream(0, 2).random()
        assert stream(5, 3).random() == stream(5, 3).random()

    def test_perfect_voters_reproduce_gold(self):
        pool = simulate(nine_voter_config(accuracy=1.0))
        gold = [int(pool.gold.entries[s]) for s in pool.gold.sample_ids()]
        assert all(row == gold for row in labels(pool))

    def test_full_correlation_copies_prototype(self):
        pool = simulate(nine_voter_config(rho=1.0, seed=3))
        prototype = [int(pool.prototype[s]) for s in pool.gold.sample_ids()]
        assert all(row == prototype for row in labels(pool))
        output = ensemble_predict(ENSEMBLE, pool.predictions, pool.gold.sample_ids())
        assert output.labels.tolist() == prototype

    def test_eight_class_voters_never_emit_zero(self):
        gatekeepers = voters_with_accuracy(3, 0.6, "9c")
        specialists = tuple(
            SimVoter(meta=make_meta(f"sp{i}", "sp", i), confusion=uniform_confusion(0.6, "8c")) for i in range(3)
        )
        config = SimConfig(
            n_samples=400, class_prior=TEST_SET_PRIOR, voters=gatekeepers + specialists, rho=1.0, seed=2
        )
        pool = simulate(config)
        for prediction in pool.predictions[3:]:
            assert 0 not in {int(v) for v in prediction.entries.values()}
        assert any(int(v) == 0 for v in pool.predictions[0].entries.values())

    def test_f1_cv_recomputed(self):
        pool = simulate(nine_voter_config(accuracy=1.0))
        assert all(p.meta.f1_cv == 1.0 for p in pool.predictions)

    def test_dialogues(self):
        config = nine_voter_config(n_samples=10).model_copy(update={"dialogue_size": 4})
        dialogues = simulate(config).dialogues
        assert len(dialogues) == 10
        assert len(set(dialogues.values())) == 3

    def test_no_dialogues_by_default(self):
        assert simulate(nine_voter_config(n_samples=10)).dialogues is None

    def test_override_rate_tracks_zero_prior(self):
        pool = simulate(nine_voter_config(accuracy=0.99, n_samples=5000, seed=8))
        output = ensemble_predict(ENSEMBLE, pool.predictions, pool.gold.sample_ids())
        assert output.override_rate == pytest.approx(75 / 472, abs=0.05)


@pytest.mark.slow
class TestInverseCdfDraw:
    """Edge draws at the top of a confusion row."""

    def rows(self):
        confusion = np.zeros((9, 9))
        confusion[:, 8] = 1.0
        # mass stops at class 7 and the total rounds short of 1
        confusion[3] = 0.0
        confusion[3, 1] = 0.5
        confusion[3, 7] = 0.4999
        return np.cumsum(confusion, axis=1)

    def test_u_past_short_row_total_stays_on_row(self):
        labels = _draw(self.rows(), np.array([3, 3, 3]), np.array([0.99995, 0.9999, 1.0]))
        assert labels.tolist() == [7, 7, 7]

    def test_full_row_reaches_last_class(self):
        labels = _draw(self.rows(), np.array([0, 5]), np.array([0.0, 1.0]))
        assert labels.tolist() == [8, 8]

    def test_interior_matches_searchsorted(self):
        rng = np.random.default_rng(0)
        cumulative = np.cumsum(uniform_confusion(0.6, "8c"), axis=1)
        given = rng.integers(0, 9, size=200)
        u = rng.random(200) * 0.999
        expected = [int(np.searchsorted(cumulative[g], x, side="right")) for g, x in zip(given, u)]
        labels = _draw(cumulative, given, u)
        assert labels.tolist() == expected
        assert 0 not in labels.tolist()


def test_independent_ensemble_beats_single_and_correlated():
    for seed in range(20):
        independent = simulate(nine_voter_config(rho=0.0, seed=seed, n_samples=5000))
        correlated = simulate(nine_voter_config(rho=1.0, seed=seed, n_samples=5000))
        samples = independent.gold.sample_ids()

        ensemble = macro_f1(ensemble_predict(ENSEMBLE, independent.predictions, samples).predictions, independent.gold)
        single = np.mean([macro_f1(dict(p.entries), independent.gold) for p in independent.predictions])
        collapsed = macro_f1(ensemble_predict(ENSEMBLE, correlated.predictions, samples).predictions, correlated.gold)
        assert ensemble >= single + 0.05
        assert ensemble >= collapsed + 0.05


@pytest.mark.slow
def test_agreement_rises_with_correlation():
    monotone = 0
    for seed in range(20):
        alphas = [
            mean_pairwise_alpha(simulate(nine_voter_config(rho=rho, seed=seed, n_samples=400)).predictions)
            for rho in (0.0, 0.5, 1.0)
        ]
        monotone += alphas[0] <= alphas[1] <= alphas[2]
    assert monotone >= 19


def test_simulated_pool_round_trips_through_storage(tmp_path):
    pool = simulate(nine_voter_config(n_samples=30).model_copy(update={"dialogue_size": 5}))
    manifest = write_pool(pool.gold, pool.predictions, tmp_path / "sim", pool.dialogues)
    loaded = load_pool(manifest)
    assert loaded.gold == pool.gold
    assert json.loads(manifest.read_text(encoding="utf-8"))
