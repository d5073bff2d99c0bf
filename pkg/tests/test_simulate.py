"""Data generator, substreams, cell aggregation and grid determinism."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import rmbayes.simulate as sim
from rmbayes import (
    ModelChoice,
    SimulationConfig,
    TreatmentProfile,
    generate_dataset,
    make_profile,
    rm_anova,
    run_cell,
    run_grid,
)
from rmbayes.errors import DomainError
from rmbayes.simulate import _rep_profile, _rep_seed, _splitmix64


def config_for(n=20, rho=0.2, delta=0.0, **kwargs):
    return SimulationConfig(n=n, rho=rho, delta=delta, **kwargs)


class TestSplitmix:
    def test_reference_vector(self):
        # first output of the splitmix64 sequence seeded with 0
        assert _splitmix64(0) == 0xE220A8397B1DCDAF

    def test_rep_seeds_distinct_across_cells_and_reps(self):
        seeds = {
            _rep_seed(config_for(n=n, rho=rho, delta=delta, master_seed=9), rep)
            for n in (20, 50)
            for rho in (0.2, 0.8)
            for delta in (0.0, 0.2)
            for rep in range(50)
        }
        assert len(seeds) == 2 * 2 * 2 * 50

    def test_rep_seed_requires_nonnegative_index(self):
        with pytest.raises(DomainError):
            _rep_seed(config_for(), -1)


class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"n": 1}, {"k": 1}, {"rho": 1.0}, {"rho": -0.1}, {"rho": float("nan")},
        {"delta": -0.2}, {"delta": float("inf")}, {"reps": 0},
        {"master_seed": -1}, {"master_seed": 2 ** 64}, {"spacing": "random"},
        {"grand_mean": float("nan")},
    ])
    def test_rejected(self, kwargs):
        base = {"n": 20, "rho": 0.2, "delta": 0.0}
        base.update(kwargs)
        with pytest.raises(DomainError):
            SimulationConfig(**base)

    def test_cell_id(self):
        assert config_for(n=20, rho=0.2, delta=0.5).cell_id == "n20_k3_rho0.2_delta0.5"


class TestMakeProfile:
    def test_null_profile(self):
        assert make_profile(config_for(k=3, delta=0.0)).alphas == (0.0, 0.0, 0.0)

    def test_three_conditions_medium_effect(self):
        alphas = make_profile(config_for(k=3, delta=0.5)).alphas
        assert alphas == pytest.approx((-0.25, 0.0, 0.25), abs=1e-15)

    def test_two_conditions_small_effect(self):
        alphas = make_profile(config_for(k=2, delta=0.2)).alphas
        assert alphas == pytest.approx((-0.1, 0.1), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(
        k=st.integers(min_value=2, max_value=12),
        delta=st.floats(min_value=0.0, max_value=5.0),
    )
    def test_sum_zero_and_range(self, k, delta):
        alphas = make_profile(config_for(k=k, delta=delta)).alphas
        assert math.fsum(alphas) == pytest.approx(0.0, abs=1e-12 * max(1.0, delta))
        assert max(alphas) - min(alphas) == pytest.approx(delta, rel=1e-12, abs=1e-15)


class TestPerRepProfile:
    def test_equal_spacing_is_fixed(self):
        config = config_for(delta=0.5, spacing="equal")
        profiles = {_rep_profile(config, rep).alphas for rep in range(5)}
        assert profiles == {make_profile(config).alphas}

    def test_uniform_spacing_redraws_interior_means(self):
        config = config_for(k=3, delta=0.5, spacing="uniform")
        profiles = [_rep_profile(config, rep) for rep in range(20)]
        assert len({p.alphas for p in profiles}) > 1
        for profile in profiles:
            alphas = profile.alphas
            assert math.fsum(alphas) == pytest.approx(0.0, abs=1e-12)
            assert max(alphas) - min(alphas) == pytest.approx(0.5, rel=1e-12)
            assert list(alphas) == sorted(alphas)

    def test_uniform_spacing_deterministic_per_rep(self):
        config = config_for(k=5, delta=0.3, spacing="uniform", master_seed=77)
        assert _rep_profile(config, 11) == _rep_profile(config, 11)
        assert _rep_profile(config, 11) != _rep_profile(config, 12)

    def test_degenerate_uniform_cases_fall_back_to_equal(self):
        assert _rep_profile(config_for(k=2, delta=0.4), 3).alphas == \
            make_profile(config_for(k=2, delta=0.4)).alphas
        assert _rep_profile(config_for(k=3, delta=0.0), 3).alphas == (0.0, 0.0, 0.0)


class TestGenerateDataset:
    def test_bit_identical_for_same_substream(self):
        config = config_for(n=15, rho=0.8, delta=0.2, master_seed=2024)
        profile = make_profile(config)
        first = generate_dataset(config, profile, 7)
        second = generate_dataset(config, profile, 7)
        assert np.array_equal(first, second)
        assert not np.array_equal(first, generate_dataset(config, profile, 8))

    def test_profile_length_checked(self):
        config = config_for(k=3)
        with pytest.raises(DomainError):
            generate_dataset(config, TreatmentProfile(alphas=(0.0, 0.0)), 0)

    def test_pure_noise_moments(self):
        config = config_for(n=100_000, rho=0.0, delta=0.0, k=10, grand_mean=2.5)
        data = generate_dataset(config, make_profile(config), 0)
        assert data.shape == (100_000, 10)
        assert data.mean() == pytest.approx(2.5, abs=0.01)
        assert data.var() == pytest.approx(1.0, abs=0.02)

    def test_intraclass_correlation_recovered(self):
        config = config_for(n=20_000, rho=0.8, delta=0.0, k=3, master_seed=5)
        table = rm_anova(generate_dataset(config, make_profile(config), 0))
        ms_subjects = table.ss_subjects / table.df_subjects
        sigma_subj = (ms_subjects - table.ms_residual) / config.k
        icc = sigma_subj / (sigma_subj + table.ms_residual)
        assert icc == pytest.approx(0.8, abs=0.02)

    def test_treatment_effects_shift_column_means(self):
        config = config_for(n=50_000, rho=0.2, delta=1.0, k=3, spacing="equal")
        data = generate_dataset(config, make_profile(config), 0)
        assert data.mean(axis=0) == pytest.approx([-0.5, 0.0, 0.5], abs=0.02)


class TestRunCell:
    def test_single_replication_has_no_correlation(self):
        result = run_cell(config_for(reps=1))
        assert result.posterior_correlation is None
        q = result.posterior_quantiles_min
        assert q.minimum == q.q1 == q.median == q.q3 == q.maximum

    def test_records_consistent_with_aggregates(self):
        config = config_for(n=20, rho=0.8, delta=0.2, reps=120, master_seed=42)
        result = run_cell(config, keep_records=True)
        records = result.per_rep_records
        assert len(records) == 120
        assert [r.rep for r in records] == list(range(120))
        agreement = np.mean([r.choice_min == r.choice_nm for r in records])
        assert result.consistency == pytest.approx(float(agreement))
        # correct model is H1 here (delta > 0)
        accuracy = np.mean([r.choice_min is ModelChoice.H1 for r in records])
        assert result.accuracy_min == pytest.approx(float(accuracy))
        for record in records:
            assert (record.bf01_min >= 1.0) == (record.choice_min is ModelChoice.H0)
            assert 0.0 <= record.posterior_min <= 1.0

    def test_null_cell_mostly_chooses_h0(self):
        result = run_cell(config_for(n=20, rho=0.2, delta=0.0, reps=200, master_seed=1))
        assert result.accuracy_min >= 0.9
        assert result.accuracy_nm >= 0.9
        assert result.posterior_correlation >= 0.95

    def test_records_disabled_by_default(self):
        assert run_cell(config_for(reps=3)).per_rep_records is None

    def test_cell_errors_carry_cell_identity(self, monkeypatch):
        def explode(_):
            raise DomainError("synthetic failure")

        monkeypatch.setattr(sim, "rm_anova", explode)
        with pytest.raises(DomainError, match=r"n20_k3_rho0\.2_delta0.*replication 0"):
            run_cell(config_for(reps=2))


class TestRunGrid:
    def test_same_seed_reproduces_report(self):
        kwargs = dict(n_values=(20,), rho_values=(0.2, 0.8), delta_values=(0.0, 0.5),
                      reps=30, master_seed=99, keep_records=True)
        assert run_grid(**kwargs) == run_grid(**kwargs)

    def test_parallel_matches_sequential(self):
        kwargs = dict(n_values=(20, 50), rho_values=(0.2,), delta_values=(0.0, 0.5),
                      reps=40, master_seed=7, keep_records=True)
        assert run_grid(workers=2, **kwargs) == run_grid(workers=1, **kwargs)

    def test_canonical_cell_order_and_shape(self):
        report = run_grid((20, 50, 80), (0.2, 0.8), (0.0, 0.2, 0.5), reps=2, master_seed=3)
        assert len(report.cells) == 18
        observed = [(c.config.delta, c.config.rho, c.config.n) for c in report.cells]
        expected = [(d, r, n) for d in (0.0, 0.2, 0.5) for r in (0.2, 0.8) for n in (20, 50, 80)]
        assert observed == expected

    def test_empty_axis_rejected(self):
        with pytest.raises(DomainError):
            run_grid((), (0.2,), (0.0,))

    def test_invalid_cell_parameter_rejected(self):
        with pytest.raises(DomainError):
            run_grid((20,), (1.5,), (0.0,))

    def test_to_dict_shape(self):
        report = run_grid((20,), (0.2,), (0.0,), reps=2, master_seed=3, keep_records=True)
        payload = report.to_dict()
        assert set(payload) == {"grid", "cells"}
        assert payload["grid"]["reps"] == 2
        assert "per_rep_records" not in payload["cells"][0]
        with_records = report.to_dict(include_records=True)
        assert len(with_records["cells"][0]["per_rep_records"]) == 2
