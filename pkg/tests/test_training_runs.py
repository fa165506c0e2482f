"""500-step runs on 3-class blobs with the linear kernel (slow)."""

import pytest

from _runs import ablation_config, run

pytestmark = pytest.mark.slow

B = 64
GAMMA_THRESH = 1.0


def lambda_1(rows, step):
    return next(r[7] for r in rows if int(r[0]) == step)


def test_linear_no_collapse_after_step_100():
    result, _ = run(ablation_config(2.0, "linear"))
    late = [r for r in result.rows if r[0] >= 100]
    worst = min(r[7] / B for r in late)
    assert worst > GAMMA_THRESH**2 * B * 0.5, f"min lambda_1/b after step 100 = {worst:.4g}"


def test_linear_beta_zero_collapses():
    result, _ = run(ablation_config(0.0, "linear"))
    l0, l500 = lambda_1(result.rows, 0), lambda_1(result.rows, 500)
    assert l500 < 1e-3 * l0, f"lambda_1: {l0:.4g} -> {l500:.4g}"


def test_probe_on_no_collapse_run():
    _, probe = run(ablation_config(2.0, "linear"))
    assert probe["test_accuracy"] >= 0.90


def test_probe_on_collapsed_run():
    _, probe = run(ablation_config(0.0, "linear"))
    assert probe["test_accuracy"] <= 0.60
