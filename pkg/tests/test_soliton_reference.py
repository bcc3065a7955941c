"""Moving-soliton error magnitudes at the coarsest ladder level (slow, about 3 min)."""

from pathlib import Path

import pytest

from cqnls.harness.config import load_config
from cqnls.harness.experiments import convergence_level, reference_tau

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_moving_soliton_errors_at_coarsest_level():
    cfg = load_config(CONFIGS / "soliton_convergence.cfg")
    h, tau = cfg.levels[0]
    e2, e1 = convergence_level(cfg, h, tau, reference_tau(cfg, [tau]))[1.0]
    print(f"h={h} tau={tau}: E2={e2:.4e} E1={e1:.4e}")
    assert e2 == pytest.approx(1.227e-3, rel=0.05)
    assert e1 == pytest.approx(1.851e-3, rel=0.05)
