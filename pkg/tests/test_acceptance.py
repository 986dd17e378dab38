"""Exit criteria, run at full scale.

Each test prints one ``ACCEPTANCE`` line. Run with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import time

import pytest

from pinchlab.harness import CampaignConfig, replay_trial, run_campaign
from pinchlab.spectrahedron import in_A3_closed_form, in_A_direct

MASTER_SEED = 20251021
BAND = 1e-7

CAMPAIGNS = {
    "membership-2": CampaignConfig(MASTER_SEED, 10_000, "membership", arities=(2,)),
    "membership-3": CampaignConfig(MASTER_SEED, 10_000, "membership", arities=(3,)),
    "membership-4": CampaignConfig(MASTER_SEED, 10_000, "membership", arities=(4,)),
    "membership-5": CampaignConfig(MASTER_SEED, 10_000, "membership", arities=(5,)),
    "generalized": CampaignConfig(MASTER_SEED, 1_000, "generalized", dims=(1, 2, 3, 4, 5, 6), arities=(2, 3, 4)),
    "hayashi": CampaignConfig(MASTER_SEED, 1_000, "hayashi", dims=(2, 3, 4, 5, 6, 7, 8)),
    "reverse": CampaignConfig(MASTER_SEED, 1_000, "reverse"),
    "converse": CampaignConfig(MASTER_SEED, 1_000, "converse"),
    "tightness": CampaignConfig(MASTER_SEED, 200, "tightness"),
    "identity": CampaignConfig(MASTER_SEED, 1_000, "identity"),
    "gentle": CampaignConfig(MASTER_SEED, 1_000, "gentle"),
}


def report_line(number, ok, detail):
    print(f"\nACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="module")
def reports():
    out, elapsed = {}, {}
    for name, cfg in CAMPAIGNS.items():
        start = time.perf_counter()
        out[name] = run_campaign(cfg, workers=1)
        elapsed[name] = time.perf_counter() - start
    return out, elapsed


def test_01_membership_oracle_equivalence(reports, capsys):
    rep, elapsed = reports
    names = [f"membership-{n}" for n in (2, 3, 4, 5)]
    disagreements = sum(rep[k].extras["recursive_disagreements"] for k in names)
    compared = sum(rep[k].pass_count + rep[k].fail_count for k in names)
    runtime = sum(elapsed[k] for k in names)
    ok = disagreements == 0 and runtime < 30 and all(rep[k].trials >= 10_000 for k in names)
    with capsys.disabled():
        report_line(1, ok, f"recursive vs direct: {disagreements} disagreements over {compared} "
                    f"non-band vectors, {runtime:.1f}s")
    assert ok


def test_02_closed_form_n3(reports, capsys):
    rep = reports[0]["membership-3"]
    checked = rep.extras["closed_form_checked"]
    disagreements = rep.extras["closed_form_disagreements"]
    boundary_ok = True
    for alpha in ([2, 3, 6], [3, 3, 3]):
        direct, closed = in_A_direct(alpha), in_A3_closed_form(alpha)
        boundary_ok &= direct.member and abs(direct.certificate) <= BAND
        boundary_ok &= closed.member and closed.on_boundary
    ok = checked >= 10_000 and disagreements == 0 and boundary_ok
    with capsys.disabled():
        report_line(2, ok, f"closed form vs direct: {disagreements} disagreements over {checked}; "
                    f"(2,3,6), (3,3,3) on boundary: {boundary_ok}")
    assert ok


def test_03_generalized_soundness(reports, capsys):
    rep = reports[0]["generalized"]
    worst_rel = rep.extras["min_relative_gap"]
    ok = (
        rep.fail_count == 0
        and rep.trials >= 1_000
        and worst_rel >= -1e-8
        and rep.extras["boundary_trials"] > 0
        and rep.extras["rectangular_trials"] > 0
    )
    with capsys.disabled():
        report_line(3, ok, f"{rep.fail_count} failures / {rep.trials}; worst gap/scale {worst_rel:.3e}; "
                    f"{rep.extras['boundary_trials']} boundary, {rep.extras['rectangular_trials']} rectangular")
    assert ok


def test_04_hayashi(reports, capsys):
    rep = reports[0]["hayashi"]
    ok = rep.fail_count == 0 and rep.trials >= 1_000
    with capsys.disabled():
        report_line(4, ok, f"rho <= n pinch(rho): {rep.fail_count} failures / {rep.trials}; "
                    f"max trace error {rep.extras['max_trace_error']:.2e}")
    assert ok


def test_05_reverse_soundness(reports, capsys):
    rep = reports[0]["reverse"]
    ok = (
        rep.fail_count == 0
        and rep.trials >= 1_000
        and rep.extras.get("beta_b2_boundary", 0) > 0
        and rep.extras.get("beta_nonpositive", 0) > 0
    )
    kinds = {k: v for k, v in rep.extras.items() if k.startswith("beta_")}
    with capsys.disabled():
        report_line(5, ok, f"{rep.fail_count} failures / {rep.trials}; beta sources {kinds}")
    assert ok


def test_06_converse(reports, capsys):
    rep = reports[0]["converse"]
    ok = rep.fail_count == 0 and rep.trials >= 1_000
    with capsys.disabled():
        report_line(6, ok, f"witness test vs direct: {rep.fail_count} mismatches / "
                    f"{rep.pass_count + rep.fail_count} non-band ({rep.extras['members']} members)")
    assert ok


def test_07_boundary_tightness(reports, capsys):
    rep = reports[0]["tightness"]
    worst = rep.extras["max_abs_gap"]
    ok = rep.fail_count == 0 and rep.trials >= 100 and worst <= BAND
    with capsys.disabled():
        report_line(7, ok, f"max |gap| {worst:.2e} over {rep.trials} boundary samples")
    assert ok


def test_08_expansion_identities(reports, capsys):
    rep = reports[0]["identity"]
    worst = rep.extras["max_residual"]
    ok = rep.fail_count == 0 and rep.trials >= 1_000 and worst <= 1e-10
    with capsys.disabled():
        report_line(8, ok, f"max entrywise residual {worst:.2e} over {rep.trials} instances")
    assert ok


def test_09_trace_norm_gentle_bound(reports, capsys):
    rep = reports[0]["gentle"]
    ex = rep.extras
    slack = ex["min_trace_norm_slack"]
    evaluated = rep.pass_count + rep.fail_count
    ok = rep.trials >= 1_000 and slack >= -1e-8 and rep.indeterminate_count == 0
    with capsys.disabled():
        report_line(
            9, ok,
            f"min(sqrt(eps)+eps - half_t1) = {slack:.3e} over {evaluated}; "
            f"half_t1 <= 2 sqrt(eps): {ex['half_t1_le_2sqrt_eps']}, "
            f"half_t1 <= sqrt(eps): {ex['half_t1_le_sqrt_eps']}; "
            f"quoted (1 - sqrt(eps)) upper bound violated in {ex['corollary_upper_violations']}",
        )
    assert ok


def test_10_determinism(reports, capsys):
    first = reports[0]
    identical = all(
        run_campaign(cfg).to_json(include_time=False) == first[name].to_json(include_time=False)
        for name, cfg in CAMPAIGNS.items()
    )
    failing_cfg = CampaignConfig(MASTER_SEED, 200, "generalized", alpha_scale=0.5)
    failing = run_campaign(failing_cfg)
    replayed = all(replay_trial(failing_cfg, s).status == "fail" for s in failing.failing_seeds)
    worst = replay_trial(failing_cfg, failing.worst_instance_seed)
    bit_exact = worst.value == failing.worst_violation
    ok = identical and failing.fail_count > 0 and replayed and bit_exact
    with capsys.disabled():
        report_line(10, ok, f"rerun identical: {identical}; {len(failing.failing_seeds)} failing seeds "
                    f"replayed: {replayed}; worst violation bit-exact: {bit_exact}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
