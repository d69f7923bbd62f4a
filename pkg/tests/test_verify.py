import csv
import io
import json
from dataclasses import replace
from fractions import Fraction

import pytest

from seriesforge.indexsets import IndexSet
from seriesforge.rearrange import PermutationPrefix, RearrangementResult, TargetSpec, constrained_rearrange, riemann_rearrange
from seriesforge.series import Mode, altharmonic, altpow4ceil, partial_sums
from seriesforge.verify import VerificationReport, load_run, run_from_dict, run_to_dict, save_run, verify

META = {"series": "altharmonic", "set": None, "target": "const:1/2"}


@pytest.fixture(scope="module")
def run50():
    return riemann_rearrange(altharmonic(), TargetSpec.const(Fraction(1, 2)), 50)


def test_verified_run_passes(run50):
    rep = verify(run50, altharmonic())
    assert rep.overall and rep.failed_stages == []
    assert rep.mode == "EXACT" and rep.slack == 0.0
    assert all(s.err <= s.bound for s in rep.stages)
    assert rep.sigma_checks["surjectivity_progress"] is None


@pytest.mark.parametrize("stage", [1, 17, 50])
def test_tampered_sum_fails_at_that_stage(run50, stage):
    sums = list(run50.checkpoint_sums)
    sums[stage - 1] += 1
    rep = verify(replace(run50, checkpoint_sums=sums), altharmonic())
    assert not rep.overall and rep.failed_stages == [stage]


def test_tampered_sigma_is_caught(run50):
    vals = run50.sigma.as_list()
    vals[3] = vals[2]
    # a hand-edited run file, not something the prefix type would accept
    forged = PermutationPrefix()
    forged._values = vals
    rep = verify(replace(run50, sigma=forged), altharmonic())
    assert rep.sigma_checks["injective"] is False and not rep.overall


def test_report_ignores_presence_of_engine_sums(run50):
    with_sums = verify(run50, altharmonic())
    without = verify(replace(run50, checkpoint_sums=[]), altharmonic())
    assert with_sums == without
    assert with_sums.to_dict() == without.to_dict()


def test_empty_result_is_vacuous():
    rep = verify(RearrangementResult(PermutationPrefix()), altharmonic())
    assert rep.overall and rep.stages == []


def test_identity_candidate_tracks_own_partial_sums():
    N = 40
    ps = partial_sums(altharmonic(), N)
    r = RearrangementResult(PermutationPrefix.identity(N), checkpoints=list(range(1, N + 1)),
                            checkpoint_sums=ps, targets=ps, constraint=IndexSet.all())
    rep = verify(r, altharmonic())
    assert rep.overall and all(s.err == 0 for s in rep.stages)


def test_checkpoint_beyond_prefix_fails(run50):
    ks = list(run50.checkpoints)
    ks[-1] = len(run50.sigma) + 5
    assert verify(replace(run50, checkpoints=ks), altharmonic()).failed_stages == [50]


def test_float_slack_is_reported():
    r = riemann_rearrange(altharmonic(Mode.FLOAT), TargetSpec.const(0.5), 30, slack=1e-9)
    rep = verify(r, altharmonic(Mode.FLOAT))
    assert rep.overall and rep.mode == "FLOAT(1e-09)"


def test_constrained_checks():
    A = IndexSet.residues(4, [1, 2])
    r = constrained_rearrange(altpow4ceil(), A, TargetSpec.sequence(lambda n: (-1) ** n), 12)
    rep = verify(r, altpow4ceil(), A)
    assert rep.overall
    assert rep.sigma_checks == {"injective": True, "identity_off_A": True,
                                "checkpoints_increasing": True, "surjectivity_progress": True}


def test_report_round_trips_and_csv(run50):
    rep = verify(run50, altharmonic())
    back = VerificationReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert back == rep
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["n", "k_n", "S", "b", "err", "bound", "ok"]
    assert len(rows) == 51 and rows[1][0] == "1" and rows[1][-1] == "true"
    assert Fraction(rows[3][2]) == run50.checkpoint_sums[2]


def test_run_file_round_trip(tmp_path, run50):
    path = tmp_path / "run.json"
    save_run(run50, path, META)
    data = json.loads(path.read_text())
    assert data["version"] == "v1"
    assert set(data) >= {"meta", "sigma_prefix", "checkpoints", "checkpoint_sums", "targets", "stage_log"}
    assert all(isinstance(s, str) and "/" in s or s.lstrip("-").isdigit() for s in data["checkpoint_sums"])
    loaded = load_run(path)
    assert loaded.targets_match
    assert loaded.result.checkpoint_sums == run50.checkpoint_sums
    assert loaded.result.sigma.as_list() == run50.sigma.as_list()
    assert verify(loaded.result, loaded.source) == verify(run50, altharmonic())


def test_stored_targets_are_not_trusted(run50):
    data = run_to_dict(run50, META)
    data["targets"][4] = "7"
    loaded = run_from_dict(data)
    assert not loaded.targets_match
    assert loaded.result.targets[4] == Fraction(1, 2)


def test_float_run_file_uses_decimal_scalars():
    r = riemann_rearrange(altharmonic(Mode.FLOAT), TargetSpec.const(0.5), 5)
    data = run_to_dict(r, dict(META, target="const:0.5"))
    assert all("/" not in s for s in data["checkpoint_sums"])
    assert float(data["checkpoint_sums"][0]) == r.checkpoint_sums[0]
