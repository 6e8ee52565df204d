import csv
import io
import json
import math

import pytest

from v2xcms.bench import (
    CSV_COLUMNS,
    BenchSpec,
    BenchTarget,
    buffers_allocated,
    emit_report,
    format_verdicts,
    ordering_verdicts,
    percentile_nearest_rank,
    run_e2e_bench,
    run_micro_bench,
    summarize,
)
from v2xcms.crypto import CCMS, SCMS
from v2xcms.errors import MissingPkiState, UnknownTarget
from v2xcms.flows.runner import Lifecycle
from v2xcms.rng import SeededRng


class FakeClock:
    """Each timed call lasts ``pattern[i % len(pattern)]`` microseconds."""

    def __init__(self, pattern):
        self.pattern = pattern
        self.now = 0
        self.calls = 0

    def __call__(self):
        if self.calls % 2:
            self.now += self.pattern[(self.calls // 2) % len(self.pattern)] * 1000
        self.calls += 1
        return self.now


def test_fake_clock_statistics():
    spec = BenchSpec(BenchTarget.HASH, "SHA_256", iterations=35, warmup=3)
    report = run_micro_bench(spec, clock=FakeClock([1, 2, 3, 4, 5, 6, 7]), rng=SeededRng("b"))
    assert report.samples == 35
    assert list(report.raw_us) == [float(i % 7 + 1) for i in range(35)]
    assert (report.min_us, report.median_us, report.mean_us, report.p95_us) == (1.0, 4.0, 4.0, 7.0)


def test_statistics_recomputed_from_raw_samples():
    rng = SeededRng("stats")
    raw = [int.from_bytes(rng.randbytes(2), "big") / 7 for _ in range(101)]
    report = summarize(BenchSpec(BenchTarget.SIGN, "NIST_P256", 101), raw, host="h")
    ordered = sorted(raw)
    assert report.min_us == ordered[0]
    assert report.median_us == ordered[50]
    assert math.isclose(report.mean_us, sum(raw) / len(raw))
    assert report.p95_us == ordered[math.ceil(0.95 * 101) - 1]


def test_percentile_nearest_rank():
    values = list(range(1, 21))
    assert percentile_nearest_rank(values, 95) == 19
    assert percentile_nearest_rank(values, 100) == 20
    assert percentile_nearest_rank(values, 0) == 1


def test_golden_csv():
    spec = BenchSpec(BenchTarget.HASH, "SHA_256", iterations=35, warmup=0)
    report = run_micro_bench(spec, clock=FakeClock([1, 2, 3, 4, 5, 6, 7]), rng=SeededRng("b"))
    assert emit_report([report], "csv") == (
        b"target,algorithm,samples,min_us,median_us,mean_us,p95_us\n"
        b"hash,SHA_256,35,1.0,4.0,4.0,7.0\n"
    )


def test_json_report():
    spec = BenchSpec(BenchTarget.SYM_ENCRYPT, "SM4_128", iterations=30, warmup=0)
    report = run_micro_bench(spec, clock=FakeClock([2]), rng=SeededRng("j"))
    rows = json.loads(emit_report([report, report], "json"))
    assert len(rows) == 2
    assert rows[0]["target"] == "sym_encrypt" and rows[0]["median_us"] == 2.0
    assert set(CSV_COLUMNS) <= set(rows[0])
    assert rows[0]["payload_bytes"] == 1024 and rows[0]["host"]
    parsed = list(csv.DictReader(io.StringIO(emit_report([report], "csv").decode())))
    assert parsed[0]["algorithm"] == "SM4_128"
    with pytest.raises(ValueError):
        emit_report([report], "xml")
    with pytest.raises(ValueError):
        emit_report([], "csv")


def test_one_buffer_per_run():
    before = buffers_allocated()
    run_micro_bench(BenchSpec(BenchTarget.HASH, "SM3_256", iterations=40, warmup=5), rng=SeededRng("a"))
    assert buffers_allocated() - before == 1


@pytest.mark.parametrize("target,alg", [
    (BenchTarget.KEYGEN, "BRAINPOOL_P256"), (BenchTarget.SIGN, "SM2_256"), (BenchTarget.VERIFY, "NIST_P256"),
    (BenchTarget.KEM_KEYGEN, "SM2_256"), (BenchTarget.KEM_ENCAP, "NIST_P256"), (BenchTarget.KEM_DECAP, "SM2_256"),
    (BenchTarget.HASH, "SM3_256"), (BenchTarget.SYM_DECRYPT, "AES_128"),
])
def test_every_micro_target_runs(target, alg):
    report = run_micro_bench(BenchSpec(target, alg, iterations=30, warmup=1), rng=SeededRng("t"))
    assert report.samples == 30 and report.median_us > 0


def test_default_iterations():
    assert BenchSpec(BenchTarget.SIGN, "NIST_P256").iterations == 3000
    assert BenchSpec(BenchTarget.E2E_VERIFY, "SCMS").iterations == 1000
    assert BenchSpec(BenchTarget.HASH, "SM3_256").payload_bytes == 1024


def test_full_sign_run_has_3000_samples():
    report = run_micro_bench(BenchSpec(BenchTarget.SIGN, "NIST_P256", warmup=10), rng=SeededRng("s"))
    assert report.samples == 3000 == len(report.raw_us)


def test_rejections():
    with pytest.raises(ValueError):
        BenchSpec(BenchTarget.SIGN, "NIST_P256", iterations=29)
    with pytest.raises(UnknownTarget):
        run_micro_bench(BenchSpec(BenchTarget.SIGN, "secp999", iterations=30))
    with pytest.raises(UnknownTarget):
        run_micro_bench(BenchSpec(BenchTarget.HASH, "MD5", iterations=30))
    with pytest.raises(UnknownTarget):
        run_micro_bench(BenchSpec(BenchTarget.E2E_SIGN, "SCMS", iterations=30))
    with pytest.raises(UnknownTarget):
        run_e2e_bench(SCMS, "explode", 30)
    with pytest.raises(ValueError):
        BenchSpec("nonsense", "x")


def test_e2e_requires_state(lifecycles):
    with pytest.raises(MissingPkiState):
        run_e2e_bench(SCMS, "verify", 30)
    lc = lifecycles[SCMS.name]
    with pytest.raises(MissingPkiState):
        run_e2e_bench(CCMS, "verify", 30, lc)
    bare = Lifecycle(lc.pki, type("EE", (), {"authorization_credentials": []})(), lc.message)
    with pytest.raises(MissingPkiState):
        run_e2e_bench(SCMS, "generate", 30, bare)


def test_e2e_reports_and_operation_counts(lifecycles):
    reports = {}
    for profile in (SCMS, CCMS):
        for op in ("generate", "verify"):
            reports[profile.name, op] = run_e2e_bench(profile, op, 30, lifecycles[profile.name], warmup=2,
                                                      rng=SeededRng("e2e"))
    r = reports[SCMS.name, "verify"]
    assert r.samples == 30 and r.spec.target is BenchTarget.E2E_VERIFY and r.spec.payload_bytes == 200
    scms_v = reports[SCMS.name, "verify"].scalar_mults_per_op
    ccms_v = reports[CCMS.name, "verify"].scalar_mults_per_op
    assert scms_v == ccms_v + 1
    assert reports[SCMS.name, "generate"].scalar_mults_per_op == reports[CCMS.name, "generate"].scalar_mults_per_op


def _report(target, alg, median):
    return summarize(BenchSpec(target, alg, 30), [median] * 30, host="h")


def test_ordering_verdicts():
    reports = [
        _report(BenchTarget.SIGN, "SM2_256", 200), _report(BenchTarget.SIGN, "NIST_P256", 180),
        _report(BenchTarget.VERIFY, "SM2_256", 1000), _report(BenchTarget.VERIFY, "NIST_P256", 1300),
        _report(BenchTarget.KEM_ENCAP, "SM2_256", 1000), _report(BenchTarget.KEM_ENCAP, "NIST_P256", 1000),
        _report(BenchTarget.E2E_VERIFY, "SCMS", 2500), _report(BenchTarget.E2E_VERIFY, "CCMS", 1500),
        _report(BenchTarget.HASH, "SM3_256", 4.5), _report(BenchTarget.HASH, "SHA_256", 1.3),
    ]
    claims = {c.claim: c for c in ordering_verdicts(reports)}
    assert claims["a"].expected_ordering_held
    assert not claims["b"].expected_ordering_held  # 30% apart
    assert claims["c"].expected_ordering_held
    assert claims["d"].expected_ordering_held and claims["d"].asserted
    assert not claims["hash"].expected_ordering_held and not claims["hash"].asserted
    assert not any(c.asserted for k, c in claims.items() if k != "d")
    text = format_verdicts(list(claims.values()))
    assert text.count("expected_ordering_held:") == len(claims)
    assert "expected_ordering_held: false" in text and "expected_ordering_held: true" in text


def test_verdicts_skip_missing_pairs():
    assert ordering_verdicts([_report(BenchTarget.SIGN, "SM2_256", 1)]) == []
