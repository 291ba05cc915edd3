import imb
import pytest


def test_index_roundtrip_matches_dict():
    idx = imb.Index("alex")
    reference = {}
    for k in range(0, 2000, 2):
        assert idx.insert(k, k * 10) == "ok"
        reference[k] = k * 10
    assert idx.insert(4, 0) == "already_exists"
    assert idx.update(4, 99) == "ok"
    reference[4] = 99
    assert idx.erase(6) == "ok"
    del reference[6]
    assert idx.erase(7) == "not_found"
    assert idx.read(3) is None
    assert len(idx) == len(reference)
    assert idx.items() == sorted(reference.items())
    assert idx.name == "alex"


def test_all_index_kinds_agree():
    items = [(k, k + 1) for k in range(0, 999, 3)]
    views = []
    for kind in ("alex", "art", "btree", "oracle"):
        idx = imb.Index(kind)
        idx.bulk_load(items)
        idx.insert(1, 7)
        idx.erase(3)
        views.append(idx.items())
    assert views[0] == views[1] == views[2] == views[3]


def test_workload_generation_is_deterministic():
    shape = dict(pattern="random", population=5000, domain_lo=0, domain_hi=100000,
                 requests=20000, mix="write_heavy", seed=9)
    a = imb.generate_workload(**shape)
    b = imb.generate_workload(**shape)
    assert a == b
    assert len(a["population"]) == 5000
    assert len(a["requests"]) == 20000
    kinds = {kind for kind, _, _ in a["requests"]}
    assert kinds == {"read", "update", "insert", "delete"}


def test_builtin_mix_fractions():
    assert imb.builtin_mix("read_only") == (1.0, 0.0, 0.0, 0.0)
    assert sum(imb.builtin_mix("write_heavy")) == pytest.approx(1.0)


def test_attribution_matches_hand_computed_shares():
    out = imb.attribution(
        {
            "cycles": 1000,
            "instructions": 2000,
            "slots_retired": 2000,
            "slots_issued": 2300,
            "recovery_cycles": 50,
            "fe_undelivered": 500,
        }
    )
    assert out["cpi"] == 0.5
    assert out["level1"] == {
        "retiring": 0.5,
        "bad_speculation": 0.125,
        "frontend_bound": 0.125,
        "backend_bound": 0.25,
    }
    assert "memory" not in out  # stall counters absent


def test_run_experiment_reports_and_repeats():
    shape = dict(index="btree", pattern="consecutive", population=20000,
                 requests=30000, mix="read_heavy", seed=3, warmup=1000,
                 counters=False)
    a = imb.run_experiment(**shape)
    b = imb.run_experiment(**shape)
    assert a["index"] == "btree"
    assert a["outcomes"]["ok"] + a["outcomes"]["not_found"] + \
        a["outcomes"]["already_exists"] == 30000
    assert a["avg_exec_time_us"] > 0
    assert a["checksum"] == b["checksum"]
    assert a["outcomes"] == b["outcomes"]
    assert a["counters"]["available"] is False
    assert a["attribution"] == {}
