import json

import faultline as fl


def test_bitflip_roundtrip():
    bits = fl.double_to_bits(1.0)
    assert fl.bits_to_double(fl.apply_bitflip(bits, 63)) == -1.0
    assert fl.apply_bitflip(fl.apply_bitflip(bits, 17), 17) == bits


def test_assemble_listing():
    listing = fl.assemble_listing("fmovi f0, 1.5\nfadd f1, f0, f0\nhalt\n")
    assert listing.startswith("0x00000000")
    assert "fadd" in listing


def test_kernels_run_clean():
    assert fl.kernel_names() == ["cg", "ft", "bt"]
    for name in fl.kernel_names():
        serial = fl.run(kernel=name, nranks=1)
        parallel = fl.run(kernel=name, nranks=4)
        rel = abs(serial["checksum"] - parallel["checksum"]) / abs(serial["checksum"])
        assert rel <= 1e-8


def test_profile_counts():
    counts = fl.profile(source="fmovi f0, 1.0\nfadd f1, f0, f0\nfadd f2, f1, f0\nhalt\n")
    assert counts == [2]


def test_single_injection():
    rec = fl.inject(
        source=".verify f0 AUTO 1e-8\nfmovi f0, 1.0\nfmovi f1, 0.0\nfadd f0, f0, f1\nhalt\n",
        k=1,
        bit=63,
    )
    assert rec["outcome"] == "SDC"
    assert rec["checksum"] == -1.0
    assert fl.bits_to_double(rec["original_bits"]) == 1.0


def test_campaign_json_is_deterministic():
    a = fl.run_campaign(kernel="bt", trials=40, seed=9, jobs=1)
    b = fl.run_campaign(kernel="bt", trials=40, seed=9, jobs=4)
    assert a == b
    doc = json.loads(a)
    assert doc["config"]["trials"] == 40
    assert len(doc["records"]) == 40
    outcomes = {r["outcome"] for r in doc["records"]}
    assert outcomes <= {"Benign", "SDC", "Crash"}
    assert "Crash" not in outcomes  # kernel trials never crash


def test_exhaustive_micro_program():
    doc = json.loads(
        fl.run_exhaustive(
            source=".verify f0 AUTO 1e-8\nfmovi f0, 1.0\nfmovi f1, 0.0\n"
            "fadd f0, f0, f1\nhalt\n"
        )
    )
    assert len(doc["records"]) == 64
    benign_bits = {r["bit"] for r in doc["records"] if r["outcome"] == "Benign"}
    assert benign_bits == set(range(26))


def test_analyze_report():
    serial = fl.run_campaign(kernel="ft", trials=80, seed=1)
    parallel = fl.run_campaign(kernel="ft", mode="parallel", trials=80, seed=2)
    report = json.loads(fl.analyze(serial, parallel))
    assert report["kernel"] == "ft"
    jac = report["mode_metrics"]["jaccard_support"]
    assert 0.0 <= jac <= 1.0
    for hist in report["histograms"]:
        assert hist["total"] == sum(e["count"] for e in hist["counts"])
