from dwindex.invariants import TOLERANCES, check_clifford, check_transgression, structural_checks


def test_clifford_group_passes():
    results = check_clifford(TOLERANCES)
    assert len(results) == 4
    assert all(r.passed for r in results)


def test_tightened_tolerance_fails():
    (ch1, *_) = check_transgression(dict(TOLERANCES, transgression=1e-30))
    assert not ch1.passed
    assert ch1.value > 0


def test_subset_and_overrides():
    res = structural_checks(only=["transgression"], tolerances={"transgression": 1e-30})
    assert len(res) == 3
    assert not any(r.passed for r in res)
    assert all(r.tolerance == 1e-30 for r in res)
