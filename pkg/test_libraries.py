#!/usr/bin/env python3
"""
Test script to verify that all required libraries are properly installed
"""

import sys


def test_numpy():
    """Test NumPy for array evaluation"""
    import numpy as np
    nodes, weights = np.polynomial.legendre.leggauss(7)
    assert abs(weights.sum() - 2.0) < 1e-14
    print("✓ NumPy imported successfully")


def test_scipy():
    """Test SciPy root finders used by the leaf and third-law solvers"""
    from scipy.optimize import bisect, brentq
    assert abs(bisect(lambda x: x * x - 2.0, 0.0, 2.0, xtol=1e-14) - 2 ** 0.5) < 1e-12
    assert abs(brentq(lambda x: x ** 3 - 8.0, 0.0, 3.0) - 2.0) < 1e-12
    print("✓ SciPy imported successfully")


def test_utilities():
    """Test joblib, tqdm and more-itertools"""
    from joblib import Parallel, delayed
    from more_itertools import distinct_permutations, pairwise
    from tqdm import tqdm
    squares = Parallel(n_jobs=2, prefer="threads")(delayed(pow)(k, 2) for k in tqdm(range(4), disable=True))
    assert squares == [0, 1, 4, 9]
    assert list(pairwise("abc")) == [("a", "b"), ("b", "c")]
    assert len(list(distinct_permutations((0, 1, 2)))) == 6
    print("✓ joblib, tqdm and more-itertools imported successfully")


def test_tomllib():
    """Test tomllib for model files (Python >= 3.11)"""
    import tomllib
    assert tomllib.loads("x = inf")["x"] == float("inf")
    print("✓ tomllib imported successfully")


def test_hypothesis():
    """Test Hypothesis for property tests"""
    import hypothesis
    from hypothesis import strategies  # noqa: F401
    print(f"✓ Hypothesis {hypothesis.__version__} imported successfully")


def main():
    """Run all tests"""
    print("Testing library installations...")
    print("=" * 50)

    tests = [test_numpy, test_scipy, test_utilities, test_tomllib, test_hypothesis]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
        except (ImportError, AssertionError) as e:
            print(f"✗ {test.__name__[5:]} failed: {e}")
        print()

    print("=" * 50)
    print(f"Tests passed: {passed}/{len(tests)}")
    if passed == len(tests):
        print("🎉 All libraries are working correctly!")
    else:
        print("⚠ Some libraries have issues. Check the installation.")
        sys.exit(1)


if __name__ == "__main__":
    main()
