import numpy as np
import pytest

from ratlimits.core.roots import _backward_error, form_roots, form_roots_batch


@pytest.mark.filterwarnings("error::numpy.exceptions.ComplexWarning")
def test_backward_error_is_real():
    coeffs_hi = np.array([[1.0 + 1j, 0.0, -2.0 + 0.5j]])
    x = np.array([[1.0 + 0.5j, -0.3 + 2j]])
    err = _backward_error(coeffs_hi, x)
    print(f"[INFO] backward errors {err}")
    assert err.dtype == np.float64
    assert np.all(err >= 0)


@pytest.mark.filterwarnings("error::numpy.exceptions.ComplexWarning")
def test_complex_roots_raise_no_warning():
    roots = form_roots(np.array([1.0 + 2j, -1j, 0.5, 1.0 + 0j]))      # cubic with complex coefficients
    print(f"[INFO] clusters {[(repr(c.point), c.multiplicity) for c in roots.clusters]}")
    assert roots.total == 3
    batch = form_roots_batch(np.array([[1j, 0.0, 1.0], [2.0, 1j, 1.0]]))
    assert batch.shape[0] == 2


def test_double_root_is_one_cluster():
    roots = form_roots(np.array([1.0, -2.0, 1.0]))                     # (z - w)²
    assert len(roots.clusters) == 1
    assert roots.clusters[0].multiplicity == 2
    assert abs(roots.clusters[0].point.to_complex() - 1) < 1e-6
