import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from kspace_select.errors import EmptySupportError, SizingError
from kspace_select.evaluation import brute_force_optimal_mask
from kspace_select.formats import fill_path, read_mask, write_mask
from kspace_select.masks import (
    FreqMask,
    MeanImageState,
    SparseSupport,
    adaptive_update,
    algo1_max_modulus,
    algo2_param,
    algo2_per_resolution,
    algo3_interference,
    algo4_influence,
    apply_mask,
    influence_scores,
    nuisance_spectrum,
    random_lowfreq_mask,
    support_from_image,
    top_k,
    top_k_mask,
)
from kspace_select.transforms import (
    Slot,
    dft2,
    dwt2,
    freq_of_wavelet_atom,
    idft2,
    idwt2,
    level_map,
    slot_to_flat,
    wavelet_of_freq_atom,
)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_top_k_ties_go_to_lowest_index():
    v = np.array([1.0, 3.0, 3.0, 2.0, 3.0])
    assert top_k(v, 2).tolist() == [1, 2]
    assert np.flatnonzero(top_k_mask(v, 2)).tolist() == [1, 2]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=40), st.integers(0, 40))
def test_top_k_mask_agrees_with_sort(values, k):
    v = np.array(values, dtype=float)
    k = min(k, len(v))
    ref = np.zeros(len(v), dtype=bool)
    ref[top_k(v, k)] = True
    np.testing.assert_array_equal(top_k_mask(v, k), ref)


# --- support ----------------------------------------------------------------


def test_support_of_constant_image_is_approximation():
    s = support_from_image(np.full((16, 16), 2.0), 1)
    assert s.indices.tolist() == [0]
    assert s.level_counts.tolist() == [1, 0, 0, 0, 0]


def test_support_recovers_exact_sparse_pattern(rng):
    y = np.zeros((16, 16))
    pos = rng.choice(256, 7, replace=False)
    y.flat[pos] = rng.uniform(1, 2, 7)
    s = support_from_image(idwt2(y), 7)
    assert sorted(s.indices.tolist()) == sorted(pos.tolist())


def test_support_separates_magnitudes(rng):
    x = rng.standard_normal((16, 16))
    s = support_from_image(x, 10)
    mag = np.abs(dwt2(x)).ravel()
    assert s.n == 10 and s.level_counts.sum() == 10
    assert mag[s.indices].min() >= np.delete(mag, s.indices).max()
    assert np.all(np.diff(mag[s.indices]) <= 0)


def test_support_budget_checked():
    with pytest.raises(SizingError):
        support_from_image(np.ones((8, 8)), 0)


# --- Algorithm 1 ------------------------------------------------------------------


def test_algo1_two_by_two_example():
    # build a real 2x2 image whose spectrum moduli are [5, 1, 3, 2]
    f = np.array([[5.0, 1.0], [3.0, 2.0]])
    x = idft2(f)
    assert algo1_max_modulus(x, 2).indices.tolist() == [0, 2]


def test_algo1_full_budget_reconstructs(rng):
    x = rng.standard_normal((8, 8))
    mask = algo1_max_modulus(x, 64)
    assert mask.m == 64
    np.testing.assert_allclose(idft2(apply_mask(dft2(x), mask)), x, atol=1e-12)


def test_algo1_budget_checked():
    with pytest.raises(SizingError):
        algo1_max_modulus(np.ones((8, 8)), 65)


def test_algo1_leave_one_out_matches_exhaustive_search(rng):
    for _ in range(20):
        x = rng.standard_normal(8)
        support = SparseSupport((8,), np.arange(8), levels=3)
        best, _ = brute_force_optimal_mask(x, support, 7)
        assert best == algo1_max_modulus(x, 7)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 64))
def test_algo1_excluded_set_is_dominated(seed, m):
    x = np.random.default_rng(seed).standard_normal((8, 8))
    mask = algo1_max_modulus(x, m)
    mod = np.abs(dft2(x)).ravel()
    assert mask.m == m
    if m < 64:
        assert mod[mask.complement].max() <= mod[mask.indices].min()


# --- Algorithm 2 ----------------------------------------------------------------------


def _support(shape, slots, levels=4):
    return SparseSupport(shape, [slot_to_flat(shape, levels, s) for s in slots], levels)


def test_algo2_two_level_support_meets_budget():
    s = _support((16, 16), [Slot(0, "aa", (0, 0)), Slot(2, "dd", (1, 0)), Slot(2, "ad", (0, 1))])
    mask = algo2_per_resolution(s, 16)
    assert mask.m == 16


def test_algo2_approximation_only_support_stays_low_frequency():
    s = _support((16, 16), [Slot(0, "aa", (0, 0))])
    mask = algo2_per_resolution(s, 9)
    base = np.abs(freq_of_wavelet_atom((16, 16), Slot(0, "aa", (0, 0)))).ravel()
    assert set(mask.indices.tolist()) == set(top_k(base, 9).tolist())


def test_algo2_empty_level_contributes_nothing():
    s = _support((16, 16), [Slot(4, "dd", (0, 0)), Slot(4, "dd", (3, 3))])
    mask = algo2_per_resolution(s, 20)
    spec = np.abs(freq_of_wavelet_atom((16, 16), Slot(4, "dd", (0, 0)))).ravel()
    assert set(mask.indices.tolist()) <= set(top_k(spec, 20).tolist())


def test_algo2_literal_param_agrees_with_calibration(rng):
    x = rng.standard_normal((16, 16))
    s = support_from_image(x, 20)
    for m in [10, 40, 100]:
        p = algo2_param(s, m)
        literal = algo2_per_resolution(s, m, param=p)
        calibrated = algo2_per_resolution(s, m)
        assert literal.m >= m and calibrated.m == m
        assert set(calibrated.indices.tolist()) <= set(literal.indices.tolist())


def test_algo2_empty_support():
    with pytest.raises(EmptySupportError):
        algo2_per_resolution(SparseSupport((8, 8), [], 3), 4)


# --- Algorithm 3 -----------------------------------------------------------------------


def _synthesis_matrix(n, levels):
    """Columns are W^T e_i, i.e. the wavelet atoms as signals."""
    return np.stack([idwt2(np.eye(n)[i], levels) for i in range(n)], axis=1)


def _first_argmax(v, tol=1e-12):
    """Lowest index attaining the maximum; conjugate pairs tie up to rounding."""
    return int(np.flatnonzero(v >= v.max() - tol)[0])


def algo3_reference(x, support_idx, m, levels):
    """Literal step-by-step interpreter of the greedy loop, with explicit matrices."""
    n = len(x)
    Wt = _synthesis_matrix(n, levels)
    F = np.fft.fft(np.eye(n), norm="ortho")
    y = Wt.T @ x
    J = []
    partial = np.zeros(n)
    for i in support_idx:
        partial[i] = y[i]
        f = F @ Wt @ partial
        h = _first_argmax(np.abs(f))
        while h in J:
            f[h] = 0
            h = _first_argmax(np.abs(f))
        J.append(h)
        if len(J) == m:
            break
    return sorted(J)


def test_algo3_matches_reference_interpreter(rng):
    for _ in range(20):
        x = rng.standard_normal(16)
        s = support_from_image(x, 3, levels=4)
        got = algo3_interference(x, s, 3).indices.tolist()
        assert got == algo3_reference(x, s.indices, 3, 4)


def test_algo3_single_coefficient():
    slot = Slot(2, "dd", (1, 1))
    y = np.zeros((16, 16))
    y.flat[slot_to_flat((16, 16), 4, slot)] = 2.0
    x = idwt2(y)
    s = support_from_image(x, 1)
    mask = algo3_interference(x, s, 1)
    assert mask.indices.tolist() == [int(np.argmax(np.abs(freq_of_wavelet_atom((16, 16), slot))))]


def test_algo3_separated_atoms_pick_their_own_peaks():
    # approximation and finest-level atoms excite disjoint frequency bands
    slots = [Slot(0, "aa", (0, 0)), Slot(4, "dd", (2, 5))]
    y = np.zeros((16, 16))
    for s, v in zip(slots, [3.0, 1.0]):
        y.flat[slot_to_flat((16, 16), 4, s)] = v
    x = idwt2(y)
    support = support_from_image(x, 2)
    mask = algo3_interference(x, support, 2)
    peaks = {int(np.argmax(np.abs(freq_of_wavelet_atom((16, 16), s)))) for s in slots}
    assert set(mask.indices.tolist()) == peaks


@pytest.mark.parametrize("m", [1, 5, 20, 200])
def test_algo3_meets_budget(rng, m):
    x = rng.standard_normal((16, 16))
    assert algo3_interference(x, support_from_image(x, 20), m).m == m


def test_algo3_extra_budget_takes_strongest_remaining(rng):
    x = rng.standard_normal((16, 16))
    s = support_from_image(x, 4)
    first = algo3_interference(x, s, 4)
    more = algo3_interference(x, s, 10)
    f = np.abs(dft2(idwt2(np.where(s.mask, dwt2(x), 0)))).ravel()
    f[first.indices] = -1
    expected = set(first.indices.tolist()) | set(top_k(f, 6).tolist())
    assert set(more.indices.tolist()) == expected


# --- Algorithm 4 ------------------------------------------------------------------------


def test_algo4_dense_support_uses_influence_alone(rng):
    s = SparseSupport((8, 8), np.arange(64), 3)
    v = influence_scores(s)
    mask = algo4_influence(s, 10)
    assert mask.indices.tolist() == sorted(top_k(v, 10).tolist())


def test_algo4_single_atom_influence_peaks_at_spectrum_peak():
    slot = Slot(3, "da", (1, 1))
    s = _support((16, 16), [slot])
    spec = np.abs(freq_of_wavelet_atom((16, 16), slot))
    v = influence_scores(s)
    np.testing.assert_allclose(v, spec, atol=1e-12)
    assert int(np.argmax(v)) == int(np.argmax(spec))


def test_algo4_single_atom_score_trades_influence_for_nuisance():
    # with one support atom, the other 255 unit slots make the nuisance spectrum,
    # and the top-1 frequency maximizes the ratio rather than v alone
    slot = Slot(3, "da", (1, 1))
    s = _support((16, 16), [slot])
    mask = algo4_influence(s, 1)
    score = influence_scores(s) / (nuisance_spectrum(s) + 1e-12 * nuisance_spectrum(s).max())
    assert mask.indices.tolist() == [int(np.argmax(score))]


def test_influence_routes_agree(rng):
    x = rng.standard_normal((16, 16))
    s = support_from_image(x, 12)
    fast = influence_scores(s, "atoms")
    cols = influence_scores(s, "columns", workers=3)
    np.testing.assert_allclose(fast, cols, atol=1e-12)
    for h in rng.integers(0, 256, size=10):
        direct = np.abs(wavelet_of_freq_atom((16, 16), int(h)).ravel()[s.indices]).max()
        assert fast.flat[h] == pytest.approx(direct, abs=1e-12)


def test_influence_threads_are_deterministic(rng):
    s = support_from_image(rng.standard_normal((8, 8)), 5, levels=3)
    a = influence_scores(s, "columns", workers=1)
    b = influence_scores(s, "columns", workers=4)
    np.testing.assert_array_equal(a, b)


# --- random masks --------------------------------------------------------------------------


def test_random_mask_is_seeded():
    a = random_lowfreq_mask((32, 32), 100, seed=3)
    b = random_lowfreq_mask((32, 32), 100, seed=3)
    c = random_lowfreq_mask((32, 32), 100, seed=4)
    assert a == b and a != c and a.m == 100


def test_random_mask_full_budget():
    assert random_lowfreq_mask((8, 8), 64, seed=0).indices.tolist() == list(range(64))


def test_random_mask_prefers_low_frequencies():
    mask = random_lowfreq_mask((64, 64), 400, seed=1)
    r = np.hypot(*np.meshgrid(np.fft.fftfreq(64, 1 / 64), np.fft.fftfreq(64, 1 / 64), indexing="ij"))
    assert np.median(r.ravel()[mask.indices]) < np.median(r)


def test_random_mask_uniform_limit_passes_chi_square():
    counts = np.zeros(64)
    for seed in range(10_000):
        counts[random_lowfreq_mask((8, 8), 1, seed=seed, decay=np.inf).indices] += 1
    assert stats.chisquare(counts).pvalue > 0.01


# --- adaptive update and masking -------------------------------------------------------------


def test_adaptive_update_examples():
    two, four = np.full((8, 8), 2.0), np.full((8, 8), 4.0)
    assert adaptive_update(MeanImageState(two, 1.0), four).xbar is two
    np.testing.assert_array_equal(adaptive_update(MeanImageState(two, 0.0), four).xbar, four)
    half = adaptive_update(MeanImageState(two, 0.5), four)
    np.testing.assert_array_equal(half.xbar, np.full((8, 8), 3.0))
    assert half.a == 0.5
    with pytest.raises(SizingError):
        adaptive_update(MeanImageState(two, 0.5), np.ones((4, 4)))
    with pytest.raises(ValueError):
        MeanImageState(two, 1.5)


def test_apply_mask_examples(rng):
    f = dft2(rng.standard_normal((8, 8)))
    fill = dft2(rng.standard_normal((8, 8)))
    np.testing.assert_array_equal(apply_mask(f, FreqMask((8, 8), np.arange(64))), f)
    assert not np.any(apply_mask(f, FreqMask((8, 8), [])))
    np.testing.assert_array_equal(apply_mask(f, FreqMask((8, 8), [], fill)), fill)
    part = apply_mask(f, FreqMask((8, 8), [3, 9], fill))
    assert part.flat[3] == f.flat[3] and part.flat[4] == fill.flat[4]


def test_freq_mask_validation():
    with pytest.raises(SizingError):
        FreqMask((8, 8), [1, 1])
    with pytest.raises(SizingError):
        FreqMask((8, 8), [64])
    m = FreqMask((8, 8), [5, 2, 9])
    assert m.indices.tolist() == [2, 5, 9]
    assert len(m.complement) == 61 and not np.any(m.selected.ravel()[m.complement])


def test_mask_file_round_trip(tmp_path, rng):
    fill = dft2(rng.standard_normal((16, 16)))
    mask = algo1_max_modulus(rng.standard_normal((16, 16)), 30).with_fill(fill)
    path = tmp_path / "m.txt"
    write_mask(path, mask)
    lines = path.read_text().splitlines()
    assert lines[0] == "MASK 16 30" and [int(v) for v in lines[1:]] == mask.indices.tolist()
    assert fill_path(path).exists()
    assert read_mask(path) == mask
    plain = FreqMask((16, 16), [0, 7])
    write_mask(tmp_path / "p.txt", plain)
    assert read_mask(tmp_path / "p.txt") == plain


# --- shared properties --------------------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 256), st.integers(1, 40))
def test_every_selector_meets_budget_deterministically(seed, m, n):
    x = np.random.default_rng(seed).standard_normal((16, 16))
    s = support_from_image(x, n)
    masks = [
        algo1_max_modulus(x, m),
        algo2_per_resolution(s, m),
        algo3_interference(x, s, m),
        algo4_influence(s, m),
    ]
    again = [
        algo1_max_modulus(x, m),
        algo2_per_resolution(s, m),
        algo3_interference(x, s, m),
        algo4_influence(s, m),
    ]
    for a, b in zip(masks, again):
        assert a.m == m and a == b


def test_level_counts_sum_to_n(rng):
    s = support_from_image(rng.standard_normal((32, 32)), 50)
    assert s.level_counts.sum() == 50
    lev = level_map((32, 32), 4).ravel()[s.indices]
    assert s.level_counts.tolist() == np.bincount(lev, minlength=5).tolist()
    assert sum(s.group_counts().values()) == 50
