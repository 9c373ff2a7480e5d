import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixhc import cube, matcore
from matrixhc.cube import CubeFunction, fourier_transform, inverse_fourier, noise_operator
from matrixhc.errors import FormatError
from matrixhc.rng import make_rng

from oracles import bitflip_average, naive_fourier


def random_function(rng, n, d):
    return CubeFunction(n, matcore.random_ginibre(rng, d, size=(1 << n,)))


def test_popcount_and_sizes():
    assert cube.popcount(0b1011) == 3
    np.testing.assert_array_equal(cube.popcount(np.arange(8)), [0, 1, 1, 2, 1, 2, 2, 3])
    np.testing.assert_array_equal(cube.subset_sizes(3), [0, 1, 1, 2, 1, 2, 2, 3])
    assert cube.bits_of(0b1010) == [1, 3]


def test_character_signs():
    assert cube.character(0b011, 0b001) == -1
    assert cube.character(0b011, 0b011) == 1
    assert cube.character(0, 0b111) == 1


def test_constructor_validation():
    with pytest.raises(ValueError):
        CubeFunction(2, np.zeros((3, 1, 1)))
    with pytest.raises(ValueError):
        CubeFunction(1, np.zeros((2, 2, 3)))
    f = CubeFunction.scalar([1.0, -1.0])
    assert f.dim == 1 and f.n == 1
    with pytest.raises(ValueError):
        f.table[0, 0, 0] = 3


class TestFourier:
    def test_constant(self):
        M = matcore.random_ginibre(make_rng(0), 3)
        fhat = fourier_transform(CubeFunction.from_function(3, lambda x: M)).table
        np.testing.assert_allclose(fhat[0], M, atol=1e-15)
        assert np.abs(fhat[1:]).max() <= 1e-15

    @pytest.mark.parametrize("T", [0b001, 0b110, 0b111])
    def test_single_character(self, T):
        M = matcore.random_ginibre(make_rng(T), 2)
        f = CubeFunction.from_function(3, lambda x: cube.character(T, x) * M)
        fhat = fourier_transform(f).table
        np.testing.assert_allclose(fhat[T], M, atol=1e-15)
        assert np.abs(np.delete(fhat, T, axis=0)).max() <= 1e-15

    def test_naive_oracle(self):
        f = random_function(make_rng(1), 4, 3)
        fast = fourier_transform(f).table
        assert np.abs(fast - naive_fourier(f.table, 4)).max() <= 1e-12

    def test_inverse_examples(self):
        zero = CubeFunction(3, np.zeros((8, 2, 2)))
        assert np.abs(inverse_fourier(zero).table).max() == 0
        coeffs = np.zeros((8, 2, 2), dtype=complex)
        coeffs[0] = np.eye(2)
        back = inverse_fourier(CubeFunction(3, coeffs)).table
        np.testing.assert_allclose(back, np.broadcast_to(np.eye(2), (8, 2, 2)))

    def test_round_trip(self):
        f = random_function(make_rng(2), 5, 2)
        assert np.abs(inverse_fourier(fourier_transform(f)).table - f.table).max() <= 1e-11

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 6), d=st.integers(1, 3))
    def test_linearity(self, seed, n, d):
        rng = make_rng(seed)
        f, g = random_function(rng, n, d), random_function(rng, n, d)
        a = complex(*rng.standard_normal(2))
        combined = CubeFunction(n, f.table + a * g.table)
        lhs = fourier_transform(combined).table
        rhs = fourier_transform(f).table + a * fourier_transform(g).table
        assert np.abs(lhs - rhs).max() <= 1e-11 * (1 + abs(a))

    def test_walsh_hadamard_is_its_own_inverse_up_to_scale(self):
        data = make_rng(3).standard_normal((16, 2))
        np.testing.assert_allclose(cube.walsh_hadamard(cube.walsh_hadamard(data)) / 16, data, atol=1e-13)

    def test_transform_guard(self):
        with pytest.raises(ValueError):
            cube.walsh_hadamard(np.zeros(6))


class TestParseval:
    def test_zero(self):
        assert cube.parseval_gap(CubeFunction(2, np.zeros((4, 2, 2)))) == 0.0

    def test_character_times_identity(self):
        f = CubeFunction.from_function(3, lambda x: cube.character(0b101, x) * np.eye(2))
        assert cube.parseval_gap(f) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_random(self, seed):
        assert cube.parseval_gap(random_function(make_rng(seed), 4, 4)) <= 1e-10


class TestNoise:
    def test_rho_one_identity(self):
        f = random_function(make_rng(0), 3, 2)
        np.testing.assert_allclose(noise_operator(f, 1.0).table, f.table, atol=1e-14)

    def test_rho_zero_constant_mean(self):
        f = random_function(make_rng(1), 3, 2)
        out = noise_operator(f, 0.0).table
        np.testing.assert_allclose(out, np.broadcast_to(f.table.mean(axis=0), out.shape), atol=1e-14)

    @pytest.mark.parametrize("rho", [0.5, 0.2, 0.9])
    def test_bitflip_oracle(self, rho):
        f = random_function(make_rng(2), 3, 2)
        np.testing.assert_allclose(noise_operator(f, rho).table, bitflip_average(f.table, 3, rho), atol=1e-13)

    @pytest.mark.parametrize("rho", [-0.1, 1.5])
    def test_range(self, rho):
        with pytest.raises(ValueError):
            noise_operator(CubeFunction.scalar([1.0, 2.0]), rho)

    def test_semigroup(self):
        f = random_function(make_rng(3), 4, 2)
        twice = noise_operator(noise_operator(f, 0.6), 0.5).table
        np.testing.assert_allclose(twice, noise_operator(f, 0.3).table, atol=1e-13)


class TestSerialization:
    def test_binary_round_trip(self, tmp_path):
        f = random_function(make_rng(4), 3, 2)
        cube.save(f, tmp_path / "f.bin")
        g = cube.load(tmp_path / "f.bin")
        assert g.n == 3 and np.array_equal(g.table, f.table)
        assert cube.from_bytes(cube.to_bytes(f)).table.tobytes() == f.table.tobytes()

    def test_json_round_trip(self, tmp_path):
        f = random_function(make_rng(5), 2, 3)
        cube.save(f, tmp_path / "f.json")
        assert np.array_equal(cube.load(tmp_path / "f.json").table, f.table)

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            cube.from_bytes(b"NOPE" + b"\0" * 32)

    def test_truncated(self):
        blob = cube.to_bytes(random_function(make_rng(6), 2, 2))
        with pytest.raises(FormatError):
            cube.from_bytes(blob[:-8])

    def test_malformed_json(self, tmp_path):
        (tmp_path / "bad.json").write_text('{"n": 1, "d": 1, "table": [[[[1, 0]]]]}')
        with pytest.raises(FormatError):
            cube.load(tmp_path / "bad.json")
