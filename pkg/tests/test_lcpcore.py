"""Tests for block decompositions, similarity checks, and metric assembly.

Numeric oracles are high-precision cosine values for the eigenvalues of
the degree-3 example and closed forms for the quadratic one; structural
expectations (block shapes, exact zeros, functional coefficients) are
frozen from hand derivations.
"""

import pytest
from mpmath import mp

from lcpforge._backend import QQ
from lcpforge.embeddings import embeddings, tolerance
from lcpforge.errors import CheckFailureError, InputError, StructureError
from lcpforge.intlinalg import IntMatrix, companion, matrix_from_string, poly_apply
from lcpforge.lcpcore import (
    AffineFunctional,
    SimilarityGenerator,
    UnitWitness,
    add_cross_terms,
    build_metric_spec,
    check_J1,
    check_J2,
    evaluate_metric,
    extend,
    find_block_decomposition,
    lcp_rank,
    solve_equivariant_functional,
    verify_equivariance,
    verify_unit_ratio,
)
from lcpforge.numberfield import field_new
from lcpforge.polynomials import IntPoly, real_subfield_minpoly

M7 = real_subfield_minpoly(7)
PLASTIC = IntPoly((-1, -1, 0, 1))


def _cos_roots(prec=240):
    # ascending roots of the degree-3 polynomial: 2cos(6pi/7) < 2cos(4pi/7) < 2cos(2pi/7)
    with mp.workprec(prec):
        return [2 * mp.cos(2 * mp.pi * k / 7) for k in (3, 2, 1)]


@pytest.fixture(scope="module")
def rank2_matrices():
    a1 = companion(M7)
    a2 = poly_apply(IntPoly((-2, 0, 1)), a1)
    return a1, a2


@pytest.fixture(scope="module")
def rank2_setup(rank2_matrices):
    a1, a2 = rank2_matrices
    decomp = find_block_decomposition([a1, a2], 128)
    ratios = check_J1(decomp, [a1, a2])
    return decomp, ratios


@pytest.fixture(scope="module")
def rank2_metric(rank2_setup):
    decomp, ratios = rank2_setup
    with mp.workprec(decomp.workbits):
        v1 = (mp.log(ratios.entries[0][0]), mp.mpf(0))
        v2 = (mp.mpf(0), mp.log(ratios.entries[1][0]))
    spec = build_metric_spec(decomp, ratios, 0, [v1, v2])
    a1, a2 = ratios.generators
    gens = [
        SimilarityGenerator("g0", a1, (0, 0, 0), v1, ratios.entries[0]),
        SimilarityGenerator("g1", a2, (0, 0, 0), v2, ratios.entries[1]),
    ]
    return spec, gens


@pytest.fixture(scope="module")
def squared_metric(rank2_matrices):
    # squared generators scale every block by a positive factor, which is
    # what the cross-term covariance check needs
    a1, a2 = rank2_matrices
    b1, b2 = a1 * a1, a2 * a2
    decomp = find_block_decomposition([b1, b2], 128)
    ratios = check_J1(decomp, [b1, b2])
    with mp.workprec(decomp.workbits):
        v1 = (mp.log(ratios.entries[0][0]), mp.mpf(0))
        v2 = (mp.mpf(0), mp.log(ratios.entries[1][0]))
    spec = build_metric_spec(decomp, ratios, 0, [v1, v2])
    gens = [
        SimilarityGenerator("s0", b1, (0, 0, 0), v1, ratios.entries[0]),
        SimilarityGenerator("s1", b2, (0, 0, 0), v2, ratios.entries[1]),
    ]
    return spec, gens


class TestBlockDecomposition:
    def test_rank2_block_structure(self, rank2_setup):
        decomp, _ = rank2_setup
        assert decomp.p == 3
        assert decomp.delta == 3
        assert decomp.blocks == ((0, 1), (1, 1), (2, 1))

    def test_basis_column_matches_exact_eigenvector(self, rank2_setup):
        # first basis column spans (1, alpha + alpha^2, alpha)
        decomp, _ = rank2_setup
        with mp.workprec(220):
            alpha = _cos_roots()[2]
            exact = [mp.mpf(1), alpha + alpha ** 2, alpha]
            col = [decomp.basis[i][0] for i in range(3)]
            scaled = [c / col[0] for c in col]
            for got, want in zip(scaled, exact):
                assert abs(got - want) < mp.mpf(2) ** -120

    def test_ratios_are_conjugate_moduli(self, rank2_setup):
        _, ratios = rank2_setup
        with mp.workprec(220):
            r3, r2, r1 = _cos_roots()  # ascending
            # generator 0 has eigenvalues (r1, r2, r3) on the descending blocks
            want0 = [abs(r1), abs(r2), abs(r3)]
            want1 = [abs(r2), abs(r3), abs(r1)]
            for got, want in zip(ratios.entries[0], want0):
                assert abs(got - want) < mp.mpf(2) ** -100
            for got, want in zip(ratios.entries[1], want1):
                assert abs(got - want) < mp.mpf(2) ** -100

    def test_quadratic_matrix(self):
        b = matrix_from_string("1,1;1,2")
        decomp = find_block_decomposition([b], 128)
        assert decomp.blocks == ((0, 1), (1, 1))
        ratios = check_J1(decomp, [b])
        with mp.workprec(220):
            expanding = (3 + mp.sqrt(5)) / 2
            contracting = (3 - mp.sqrt(5)) / 2
            assert abs(ratios.entries[0][0] - expanding) < mp.mpf(2) ** -100
            assert abs(ratios.entries[0][1] - contracting) < mp.mpf(2) ** -100

    def test_complex_pair_block(self):
        m = companion(PLASTIC)
        decomp = find_block_decomposition([m], 128)
        assert decomp.blocks == ((0, 1), (1, 2))
        ratios = check_J1(decomp, [m])
        with mp.workprec(220):
            # the real scaling times the squared pair modulus is the norm
            prod = ratios.entries[0][0] * ratios.entries[0][1] ** 2
            assert abs(prod - 1) < mp.mpf(2) ** -64

    def test_identity_family_rejected(self):
        with pytest.raises(StructureError):
            find_block_decomposition([IntMatrix.identity(2)], 128)

    def test_single_rotation_block_rejected(self):
        with pytest.raises(StructureError):
            find_block_decomposition([matrix_from_string("0,-1;1,0")], 128)

    def test_non_commuting_rejected(self, rank2_matrices):
        a1, _ = rank2_matrices
        with pytest.raises(InputError):
            find_block_decomposition([a1, matrix_from_string("1,0,0;1,1,0;0,0,1")], 128)

    def test_non_lattice_map_rejected(self):
        with pytest.raises(InputError):
            find_block_decomposition([matrix_from_string("2,0;0,1")], 128)

    def test_dimension_one_rejected(self):
        with pytest.raises(StructureError):
            find_block_decomposition([IntMatrix(((1,),))], 128)


class TestJ1:
    def test_off_block_leakage_fails(self, rank2_setup):
        decomp, _ = rank2_setup
        # a lattice map that does not commute with the family cannot
        # preserve the eigenblocks
        stranger = matrix_from_string("1,1,0;0,1,0;0,0,1")
        with pytest.raises(CheckFailureError):
            check_J1(decomp, [stranger])

    def test_ratio_rows_multiplicative(self, rank2_setup, rank2_matrices):
        decomp, ratios = rank2_setup
        a1, a2 = rank2_matrices
        tol = tolerance(decomp.precision_bits)
        with mp.workprec(decomp.workbits):
            prod = check_J1(decomp, [a1 * a2]).entries[0]
            for k in range(decomp.delta):
                assert abs(prod[k] - ratios.entries[0][k] * ratios.entries[1][k]) < 8 * tol
            cube = check_J1(decomp, [a1 * a1 * a2]).entries[0]
            for k in range(decomp.delta):
                want = ratios.entries[0][k] ** 2 * ratios.entries[1][k]
                assert abs(cube[k] - want) < 16 * tol


class TestJ2:
    def test_rank2_flat_is_not_isometric(self, rank2_setup):
        _, ratios = rank2_setup
        assert check_J2(ratios, 0) is True

    def test_isometric_flat_block(self):
        # diag(1, -1) acts with ratio exactly one on both eigenlines
        m = matrix_from_string("1,0;0,-1")
        decomp = find_block_decomposition([m], 128)
        ratios = check_J1(decomp, [m])
        assert check_J2(ratios, 0) is False
        assert check_J2(ratios, 1) is False

    def test_flat_index_validated(self, rank2_setup):
        _, ratios = rank2_setup
        with pytest.raises(InputError):
            check_J2(ratios, 5)


class TestFunctionalSolver:
    def test_exact_solution(self):
        with mp.workprec(200):
            v1 = (mp.log(2), mp.mpf(0))
            v2 = (mp.mpf(0), mp.log(3))
            targets = (mp.log(2) * mp.mpf("4.5"), -mp.log(3))
        f = solve_equivariant_functional([v1, v2], targets, 128)
        with mp.workprec(200):
            assert abs(f.coeffs[0] - mp.mpf("4.5")) < mp.mpf(2) ** -60
            assert abs(f.coeffs[1] + 1) < mp.mpf(2) ** -60
            assert f.constant == 0

    def test_inconsistent_targets_rejected(self):
        with pytest.raises(StructureError):
            solve_equivariant_functional([(1, 0), (2, 0)], (1, 3), 128)

    def test_underdetermined_system_solved(self):
        f = solve_equivariant_functional([(2, 0)], (5,), 128)
        with mp.workprec(200):
            assert abs(f.shift((2, 0)) - 5) < mp.mpf(2) ** -60
            assert f.coeffs[1] == 0

    def test_shape_validation(self):
        with pytest.raises(InputError):
            solve_equivariant_functional([(1, 0)], (1, 2), 128)
        with pytest.raises(InputError):
            solve_equivariant_functional([], (), 128)


class TestMetricAssembly:
    def test_functional_increments_match_ratios(self, rank2_metric):
        spec, gens = rank2_metric
        tol = tolerance(spec.precision_bits)
        with mp.workprec(spec.decomposition.workbits):
            for j, gen in enumerate(gens):
                lam1 = spec.ratios.entries[j][spec.flat_block]
                for k in range(spec.decomposition.delta):
                    want = mp.log(lam1 / spec.ratios.entries[j][k])
                    got = spec.functionals[k].shift(gen.base_translation)
                    assert abs(got - want) < tol
                got0 = spec.base_conformal.shift(gen.base_translation)
                assert abs(got0 - mp.log(lam1)) < tol

    def test_block_diagonal_with_exact_zeros(self, rank2_metric):
        spec, _ = rank2_metric
        gram = evaluate_metric(spec, [0, 0, 0, QQ(1, 4), QQ(-2, 3)])
        total = spec.total_dim
        assert total == 5
        for i in range(total):
            for j in range(total):
                if i != j:
                    assert gram[i][j] == 0
                else:
                    assert gram[i][j] > 0
        # flat block carries the identity form
        assert gram[0][0] == 1

    def test_point_length_validated(self, rank2_metric):
        spec, _ = rank2_metric
        with pytest.raises(InputError):
            evaluate_metric(spec, [0, 0, 0])

    def test_flat_block_index_validated(self, rank2_setup):
        decomp, ratios = rank2_setup
        with pytest.raises(InputError):
            build_metric_spec(decomp, ratios, 7, [(1, 0), (0, 1)])


class TestEquivariance:
    def test_rank2_residuals(self, rank2_metric):
        spec, gens = rank2_metric
        for gen in gens:
            report = verify_equivariance(spec, gen, samples=100, precision=128, seed=0)
            assert report.verdict is True
            assert report.samples == 100
            with mp.workprec(200):
                assert report.max_residual < mp.mpf("1e-25")
                assert report.max_residual < mp.mpf(2) ** -64

    def test_identity_generator_zero_residual(self, rank2_metric):
        spec, _ = rank2_metric
        identity = SimilarityGenerator(
            "id", IntMatrix.identity(3), (0, 0, 0), (0, 0), (1, 1, 1)
        )
        report = verify_equivariance(spec, identity, samples=10, precision=128, seed=0)
        assert report.verdict is True
        assert report.max_residual == 0

    def test_perturbation_flips_verdict(self, rank2_metric):
        spec, gens = rank2_metric
        with mp.workprec(200):
            f1 = spec.functionals[1]
            bumped = AffineFunctional(
                (f1.coeffs[0] + mp.mpf("0.001"), f1.coeffs[1]), f1.constant
            )
        bad = spec.replace(
            functionals=(spec.functionals[0], bumped, spec.functionals[2])
        )
        report = verify_equivariance(bad, gens[0], samples=20, precision=128, seed=0)
        assert report.verdict is False

    def test_seeded_samples_reproduce(self, rank2_metric):
        spec, gens = rank2_metric
        r1 = verify_equivariance(spec, gens[0], samples=25, precision=128, seed=42)
        r2 = verify_equivariance(spec, gens[0], samples=25, precision=128, seed=42)
        assert r1.max_residual == r2.max_residual
        r3 = verify_equivariance(spec, gens[0], samples=25, precision=128, seed=43)
        assert r3.max_residual != r1.max_residual


class TestCrossTerms:
    def test_coupling_added_and_equivariant(self, squared_metric):
        spec, gens = squared_metric
        coupled = add_cross_terms(spec, [(1, 2)])
        assert len(coupled.cross_terms) == 1
        term = coupled.cross_terms[0]
        with mp.workprec(200):
            assert 0 < term.epsilon <= 1
        gram = evaluate_metric(coupled, [0, 0, 0, QQ(1, 3), QQ(2, 5)])
        assert gram[1][2] != 0
        assert gram[1][2] == gram[2][1]
        assert gram[0][1] == 0
        for gen in gens:
            report = verify_equivariance(coupled, gen, samples=50, precision=128, seed=5)
            assert report.verdict is True

    def test_sign_indefinite_action_rejected(self, rank2_metric):
        # the unsquared generators flip orientation on some blocks, so the
        # all-ones coupling table is not covariant
        spec, _ = rank2_metric
        with pytest.raises(CheckFailureError):
            add_cross_terms(spec, [(1, 2)])

    def test_pair_validation(self, squared_metric):
        spec, _ = squared_metric
        with pytest.raises(InputError):
            add_cross_terms(spec, [(1, 1)])
        with pytest.raises(InputError):
            add_cross_terms(spec, [(0, 1)])  # touches the flat block
        with pytest.raises(InputError):
            add_cross_terms(spec, [(1, 9)])
        with pytest.raises(InputError):
            add_cross_terms(spec, [(1, 2)], tables=[[[1, 1]]])

    def test_empty_pairs_is_identity(self, squared_metric):
        spec, _ = squared_metric
        assert add_cross_terms(spec, []) is spec


class TestExtension:
    def test_extension_keeps_equivariance(self, squared_metric):
        spec, gens = squared_metric
        bigger = extend(spec, spec.base_conformal, [[2, 1], [1, 2]])
        assert bigger.total_dim == spec.total_dim + 2
        gram = evaluate_metric(bigger, [0, 0, 0, QQ(1, 7), QQ(1, 9)])
        assert gram[5][6] == gram[6][5] != 0
        for gen in gens:
            report = verify_equivariance(bigger, gen, samples=30, precision=128, seed=2)
            assert report.verdict is True

    def test_mismatched_functional_rejected(self, squared_metric):
        spec, _ = squared_metric
        with pytest.raises(CheckFailureError):
            extend(spec, spec.functionals[1], [[1]])

    def test_gram_validation(self, squared_metric):
        spec, _ = squared_metric
        with pytest.raises(InputError):
            extend(spec, spec.base_conformal, [[1, 2], [2, 1]])  # not PD
        with pytest.raises(InputError):
            extend(spec, spec.base_conformal, [[1, 0], [1, 1]])  # not symmetric
        with pytest.raises(InputError):
            extend(spec, spec.base_conformal, [[1, 0]])  # not square
        assert extend(spec, spec.base_conformal, []) is spec


class TestRankAndWitnesses:
    def test_lcp_rank_two(self, rank2_setup):
        decomp, ratios = rank2_setup
        field = field_new(M7)
        alpha = field.gen()
        sigma_alpha = field.from_coords((-2, 0, 1))
        # block k of the descending order matches ascending embedding 2 - k
        w0 = [UnitWitness(alpha, 2 - k) for k in range(3)]
        w1 = [UnitWitness(sigma_alpha, 2 - k) for k in range(3)]
        tagged = ratios.with_witnesses([w0, w1])
        assert lcp_rank(tagged, 0) == 2
        assert lcp_rank(tagged, 1) == 2

    def test_witnesses_match_embeddings(self, rank2_setup):
        from lcpforge.embeddings import verify_ratio_witness

        decomp, ratios = rank2_setup
        field = field_new(M7)
        emb = embeddings(field, 128)
        alpha = field.gen()
        sigma_alpha = field.from_coords((-2, 0, 1))
        for k in range(3):
            assert verify_ratio_witness(emb, alpha, 2 - k, ratios.entries[0][k])
            assert verify_ratio_witness(emb, sigma_alpha, 2 - k, ratios.entries[1][k])

    def test_rank_requires_witnesses(self, rank2_setup):
        _, ratios = rank2_setup
        with pytest.raises(InputError):
            lcp_rank(ratios, 0)

    def test_witness_shape_validated(self, rank2_setup):
        _, ratios = rank2_setup
        field = field_new(M7)
        with pytest.raises(InputError):
            ratios.with_witnesses([[UnitWitness(field.gen(), 0)]])

    def test_verify_unit_ratio_exact(self):
        field = field_new(M7)
        assert verify_unit_ratio(field.gen()) is True
        assert verify_unit_ratio(2 * field.gen()) is False

    def test_witness_exponent_validated(self):
        field = field_new(M7)
        with pytest.raises(InputError):
            UnitWitness(field.gen(), 0, exponent=0)


class TestSimilarityGenerator:
    def test_validation(self, rank2_matrices):
        a1, _ = rank2_matrices
        with pytest.raises(InputError):
            SimilarityGenerator("bad", matrix_from_string("2,0;0,1"), (0, 0), (0,), (1, 1))
        with pytest.raises(InputError):
            SimilarityGenerator("bad", a1, (0, 0), (0, 0), (1, 1, 1))
        with pytest.raises(InputError):
            SimilarityGenerator("bad", a1, (0, 0, 0), (0, 0), (1, -1, 1))
        gen = SimilarityGenerator("ok", a1, (QQ(1, 2), 0, 0), (0, 0), (1, 1, 1))
        assert gen.translation[0] == QQ(1, 2)
