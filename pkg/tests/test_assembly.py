"""Assembly and partition tests: reconstruction, determinacy, reduced operators."""

import numpy as np
import pytest

from reanalyze.assembly import (
    assemble_global,
    assemble_parameters,
    factorize_stiffness,
    make_partition,
    reduced_apply,
    reduced_gram,
    reduced_rhs,
    update_partition,
)
from reanalyze.errors import BasisUnstableError, NotDeterminateError, UnstableStructureError
from reanalyze.model import (
    MaterialSpec,
    Node,
    PartitionSpec,
    PointLoad,
    SectionSpec,
    StructuralModel,
    apply_floor_grading,
    build_frame_grid,
    build_truss_grid,
    default_additional_set,
)
from reanalyze.model import ElementKind, ElementRecord, MemberTag

from helpers import dense_truss_solution, rel_err


def small_models():
    fg = MaterialSpec(e_us=26000.0, e_ls=14000.0, p=2.0)
    return [
        build_truss_grid(1, 1),
        build_truss_grid(3, 2),
        build_truss_grid(2, 4, area=35.0, e0=12000.0),
        build_frame_grid(2, 2),
        build_frame_grid(1, 2, n_sb=2, n_sc=3),
        build_frame_grid(2, 1, n_sb=3, material=fg),
    ]


class TestAssembleGlobal:
    def test_single_bar_reduces_to_scalar(self):
        nodes = [Node(0, 0.0, 0.0), Node(1, 1.0, 0.0)]
        elem = ElementRecord(0, ElementKind.TRUSS_BAR, 0, 1, SectionSpec(area=1.0),
                             MaterialSpec(e=1.0), MemberTag("chord", 1, 1))
        model = StructuralModel(nodes, [elem], {0: (0, 1), 1: (1,)},
                                [PointLoad(1, 0, 1.0)])
        k = assemble_global(model).toarray()
        assert k.shape == (1, 1)
        assert k[0, 0] == pytest.approx(1.0)  # EA/L

    def test_symmetry(self):
        for model in small_models():
            k = assemble_global(model)
            assert abs(k - k.T).max() == 0.0

    def test_against_independent_truss_assembly(self):
        model = build_truss_grid(3, 1, area=20.0, e0=20000.0)
        d_oracle = dense_truss_solution(model)
        d = factorize_stiffness(model).solve(model.load_vector())
        assert rel_err(d, d_oracle) < 1e-12

    def test_incomplete_material_is_reported(self):
        # documents can carry a graded element whose material lacks the
        # exponent; the error must be a package error, not a TypeError
        import dataclasses
        from reanalyze.assembly import element_decomposition
        from reanalyze.errors import InvalidParameterError
        fg = MaterialSpec(e_us=2e4, e_ls=2e4, p=1.0)
        model = build_frame_grid(1, 1, material=fg)
        broken = model.replace_materials(
            {e.id: dataclasses.replace(e.material, p=None) for e in model.elements})
        with pytest.raises(InvalidParameterError):
            element_decomposition(broken, broken.elements[0])

    def test_singular_detection(self):
        # two collinear bars in series loaded transversally: mechanism
        nodes = [Node(0, 0.0, 0.0), Node(1, 1.0, 0.0), Node(2, 2.0, 0.0)]
        mk = lambda i, a, b: ElementRecord(i, ElementKind.TRUSS_BAR, a, b,
                                           SectionSpec(area=1.0), MaterialSpec(e=1.0),
                                           MemberTag("chord", 1, i + 1))
        model = StructuralModel(nodes, [mk(0, 0, 1), mk(1, 1, 2)],
                                {0: (0, 1), 2: (0, 1)}, [])
        with pytest.raises(UnstableStructureError):
            factorize_stiffness(model)


class TestAssembleParameters:
    def test_reconstruction_identity(self):
        for model in small_models():
            dec = assemble_parameters(model)
            k_direct = assemble_global(model).toarray()
            k_from_modes = (dec.c.T @ dec.k_l() @ dec.c).toarray()
            assert rel_err(k_from_modes, k_direct) < 1e-12

    def test_parameter_counts(self):
        truss = build_truss_grid(4, 3)
        assert assemble_parameters(truss).total_params == len(truss.elements)
        frame = build_frame_grid(3, 2, n_sb=2)
        assert assemble_parameters(frame).total_params == 3 * len(frame.elements)

    def test_rows_restricted_to_free_dofs(self):
        model = build_truss_grid(2, 2)
        dec = assemble_parameters(model)
        assert dec.c.shape == (len(model.elements), model.n)


class TestMakePartition:
    def test_reference_reduced_size(self):
        model = build_truss_grid(31, 64)
        part = make_partition(model, default_additional_set(model))
        assert (part.q, part.n) == (1920, 4096)
        assert part.q / part.n == pytest.approx(0.469, abs=5e-4)

    def test_empty_additional_set(self):
        model = build_truss_grid(1, 2)
        part = make_partition(model, PartitionSpec.of([]))
        assert part.q == 0
        k = assemble_global(model).toarray()
        k_b = (part.c_b.T @ part.k_lb @ part.c_b).toarray()
        assert rel_err(k_b, k) < 1e-12

    def test_count_mismatch_raises(self):
        model = build_truss_grid(3, 2)
        spec = default_additional_set(model)
        extra = next(e.id for e in model.elements if e.id not in spec.additional_ids)
        with pytest.raises(NotDeterminateError):
            make_partition(model, PartitionSpec.of(set(spec.additional_ids) | {extra}))

    def test_geometrically_unstable_basis(self):
        # removing a first-span chord instead of a diagonal keeps the count but
        # leaves the top-left node unsupported horizontally
        model = build_truss_grid(2, 1)
        chord1 = next(e.id for e in model.elements
                      if e.tag.kind == "chord" and e.tag.span == 1)
        with pytest.raises(BasisUnstableError):
            make_partition(model, PartitionSpec.of([chord1]))

    def test_basis_factorization_roundtrip(self):
        model = build_truss_grid(3, 3)
        part = make_partition(model, default_additional_set(model))
        rng = np.random.default_rng(3)
        v = rng.standard_normal(part.n)
        assert rel_err(part.c_b @ part.solve_c_b(v), v) < 1e-10
        assert rel_err(part.c_b.T @ part.solve_c_b_t(v), v) < 1e-10

    def test_additional_rows_in_ascending_id_order(self):
        model = build_truss_grid(4, 2)
        part = make_partition(model, default_additional_set(model))
        assert np.all(np.diff(part.additional_ids) > 0)
        d = np.arange(model.n, dtype=float)
        dec = assemble_parameters(model)
        stacked = np.concatenate(
            [dec.c[dec.offsets[i]:dec.offsets[i + 1]] @ d for i in part.additional_ids])
        assert np.allclose(part.c_a @ d, stacked)


class TestPartitionConsistency:
    def test_stiffness_split(self):
        for model in small_models():
            spec = default_additional_set(model)
            part = make_partition(model, spec)
            k = assemble_global(model).toarray()
            k_b = (part.c_b.T @ part.k_lb @ part.c_b).toarray()
            if part.q:
                k_a = (part.c_a.T @ part.k_la @ part.c_a).toarray()
            else:
                k_a = np.zeros_like(k)
            assert rel_err(k_b + k_a, k) < 1e-12

    def test_influence_matrix_definition(self):
        model = build_truss_grid(3, 2)
        part = make_partition(model, default_additional_set(model))
        c_b = part.c_b.toarray()
        c_a = part.c_a.toarray()
        c_s_dense = c_a @ np.linalg.inv(c_b)
        assert rel_err(part.c_s, c_s_dense) < 1e-10

    def test_update_shares_topology(self):
        model = build_truss_grid(3, 2)
        part = make_partition(model, default_additional_set(model))
        graded = apply_floor_grading(model, 10000.0, 30000.0, "E")
        updated = update_partition(part, graded)
        assert updated.c_b_lu is part.c_b_lu
        assert updated.cs_t is part.cs_t
        k = assemble_global(graded).toarray()
        k_split = (updated.c_b.T @ updated.k_lb @ updated.c_b
                   + updated.c_a.T @ updated.k_la @ updated.c_a).toarray()
        assert rel_err(k_split, k) < 1e-12


class TestReducedOperators:
    def test_rhs_zero_load(self):
        model = build_truss_grid(3, 2)
        part = make_partition(model, default_additional_set(model))
        b, b_s = reduced_rhs(part, np.zeros(model.n))
        assert np.all(b == 0.0) and np.all(b_s == 0.0)

    def test_rhs_empty_partition(self):
        model = build_truss_grid(1, 1)
        part = make_partition(model, PartitionSpec.of([]))
        b, _ = reduced_rhs(part, model.load_vector())
        assert b.shape == (0,)

    def test_rhs_matches_dense_oracle(self):
        model = build_truss_grid(3, 1)
        part = make_partition(model, default_additional_set(model))
        r = model.load_vector()
        c_b_inv = np.linalg.inv(part.c_b.toarray())
        c_s = part.c_a.toarray() @ c_b_inv
        k_lb_inv = np.linalg.inv(part.k_lb.toarray())
        b_oracle = c_s @ k_lb_inv @ c_b_inv.T @ r
        b, _ = reduced_rhs(part, r)
        assert rel_err(b, b_oracle) < 1e-12

    def test_apply_zero(self):
        model = build_truss_grid(3, 2)
        part = make_partition(model, default_additional_set(model))
        assert np.all(reduced_apply(part, np.zeros(part.q)) == 0.0)

    def test_apply_symmetric_positive_definite(self):
        rng = np.random.default_rng(11)
        for model in (build_truss_grid(3, 2), build_frame_grid(2, 2, n_sb=2)):
            part = make_partition(model, default_additional_set(model))
            for _ in range(10):
                x = rng.standard_normal(part.q)
                y = rng.standard_normal(part.q)
                ax = reduced_apply(part, x)
                ay = reduced_apply(part, y)
                scale = np.linalg.norm(ax) * np.linalg.norm(y) + 1e-30
                assert abs(ax @ y - x @ ay) / scale < 1e-12
                assert x @ ax > 0.0

    def test_gram_matches_apply(self):
        model = build_frame_grid(2, 1, n_sb=2)
        part = make_partition(model, default_additional_set(model))
        g = reduced_gram(part, chunk=3)
        k_la_inv = part.k_la_inv.toarray()
        rng = np.random.default_rng(5)
        x = rng.standard_normal(part.q)
        assert rel_err((g + k_la_inv) @ x, reduced_apply(part, x)) < 1e-12

    def test_deformation_force_identity_on_small_models(self):
        # additional-component forces from the dense reduced system equal
        # K_La u_a with u_a taken from the conventional solution
        for model in small_models():
            spec = default_additional_set(model)
            part = make_partition(model, spec)
            if part.q == 0 or model.n > 60:
                continue
            r = model.load_vector()
            d = factorize_stiffness(model).solve(r)
            u_a = part.c_a @ d
            f_a_expected = part.k_la @ u_a
            a_mat = reduced_gram(part) + part.k_la_inv.toarray()
            b, _ = reduced_rhs(part, r)
            f_a = np.linalg.solve(a_mat, b)
            assert rel_err(f_a, f_a_expected) < 1e-10
