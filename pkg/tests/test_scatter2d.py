import math

import mpmath
import numpy as np
import pytest
from pydantic import ValidationError

from symbreak.errors import (
    IllConditionedSystemError,
    SingularTranslationError,
    TruncationConvergenceError,
)
from symbreak.grading import CouplingTable, SymmetryGrading, coupling_strengths
from symbreak.measures import (
    build_continuous_transform,
    measure_continuous_closed,
    measure_direct,
    rotation_symmetry_order,
)
from symbreak.operator_core import (
    change_basis,
    conjugate,
    identity,
    relative_error,
    unitarity_residual,
)
from symbreak.scatter2d import (
    Disc,
    MirrorAxis,
    Scene,
    SimConfig,
    SimulatorSystem,
    assemble_scattering_operator,
    assemble_with_diagnostics,
    check_truncation_convergence,
    default_sim_config,
    foldy_lax_solve,
    graf_translation,
    local_orders,
    mirror_eigenbasis,
    mirror_operator,
    multipole_labels,
    rotated_mirror_operator,
    rotation_grading,
    single_disc_tmatrix,
)
from symbreak.scenes import c3_scene, centered_disc, stacked_scene
from tests.constants import C3_GRID_SAMPLES, C3_ZERO_ANGLES, SEED


def unit_probe(order: int, m: int) -> np.ndarray:
    probe = np.zeros(2 * order + 1, dtype=np.complex128)
    probe[order + m] = 1.0
    return probe


def table_of(scene: Scene) -> tuple[CouplingTable, float]:
    cfg = default_sim_config(scene)
    operator = assemble_scattering_operator(scene, cfg)
    grading = rotation_grading(cfg.global_order)
    table = coupling_strengths(operator, grading, grading)
    return table, table.total


class TestScene:
    def test_overlapping_discs_are_rejected(self) -> None:
        with pytest.raises(ValidationError):
            Scene(
                discs=(Disc(x=0, y=0, radius=1), Disc(x=1.5, y=0, radius=0.6)),
                wavenumber=1.0,
            )

    def test_needs_a_disc(self) -> None:
        with pytest.raises(ValidationError):
            Scene(discs=(), wavenumber=1.0)

    @pytest.mark.parametrize("wavenumber", [0.0, -1.0, math.inf])
    def test_wavenumber_must_be_positive(self, wavenumber: float) -> None:
        with pytest.raises(ValidationError):
            Scene(discs=(Disc(x=0, y=0, radius=1),), wavenumber=wavenumber)

    def test_radius_must_be_positive(self) -> None:
        with pytest.raises(ValidationError):
            Disc(x=0, y=0, radius=0)

    def test_circumscribing_radius(self) -> None:
        assert stacked_scene(1).circumscribing_radius == pytest.approx(1.65)

    def test_rotation_and_reflection(self) -> None:
        scene = Scene(discs=(Disc(x=2, y=0, radius=0.5),), wavenumber=1.0)
        rotated = scene.rotated(math.pi / 2).discs[0]
        assert (rotated.x, rotated.y) == pytest.approx((0.0, 2.0))
        assert scene.rotated(math.pi / 2).reflected().discs[0].y == pytest.approx(-2.0)
        assert scene.reflected("y").discs[0].x == -2


class TestTruncation:
    def test_default_orders(self) -> None:
        scene = stacked_scene(1)
        cfg = default_sim_config(scene)
        assert cfg.global_order == math.ceil(2 * math.pi * 1.65) + 10
        assert local_orders(scene, cfg) == (15, 10)

    def test_local_orders_are_capped(self) -> None:
        cfg = SimConfig(global_order=5)
        assert local_orders(stacked_scene(1), cfg) == (5, 5)

    def test_fixed_local_order(self) -> None:
        cfg = SimConfig(global_order=20, local_order=4)
        assert local_orders(c3_scene(), cfg) == (4, 4, 4, 4)

    def test_local_order_above_global_order(self) -> None:
        with pytest.raises(ValidationError):
            SimConfig(global_order=3, local_order=4)

    def test_multipole_labels(self) -> None:
        assert [label.gamma for label in multipole_labels(2)] == [-2, -1, 0, 1, 2]


class TestSingleDiscTMatrix:
    def test_channels_are_lossless(self) -> None:
        t = single_disc_tmatrix(1.0, 2 * math.pi, 30)
        assert np.max(np.abs(np.abs(1 + 2 * t) - 1)) <= 1e-12

    def test_symmetric_in_order(self) -> None:
        t = single_disc_tmatrix(0.3, 2 * math.pi, 12)
        assert np.array_equal(t, t[::-1])

    def test_monopole_against_oracle(self) -> None:
        t = single_disc_tmatrix(1.0, 1.0, 3)
        expected = complex(-mpmath.besselj(0, 1) / mpmath.hankel1(0, 1))
        assert t[3] == pytest.approx(expected, rel=1e-12)


class TestGrafTranslation:
    def test_zero_displacement_is_identity(self) -> None:
        translation = graf_translation(0j, 3.0, 6, 6)
        assert np.array_equal(translation.entries, np.eye(13))

    def test_translation_there_and_back(self) -> None:
        displacement = complex(0.5, 0.3)
        there = graf_translation(displacement, 1.0, 10, 40)
        back = graf_translation(-displacement, 1.0, 40, 10)
        composed = back.entries @ there.entries
        assert np.max(np.abs(composed - np.eye(21))) <= 1e-8

    def test_plane_wave(self) -> None:
        k, x0 = 2.0, 0.7
        plane_wave = 1j ** np.arange(-30, 31)
        translated = graf_translation(complex(x0, 0), k, 30, 10).entries @ plane_wave
        expected = np.exp(1j * k * x0) * 1j ** np.arange(-10, 11)
        assert np.max(np.abs(translated - expected)) <= 1e-10

    def test_reverse_translation_is_adjoint(self) -> None:
        displacement = complex(-0.4, 1.1)
        forward = graf_translation(displacement, 2.0, 8, 8).entries
        backward = graf_translation(-displacement, 2.0, 8, 8).entries
        assert np.allclose(backward, forward.conj().T, rtol=0, atol=1e-13)

    def test_outgoing_wave_at_its_origin(self) -> None:
        with pytest.raises(SingularTranslationError):
            graf_translation(0j, 1.0, 4, 4, "outgoing_to_regular")


class TestFoldyLax:
    def test_single_disc_at_origin(self) -> None:
        scene = centered_disc(radius=0.5, wavenumber=2.0)
        cfg = SimConfig(global_order=12)
        incoming = np.random.default_rng(SEED).standard_normal(25) + 0j
        solution = foldy_lax_solve(scene, cfg, incoming)
        (order,) = solution.local_orders
        t = single_disc_tmatrix(0.5, 2.0, order)
        expected = t * incoming[12 - order : 12 + order + 1]
        assert np.allclose(solution.coefficients[0], expected, rtol=1e-15, atol=0)

    def test_c3_coefficients_are_rotated_copies(self) -> None:
        scene = c3_scene()
        cfg = default_sim_config(scene)
        solution = foldy_lax_solve(scene, cfg, unit_probe(cfg.global_order, 0))
        first = solution.coefficients[1]
        order = solution.local_orders[1]
        m = np.arange(-order, order + 1)
        scale = np.max(np.abs(first))
        for disc, alpha in ((2, 2 * math.pi / 3), (3, 4 * math.pi / 3)):
            expected = np.exp(-1j * m * alpha) * first
            assert np.max(np.abs(solution.coefficients[disc] - expected)) <= 1e-12 * scale

    def test_far_discs_decouple(self) -> None:
        differences = []
        for separation in (10.0, 100.0):
            scene = Scene(
                discs=(
                    Disc(x=-separation / 2, y=0, radius=0.5),
                    Disc(x=separation / 2, y=0, radius=0.5),
                ),
                wavenumber=1.0,
            )
            cfg = default_sim_config(scene)
            incoming = unit_probe(cfg.global_order, 0)
            solution = foldy_lax_solve(scene, cfg, incoming)
            disc = scene.discs[0]
            order = solution.local_orders[0]
            alone = single_disc_tmatrix(0.5, 1.0, order) * (
                graf_translation(disc.center, 1.0, cfg.global_order, order).entries @ incoming
            )
            differences.append(relative_error(solution.coefficients[0], alone))
        assert differences[1] < differences[0]

    def test_ill_conditioned_system(self) -> None:
        with pytest.raises(IllConditionedSystemError) as error:
            foldy_lax_solve(
                stacked_scene(1),
                SimConfig(global_order=8),
                unit_probe(8, 0),
                condition_limit=1.0,
            )
        assert error.value.condition > 1.0


class TestAssembly:
    def test_centered_disc_is_diagonal(self) -> None:
        scene = centered_disc()
        cfg = default_sim_config(scene)
        operator = assemble_scattering_operator(scene, cfg)
        (order,) = local_orders(scene, cfg)
        padding = cfg.global_order - order
        t = np.pad(single_disc_tmatrix(1.0, 2 * math.pi, order), padding)
        assert np.allclose(operator.entries, np.diag(t), rtol=0, atol=1e-15)

    def test_off_center_disc_is_translated_centered_disc(self) -> None:
        center = complex(0.4, -0.3)
        scene = Scene(discs=(Disc(x=center.real, y=center.imag, radius=0.5),), wavenumber=3.0)
        cfg = default_sim_config(scene)
        operator = assemble_scattering_operator(scene, cfg)
        (order,) = local_orders(scene, cfg)
        t = np.diag(single_disc_tmatrix(0.5, 3.0, order))
        to_disc = graf_translation(center, 3.0, cfg.global_order, order).entries
        to_origin = graf_translation(
            -center,
            3.0,
            order,
            cfg.global_order,
            "outgoing_to_outgoing",
        ).entries
        assert relative_error(operator, to_origin @ t @ to_disc) <= 1e-8

    def test_full_operator_from_transition(self) -> None:
        scene = stacked_scene(1)
        cfg = default_sim_config(scene)
        transition = assemble_scattering_operator(scene, cfg)
        full = assemble_scattering_operator(
            scene,
            cfg.model_copy(update={"operator_mode": "full_s"}),
        )
        expected = identity(transition.row_labels).entries + 2 * transition.entries
        assert np.array_equal(full.entries, expected)

    def test_independent_of_workers(self) -> None:
        scene = c3_scene()
        cfg = default_sim_config(scene)
        serial = assemble_scattering_operator(scene, cfg)
        parallel = assemble_scattering_operator(scene, cfg, workers=4)
        assert serial == parallel

    def test_diagnostics(self) -> None:
        scene = stacked_scene(1)
        assembly = assemble_with_diagnostics(scene, default_sim_config(scene))
        assert assembly.local_orders == (15, 10)
        assert 1 <= assembly.condition_estimate < 1e12

    def test_simulator_columns_match_operator(self) -> None:
        scene = stacked_scene(1)
        cfg = default_sim_config(scene)
        operator = assemble_scattering_operator(scene, cfg)
        system = SimulatorSystem(scene, cfg)
        column = system.evaluate(unit_probe(cfg.global_order, 3))
        assert np.array_equal(column, operator.entries[:, cfg.global_order + 3])

    @pytest.mark.slow
    def test_full_operator_is_unitary(self) -> None:
        scene = stacked_scene(1)
        cfg = default_sim_config(scene, "full_s")
        assert unitarity_residual(assemble_scattering_operator(scene, cfg)) <= 1e-6


class TestMirror:
    @pytest.mark.parametrize("axis", ["x", "y"])
    def test_mirror_is_an_involution(self, axis: MirrorAxis) -> None:
        mirror = mirror_operator(5, axis)
        assert np.array_equal(mirror.entries @ mirror.entries, np.eye(11))

    def test_mirror_reverses_rotations(self) -> None:
        grading = rotation_grading(4)
        mirror = mirror_operator(4)
        rotated = conjugate(build_continuous_transform(grading, 0.9), mirror)
        expected = build_continuous_transform(grading, -0.9)
        assert np.allclose(rotated.entries, expected.entries, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("axis", ["x", "y"])
    def test_eigenbasis(self, axis: MirrorAxis) -> None:
        basis = mirror_eigenbasis(6, axis)
        mirror = mirror_operator(6, axis)
        assert unitarity_residual(basis) <= 1e-28
        diagonal = change_basis(mirror, basis, basis)
        gammas = [label.gamma for label in basis.col_labels]
        assert np.allclose(diagonal.entries, np.diag(gammas), rtol=0, atol=1e-15)
        assert SymmetryGrading.from_labels(basis.col_labels, "discrete").eigenvalues.count(1) == 7

    def test_rotated_mirror_at_zero_angle(self) -> None:
        assert rotated_mirror_operator(3, 0.0) == mirror_operator(3)


@pytest.mark.slow
class TestCovariance:
    def test_rotated_scene(self) -> None:
        scene = stacked_scene(1)
        cfg = default_sim_config(scene)
        operator = assemble_scattering_operator(scene, cfg)
        rotated = assemble_scattering_operator(scene.rotated(0.7), cfg)
        transform = build_continuous_transform(rotation_grading(cfg.global_order), 0.7)
        assert relative_error(rotated, conjugate(operator, transform)) <= 1e-8

    @pytest.mark.parametrize("axis", ["x", "y"])
    def test_reflected_scene(self, axis: MirrorAxis) -> None:
        scene = stacked_scene(1).rotated(0.4)
        cfg = default_sim_config(scene)
        operator = assemble_scattering_operator(scene, cfg)
        reflected = assemble_scattering_operator(scene.reflected(axis), cfg)
        mirror = mirror_operator(cfg.global_order, axis)
        assert relative_error(reflected, conjugate(operator, mirror)) <= 1e-8

    def test_mirror_equals_half_turn_for_stacked_scene(self) -> None:
        for n_small in (1, 3):
            scene = stacked_scene(n_small)
            cfg = default_sim_config(scene)
            operator = assemble_scattering_operator(scene, cfg)
            grading = rotation_grading(cfg.global_order)
            half_turn = measure_continuous_closed(
                coupling_strengths(operator, grading, grading),
                math.pi,
            )
            mirror = measure_direct(operator, mirror_operator(cfg.global_order))
            assert mirror == pytest.approx(half_turn, abs=1e-10)


@pytest.mark.slow
class TestSceneStructure:
    def test_centered_disc_is_rotation_invariant(self) -> None:
        table, _ = table_of(centered_disc())
        for theta in np.linspace(-math.pi, math.pi, 37):
            assert measure_continuous_closed(table, theta) <= 1e-12

    def test_c3_selection_rule_and_zeros(self) -> None:
        table, total = table_of(c3_scene())
        gammas = np.array([g.real for g in table.incoming_gammas])
        differences = np.subtract.outer(gammas, gammas).astype(int)
        assert np.all(table.x[differences % 3 != 0] <= 1e-12 * total)
        for theta in C3_ZERO_ANGLES:
            assert measure_continuous_closed(table, theta) <= 1e-10
        assert rotation_symmetry_order(table) == 3

    def test_more_discs_break_symmetry_more(self) -> None:
        one, _ = table_of(stacked_scene(1))
        three, _ = table_of(stacked_scene(3))
        for theta in np.linspace(-math.pi, math.pi, C3_GRID_SAMPLES):
            assert measure_continuous_closed(three, theta) >= measure_continuous_closed(
                one,
                theta,
            )


@pytest.mark.slow
class TestTruncationConvergence:
    def test_default_orders_converge(self) -> None:
        scene = stacked_scene(1)
        thetas = np.linspace(-math.pi, math.pi, 13).tolist()
        change = check_truncation_convergence(scene, default_sim_config(scene), thetas)
        assert change <= 1e-6

    def test_coarse_orders_are_reported(self) -> None:
        scene = stacked_scene(1)
        with pytest.raises(TruncationConvergenceError) as error:
            check_truncation_convergence(scene, SimConfig(global_order=3), [0.5, 1.0, 2.0])
        assert error.value.change > 1e-6

    def test_generator_is_rejected(self) -> None:
        scene = centered_disc()
        with pytest.raises(ValueError, match="rotation or the mirror"):
            check_truncation_convergence(
                scene,
                default_sim_config(scene),
                [0.1],
                symmetry="generator",
            )
