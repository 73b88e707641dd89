"""Testes do modelo fluido ETTBICC/TTBICC."""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from core.exceptions import DomainError
from core.gateways.config_gateway import load_config
from core.services import scenario_service
from core.services.fluid_congestion import (
    FluidModel,
    FluidState,
    convergence_sweep,
    default_params,
    effective_capacity,
    ettbicc_rhs,
    find_equilibrium,
    fluid_field,
    kink_guard,
    random_positive_state,
    run_fluid,
    ttbicc_rhs,
)
from core.services.metrics_service import jain_index, report_from_trajectory
from core.services.ode_integrator import IntegratorConfig

ESTADO_INICIAL = FluidState(C=50.0, Q=50.0, W=(1.0, 2.0, 1.0, 3.0))


def _cenario_embutido(nome):
    return load_config(Path(settings.BICC_LAB["SCENARIO_DIR"]) / nome)


class DefaultParamsTestCase(SimpleTestCase):

    def test_cenario_de_referencia(self):
        params = default_params(50, 4)

        self.assertEqual(params.C_C, 50)
        self.assertEqual(params.C_W, 25)
        self.assertEqual(params.beta, 0.5)
        self.assertEqual(params.epsilon, 0.5)
        self.assertEqual(params.a, (1.0, 1.0, 1.0, 1.0))
        self.assertEqual(params.c, (1.0, 1.0, 1.0, 1.0))
        self.assertEqual((params.b, params.eta, params.alpha), (1.0, 1.0, 1.0))
        self.assertEqual(params.B_eff, 49)

    def test_b_100(self):
        params = default_params(100, 2)
        self.assertEqual((params.C_C, params.C_W, params.B_eff), (100, 50, 99))

    def test_capacidade_efetiva_para_b_inteiro(self):
        self.assertEqual(default_params(10, 2).B_eff, 9.0)
        self.assertEqual(effective_capacity(25), 24.0)
        self.assertEqual(effective_capacity(50.0), 49.0)

    def test_capacidade_efetiva_para_b_fracionario(self):
        self.assertAlmostEqual(effective_capacity(12.5), 12.25, places=12)
        self.assertAlmostEqual(effective_capacity(0.5), 0.49, places=12)

    def test_fluxo_unico_avisa_c_w(self):
        with self.assertLogs("core.services.fluid_congestion", level="WARNING"):
            params = default_params(50, 1)
        self.assertEqual(params.C_W, 25)

    def test_validacoes(self):
        params = default_params(50, 4)
        with self.assertRaises(DomainError):
            replace(params, a=(1.0, 1.0))
        with self.assertRaises(DomainError):
            replace(params, B_eff=51.0)
        with self.assertRaises(DomainError):
            default_params(0, 4)
        with self.assertRaises(DomainError):
            default_params(50, 0)


class EttbiccRhsTestCase(SimpleTestCase):

    def setUp(self):
        self.params = default_params(50, 4)

    def test_derivadas_no_estado_inicial(self):
        taxas = ettbicc_rhs(self.params, ESTADO_INICIAL)

        self.assertAlmostEqual(taxas.dC, -3.35703, delta=1e-4)
        self.assertAlmostEqual(taxas.dW[0], 0.46980, delta=1e-4)
        self.assertAlmostEqual(taxas.dQ, -18.6071, delta=1e-3)

    def test_origem(self):
        taxas = ettbicc_rhs(self.params, FluidState(C=0.0, Q=0.0, W=(0.0,) * 4))
        self.assertEqual((taxas.dC, taxas.dQ, taxas.dW), (0.0, 0.0, (0.0,) * 4))

    def test_eixos_invariantes(self):
        taxas = ettbicc_rhs(self.params, FluidState(C=0.0, Q=5.0, W=(0.0, 2.0, 1.0, 3.0)))
        self.assertEqual(taxas.dC, 0.0)
        self.assertEqual(taxas.dW[0], 0.0)

        taxas = ettbicc_rhs(self.params, FluidState(C=10.0, Q=0.0, W=(1.0, 2.0, 1.0, 3.0)))
        self.assertEqual(taxas.dQ, 0.0)

    def test_permutacao_das_janelas(self):
        original = ettbicc_rhs(self.params, ESTADO_INICIAL)
        permutado = ettbicc_rhs(
            self.params, FluidState(C=50.0, Q=50.0, W=(3.0, 1.0, 2.0, 1.0))
        )

        self.assertAlmostEqual(original.dC, permutado.dC, places=12)
        self.assertAlmostEqual(original.dQ, permutado.dQ, places=12)
        np.testing.assert_allclose(
            [original.dW[3], original.dW[0], original.dW[1], original.dW[2]],
            permutado.dW, rtol=0, atol=1e-12,
        )

    def test_estado_negativo(self):
        with self.assertRaises(DomainError):
            ettbicc_rhs(self.params, FluidState(C=-1.0, Q=0.0, W=(1.0,) * 4))
        with self.assertRaises(DomainError):
            run_fluid(
                self.params, FluidState(C=-1.0, Q=0.0, W=(1.0,) * 4),
                IntegratorConfig(dt=0.1, t_end=1.0),
            )

    def test_numero_de_janelas_incompativel(self):
        with self.assertRaises(DomainError):
            ettbicc_rhs(self.params, FluidState(C=1.0, Q=1.0, W=(1.0,)))

    def test_positividade_de_partidas_aleatorias(self):
        rng = np.random.default_rng(3)
        config = IntegratorConfig(dt=0.01, t_end=3.0)
        for _ in range(100):
            x = 50.0 * (1.0 - rng.random(6))
            trajetoria = run_fluid(self.params, FluidState.from_vector(x), config)
            self.assertTrue((trajetoria.states >= 0).all())


class TtbiccRhsTestCase(SimpleTestCase):

    def setUp(self):
        self.params = default_params(50, 4)

    def test_derivadas_no_estado_inicial(self):
        taxas = ttbicc_rhs(self.params, ESTADO_INICIAL)

        self.assertAlmostEqual(taxas.dC, -175.0, places=9)
        self.assertAlmostEqual(taxas.dQ, -2100.0, places=9)

    def test_origem(self):
        taxas = ttbicc_rhs(self.params, FluidState(C=0.0, Q=0.0, W=(0.0,) * 4))
        self.assertEqual((taxas.dC, taxas.dQ, taxas.dW), (0.0, 0.0, (0.0,) * 4))

    def test_campo_por_nome(self):
        campo = fluid_field(self.params, "ttbicc")
        dx = campo(ESTADO_INICIAL.as_vector(), 0.0)
        self.assertAlmostEqual(dx[0], -175.0, places=9)


class KinkGuardTestCase(SimpleTestCase):

    def test_perto_e_longe_da_quina(self):
        guarda = kink_guard(default_params(50, 4), dt=0.01)
        self.assertTrue(guarda([0.0, 40.0, 2.0, 2.0, 2.0, 3.2], 0.0))
        self.assertFalse(guarda([0.0, 12.75, 12.25, 12.25, 12.25, 12.25], 0.0))
        self.assertTrue(guarda(np.array([0.0, 40.0, 2.0, 2.0, 2.0, 3.2]), 0.0))


class EquilibriumTestCase(SimpleTestCase):
    """Ponto fixo do cenário de referência.

    Com C -> 0, dW = 0 e dQ = 0 dão ΣW = B_eff = 49, W* = 12.25 e
    Q* = 12.75; C decai com taxa 1 e as janelas com taxa 0.12 por RTT.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = default_params(50, 4)
        cls.resultado = find_equilibrium(
            cls.params, ESTADO_INICIAL, horizon=200.0, residual_tol=1e-6, dt=0.05
        )

    def test_valores_de_referencia(self):
        estado = self.resultado.state

        for w in estado.W:
            self.assertAlmostEqual(w, 12.25, delta=1e-3)
        self.assertAlmostEqual(estado.Q, 12.75, delta=1e-3)
        self.assertLess(estado.C, 1e-6)
        self.assertTrue(self.resultado.converged)

    def test_justica_e_utilizacao(self):
        janelas = np.array(self.resultado.state.W)

        self.assertGreaterEqual(jain_index(janelas), 0.999)
        self.assertLessEqual((janelas.max() - janelas.min()) / janelas.mean(), 0.01)
        self.assertGreaterEqual(janelas.sum() / 50, 0.95)
        self.assertLessEqual(janelas.sum() / 50, 1.0)

    def test_relatorio_da_trajetoria(self):
        relatorio = report_from_trajectory(self.resultado.trajectory, B=50)

        self.assertGreaterEqual(relatorio.jain, 0.999)
        self.assertAlmostEqual(relatorio.utilization, 0.98, delta=1e-3)
        self.assertIsNotNone(relatorio.convergence_time)
        self.assertEqual(relatorio.drops, 0)

    def test_partida_nao_positiva(self):
        with self.assertRaises(DomainError):
            find_equilibrium(
                self.params, FluidState(C=0.0, Q=50.0, W=(1.0,) * 4), 10.0, 1e-6
            )

    def test_nao_convergencia_nao_e_excecao(self):
        resultado = find_equilibrium(
            self.params, ESTADO_INICIAL, horizon=2.0, residual_tol=1e-6, dt=0.05
        )
        self.assertFalse(resultado.converged)
        self.assertGreater(resultado.residual, 1e-6)

    def test_deterministico(self):
        config = IntegratorConfig(dt=0.05, t_end=20.0)
        primeira = run_fluid(self.params, ESTADO_INICIAL, config, FluidModel.ETTBICC)
        segunda = run_fluid(self.params, ESTADO_INICIAL, config, FluidModel.ETTBICC)
        np.testing.assert_array_equal(primeira.states, segunda.states)


class EquilibriumExtensionTestCase(SimpleTestCase):

    def setUp(self):
        self.params = default_params(50, 4)

    def test_estende_em_trechos_ate_convergir(self):
        resultado = find_equilibrium(
            self.params, ESTADO_INICIAL, horizon=50.0, residual_tol=1e-6,
            dt=0.05, max_horizon=1000.0,
        )

        self.assertTrue(resultado.converged)
        self.assertGreater(resultado.elapsed, 50.0)
        self.assertLess(resultado.elapsed, 1000.0)
        trajetoria = resultado.trajectory
        self.assertEqual(len(trajetoria), round(resultado.elapsed / 0.05) + 1)
        self.assertTrue((np.diff(trajetoria.times) > 0).all())
        self.assertAlmostEqual(float(trajetoria.times[-1]), resultado.elapsed, places=6)
        np.testing.assert_array_equal(trajetoria.final_state, resultado.state.as_vector())

    def test_sem_extensao_por_padrao(self):
        resultado = find_equilibrium(
            self.params, ESTADO_INICIAL, horizon=2.0, residual_tol=1e-6, dt=0.05
        )
        self.assertEqual(resultado.elapsed, 2.0)

    def test_limite_menor_que_o_trecho(self):
        with self.assertRaises(DomainError):
            find_equilibrium(
                self.params, ESTADO_INICIAL, horizon=10.0, residual_tol=1e-6, max_horizon=5.0
            )

    def test_partidas_aleatorias_respeitam_o_piso(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            x = random_positive_state(self.params, rng).as_vector()
            self.assertTrue((x >= 1.0).all())
            self.assertTrue((x <= 50.0).all())


class ConvergenceSweepTestCase(SimpleTestCase):

    def test_convergencia_global(self):
        """Estados positivos sorteados chegam ao mesmo ponto fixo."""
        varredura = convergence_sweep(
            default_params(50, 4), n_starts=10, seed=2024,
            horizon=300.0, dt=0.05, residual_tol=1e-6, max_horizon=3000.0,
        )

        self.assertEqual(len(varredura.results), 10)
        self.assertTrue(varredura.all_converged)
        self.assertLess(float(varredura.spread.max()), 1e-3)
        np.testing.assert_allclose(varredura.fixed_point[2:], [12.25] * 4, atol=1e-3)

    def test_cenario_de_varredura_embutido(self):
        """O arquivo distribuído: 50 partidas, todas convergem, em menos de 30 s."""
        cfg = _cenario_embutido("ettbicc_varredura.cfg")

        inicio = time.perf_counter()
        execucao = scenario_service.run_fluid_scenario(cfg)
        decorrido = time.perf_counter() - inicio

        varredura = execucao.sweep
        self.assertEqual(len(varredura.results), 50)
        self.assertTrue(varredura.all_converged)
        self.assertLess(float(varredura.spread.max()), 1e-3)
        self.assertLess(decorrido, 30.0)
        self.assertEqual(execucao.echo["sweep_max_horizon"], 3000.0)

    def test_quantidade_invalida(self):
        with self.assertRaises(DomainError):
            convergence_sweep(default_params(50, 4), 0, 1, 10.0, 0.1, 1e-6)


class DesempenhoTestCase(SimpleTestCase):

    def test_cenario_de_quatro_fluxos_em_menos_de_um_segundo(self):
        cfg = _cenario_embutido("ettbicc_quatro_fluxos.cfg")

        inicio = time.perf_counter()
        execucao = scenario_service.run_fluid_scenario(cfg)
        decorrido = time.perf_counter() - inicio

        self.assertEqual(len(execucao.trajectory), 20001)
        self.assertLess(decorrido, 1.0)
