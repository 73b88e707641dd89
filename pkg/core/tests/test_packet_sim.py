"""Testes do simulador de eventos discretos."""

import time
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigError, SimulationError
from core.services.metrics_service import report_from_trace, utilization
from core.services.packet_sim import (
    EventKind,
    ScenarioConfig,
    build_dumbbell,
    run,
)


def _cenario(**mudancas):
    base = dict(
        k=4, B=50.0, access_bw=100.0, rtt=1.0, queue_capacity=10, duration=200.0,
        initial_W=(1.0, 2.0, 1.0, 3.0), initial_C=50.0, initial_Q=50.0,
    )
    base.update(mudancas)
    return ScenarioConfig(**base)


class BuildDumbbellTestCase(SimpleTestCase):

    def test_cenario_de_referencia(self):
        sim = build_dumbbell(_cenario())

        self.assertEqual(len(sim.senders), 4)
        self.assertEqual([s.W for s in sim.senders], [1.0, 2.0, 1.0, 3.0])
        self.assertEqual((sim.router.C, sim.router.Q), (50.0, 50.0))
        self.assertEqual(sim.router.params.B_eff, 49.0)
        # Créditos iniciais i/k: a primeira rodada emite 1 + 2 + 1 + 3 pacotes.
        envios = [ev for _, ev in sim._eventos if ev.kind is EventKind.PACKET_SEND]
        self.assertEqual(len(envios), 7)
        self.assertEqual((sim.sent, sim.in_flight), (0, 0))

    def test_primeira_epoca_em_um_rtt(self):
        sim = build_dumbbell(_cenario())
        epocas = [ev for _, ev in sim._eventos if ev.kind is EventKind.EPOCH_TICK]
        self.assertEqual([ev.t for ev in epocas], [Fraction(1)])

    def test_epoca_do_roteador_depois_da_ultima_chegada_da_rodada(self):
        sim = build_dumbbell(_cenario())
        epocas = [ev.t for _, ev in sim._eventos if ev.kind is EventKind.ROUTER_EPOCH]
        chegadas = [
            ev.t + Fraction(1, 100) + Fraction(1, 4)
            for _, ev in sim._eventos if ev.kind is EventKind.PACKET_SEND
        ]

        self.assertEqual(epocas, [1 + Fraction(1, 4) + Fraction(1, 200)])
        self.assertLess(max(chegadas), epocas[0])
        self.assertGreater(min(chegadas), epocas[0] - 1)

    def test_fluxo_unico(self):
        sim = build_dumbbell(_cenario(k=1, initial_W=(1.0,)))
        self.assertEqual(len(sim.senders), 1)

    def test_acesso_mais_lento_que_gargalo(self):
        with self.assertRaises(ConfigError) as ctx:
            build_dumbbell(_cenario(access_bw=40.0))
        self.assertIn("access_bw", ctx.exception.chaves)

    def test_lista_todos_os_campos_invalidos(self):
        with self.assertRaises(ConfigError) as ctx:
            build_dumbbell(_cenario(queue_capacity=0, initial_W=(1.0, 2.0), initial_C=-1.0))
        self.assertEqual(
            set(ctx.exception.chaves), {"queue_capacity", "initial_W", "initial_C"}
        )


class RunTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cenario = _cenario()
        cls.sim = build_dumbbell(cls.cenario)
        inicio = time.perf_counter()
        cls.trace = run(cls.sim, cls.cenario.duration)
        cls.decorrido = time.perf_counter() - inicio
        cls.relatorio = report_from_trace(cls.trace, B=50.0)

    def test_uma_amostra_por_rtt(self):
        self.assertEqual(len(self.trace), 201)
        self.assertEqual(self.trace.t[0], 0.0)
        self.assertEqual(self.trace.t[-1], 200.0)

    def test_conservacao_de_pacotes(self):
        entregues = np.cumsum(self.trace.delivered)
        for i in range(len(self.trace)):
            self.assertGreaterEqual(self.trace.in_flight[i], 0)
            self.assertEqual(
                self.trace.sent[i],
                entregues[i] + self.trace.drops[i] + self.trace.in_flight[i],
            )
        self.assertGreater(self.trace.sent[-1], 0)
        self.assertGreater(max(self.trace.in_flight), 0)

    def test_em_transito_bate_com_a_rede(self):
        """O contador coincide com chegadas pendentes + fila + pacote em serviço."""
        pendentes = sum(
            1 for _, ev in self.sim._eventos if ev.kind is EventKind.PACKET_ARRIVAL
        )
        self.assertEqual(
            self.sim.in_flight,
            pendentes + self.sim.queue_len + int(self.sim._enlace_ocupado),
        )
        self.assertEqual(
            self.sim.sent, self.sim.delivered + self.sim.drops + self.sim.in_flight
        )

    def test_sem_descartes(self):
        self.assertEqual(self.trace.drops[-1], 0)
        self.assertEqual(self.relatorio.drops, 0)

    def test_fila_curta(self):
        self.assertLessEqual(self.relatorio.queue_max, 3)
        self.assertLessEqual(self.relatorio.queue_mean_steady, 0.5)

    def test_utilizacao_nos_ultimos_50_rtt(self):
        self.assertGreaterEqual(utilization(self.trace, 50.0, (150.0, 200.0)), 0.90)

    def test_janelas_perto_do_equilibrio_fluido(self):
        for w in self.trace.windows[-1]:
            self.assertAlmostEqual(w, 12.25, delta=0.1 * 12.25)

    def test_duracao_da_simulacao(self):
        self.assertLess(self.decorrido, 5.0)

    def test_causalidade_do_enlace(self):
        self.assertLessEqual(max(self.trace.delivered), 50)
        self.assertLessEqual(max(self.trace.queue), self.cenario.queue_capacity)

    def test_janelas_respeitam_o_piso(self):
        self.assertTrue((self.trace.window_matrix() >= 1.0).all())

    def test_descartes_cumulativos_nao_decrescem(self):
        self.assertTrue(all(a <= b for a, b in zip(self.trace.drops, self.trace.drops[1:])))

    def test_deterministico(self):
        repeticao = run(build_dumbbell(self.cenario), self.cenario.duration)
        self.assertEqual(repeticao.rows(), self.trace.rows())
        self.assertEqual(repeticao.sent, self.trace.sent)

    def test_cabecalho_do_traco(self):
        self.assertEqual(
            self.trace.header,
            ["t", "W1", "W2", "W3", "W4", "C", "Q", "queue", "delivered", "drops"],
        )


class ShortRunTestCase(SimpleTestCase):

    def test_um_rtt_gera_duas_linhas(self):
        cenario = _cenario(duration=1.0)
        trace = run(build_dumbbell(cenario), 1.0)

        self.assertEqual(len(trace), 2)
        self.assertEqual(trace.t, [0.0, 1.0])
        self.assertEqual(trace.windows[0], (1.0, 2.0, 1.0, 3.0))
        # O roteador só fecha a rodada 0 em 1 + 1/4 + tx/2.
        self.assertEqual(trace.router_C[1], 50.0)

    def test_primeira_epoca_do_roteador(self):
        trace = run(build_dumbbell(_cenario(duration=2.0)), 2.0)

        self.assertEqual(len(trace), 3)
        self.assertNotEqual(trace.router_C[2], 50.0)

    def test_fluxo_unico_entrega_no_maximo_b(self):
        cenario = _cenario(k=1, initial_W=(1.0,), duration=60.0)
        trace = run(build_dumbbell(cenario), 60.0)

        self.assertEqual(len(trace), 61)
        self.assertLessEqual(max(trace.delivered), 50)
        self.assertGreater(trace.windows[-1][0], 1.0)

    def test_duracao_invalida(self):
        with self.assertRaises(ConfigError):
            run(build_dumbbell(_cenario()), 0.0)

    def test_evento_fora_de_ordem(self):
        sim = build_dumbbell(_cenario(duration=2.0))
        sim._relogio = Fraction(5, 10)
        sim.schedule(Fraction(1, 10), EventKind.SAMPLE_TICK)
        with self.assertRaises(SimulationError):
            sim.run(2.0)
