from django.test import SimpleTestCase

from agreement.codec import broadcast_size, parse_message
from agreement.crypto import make_cryptography_suite
from agreement.field import FieldParams
from agreement.protocol import HASHED_ABSCISSA
from simulation.harness import (
    BROADCAST, JOIN, LEAVE, NO_BROADCAST, AdversaryScript,
    CorruptLeaderOmit, Deliver, Drop, Duplicate, HarnessError, InjectForged,
    NextSession, ReplayBroadcast, RevealKey, ScriptInvalid, Simulation,
    TamperBit, TestCompare,
    measure_costs, run_honest_session, run_membership_scenario, run_script)

P61 = FieldParams(2 ** 61 - 1)
P97 = FieldParams(97)


class TestHonestSession(SimpleTestCase):
    def test_every_group_size(self):
        for n in range(1, 17):
            keys, transcript = run_honest_session(n, P61, seed=n)
            self.assertEqual(len(keys), n + 1)
            self.assertEqual(len(set(keys.values())), 1)
            self.assertEqual(len(transcript.unicasts()), n)
            self.assertEqual(len(transcript.broadcasts()), 1)
            self.assertEqual(transcript.rounds, [1, 2])

    def test_two_round_shape(self):
        _, transcript = run_honest_session(8, P61, seed=1)
        self.assertEqual([e.receiver for e in transcript.events],
                         [9] * 8 + [BROADCAST])
        self.assertEqual([e.round for e in transcript.events], [1] * 8 + [2])
        for event in transcript.events:
            self.assertEqual(event.size, len(event.octets))

    def test_deterministic(self):
        first = run_honest_session(4, P61, seed=12)
        second = run_honest_session(4, P61, seed=12)
        self.assertEqual(first, second)
        self.assertNotEqual(first[0], run_honest_session(4, P61, seed=13)[0])

    def test_hashed_abscissa(self):
        keys, _ = run_honest_session(5, P61, 3, abscissa_mode=HASHED_ABSCISSA)
        self.assertEqual(len(set(keys.values())), 1)

    def test_hashed_abscissa_small_field(self):
        collisions = 0
        for seed in range(50):
            simulation = Simulation(8, P97, seed, HASHED_ABSCISSA)
            simulation.run_session()
            outcomes = simulation.outcomes()
            self.assertEqual(outcomes.rejected(), [], msg=seed)
            self.assertTrue(outcomes.keys_agree())
            collisions += outcomes.rejections_for(9).count('AbscissaCollision')
        self.assertGreater(collisions, 0)

    def test_cryptography_suite(self):
        keys, transcript = run_honest_session(
            3, P61, 4, suite_factory=make_cryptography_suite)
        self.assertEqual(len(set(keys.values())), 1)
        self.assertEqual(
            transcript, run_honest_session(
                3, P61, 4, suite_factory=make_cryptography_suite)[1])

    def test_contributions_used(self):
        _, transcript = run_honest_session(4, P61, seed=2)
        broadcast = parse_message(transcript.broadcasts()[0].octets, P61)
        self.assertEqual(len(broadcast.shares), 4)

    def test_invalid_group(self):
        with self.assertRaises(HarnessError):
            run_honest_session(0, P61, 1)


class TestScripts(SimpleTestCase):
    def test_empty_script_is_honest(self):
        outcomes, transcript = run_script([], 3, P61, 5)
        keys, honest = run_honest_session(3, P61, 5)
        self.assertEqual(transcript, honest)
        self.assertEqual({i: o.key for i, o in outcomes.parties.items()}, keys)

    def test_replay_in_later_session(self):
        outcomes, transcript = run_script(
            [NextSession(), Duplicate(party=1)], 3, P61, 1)
        self.assertEqual(outcomes.rejections_for(4), ['ReplayDetected'])
        self.assertEqual(len(outcomes.accepted()), 4)
        self.assertEqual(len(outcomes.session_keys), 2)
        self.assertTrue(outcomes.keys_agree())

    def test_replays_are_rejected(self):
        for seed in range(100):
            outcomes, _ = run_script([Duplicate()], 2, P61, seed)
            self.assertEqual(outcomes.rejections_for(3), ['ReplayDetected'])
            self.assertEqual(outcomes.rejected(), [])

    def test_omission(self):
        for seed in range(100):
            outcomes, _ = run_script([CorruptLeaderOmit(2)], 3, P61, seed)
            self.assertEqual(outcomes.reasons(), {2: 'ContributionNotUsed'})
            self.assertEqual(outcomes.accepted(), [4, 1, 3])
            self.assertTrue(outcomes.keys_agree())

    def test_forged_broadcast(self):
        outcomes, _ = run_script(
            [Deliver(), Deliver(), Deliver(), InjectForged()], 3, P61, 1)
        self.assertEqual(
            outcomes.reasons(),
            {1: 'SignatureInvalid', 2: 'SignatureInvalid',
             3: 'SignatureInvalid'})

    def test_forged_contribution(self):
        outcomes, _ = run_script([InjectForged()], 2, P61, 1)
        self.assertEqual(outcomes.rejections_for(3), ['SignatureInvalid'])
        self.assertEqual(outcomes[3].reason, 'MissingContributions')
        self.assertEqual(outcomes[1].reason, NO_BROADCAST)

    def test_drop(self):
        outcomes, transcript = run_script([Drop()], 2, P61, 1)
        self.assertEqual(outcomes[3].reason, 'MissingContributions')
        self.assertEqual(outcomes.accepted(), [])
        self.assertEqual(len(transcript.unicasts()), 1)
        self.assertEqual(transcript.broadcasts(), [])

    def test_tamper(self):
        outcomes, _ = run_script(
            [Deliver(), Deliver(), TamperBit(200)], 2, P61, 1)
        self.assertEqual(outcomes.accepted(), [3])

    def test_reveal_and_test(self):
        script = AdversaryScript(
            [Deliver()] * 4 + [RevealKey(1), TestCompare(1), TestCompare(2)])
        outcomes, _ = run_script(script, 3, P61, 1)
        self.assertEqual(outcomes.revealed, [(1, outcomes[1].key)])
        self.assertEqual([t.distinct for t in outcomes.tests], [True, True])

    def test_invalid_scripts(self):
        invalid = [
            [Duplicate(party=1)],
            [RevealKey(42)],
            [CorruptLeaderOmit(4)],
            [TamperBit(10 ** 6)],
            [Deliver()] * 5,
            [ReplayBroadcast()],
        ]
        for actions in invalid:
            with self.assertRaises(ScriptInvalid, msg=repr(actions)):
                run_script(actions, 3, P61, 1)
        with self.assertRaises(ScriptInvalid):
            AdversaryScript(['deliver'])
        with self.assertRaises(ScriptInvalid):
            run_script([InjectForged()], 2, P61, 1,
                       suite_factory=make_cryptography_suite)

    def test_deterministic(self):
        script = [Deliver(), Duplicate(), TamperBit(9), NextSession(),
                  CorruptLeaderOmit(1)]
        self.assertEqual(run_script(script, 3, P61, 8),
                         run_script(script, 3, P61, 8))

    def test_counters_monotone(self):
        simulation = Simulation(2, P61, 3)
        seen = []
        for _ in range(3):
            simulation.run_session()
            seen.append([c.value for _, c in sorted(
                simulation.leader.last_counters.items())])
        self.assertEqual(seen, [[1, 1], [2, 2], [3, 3]])
        self.assertEqual(len(simulation.outcomes().session_keys), 3)
        self.assertTrue(simulation.outcomes().keys_agree())


class TestMembership(SimpleTestCase):
    def test_join(self):
        result, transcript = run_membership_scenario(JOIN, 2, P61, 1)
        self.assertEqual(result.party, 4)
        self.assertEqual(sorted(result.after), [1, 2, 3, 4])
        self.assertEqual(len(set(result.after.values())), 1)
        self.assertNotIn(result.after[1], result.before.values())
        broadcast = parse_message(transcript.broadcasts()[-1].octets, P61)
        self.assertEqual(len(broadcast.shares), 3)

    def test_leave(self):
        result, transcript = run_membership_scenario(LEAVE, 3, P61, 1)
        self.assertEqual(sorted(result.after), [1, 2, 4])
        self.assertEqual(len(set(result.after.values())), 1)
        self.assertNotIn(result.after[1], result.before.values())
        self.assertEqual(result.outcomes[3].reason, 'ShareMissing')
        broadcast = parse_message(transcript.broadcasts()[-1].octets, P61)
        self.assertEqual([i.value for i in broadcast.roster], [1, 2])

    def test_fresh_keys(self):
        for kind, n in ((JOIN, 2), (LEAVE, 3)):
            for seed in range(100):
                result, _ = run_membership_scenario(kind, n, P61, seed)
                after = set(result.after.values())
                self.assertEqual(len(after), 1)
                self.assertFalse(after & set(result.before.values()))

    def test_stale_broadcast_after_leave(self):
        result, _ = run_membership_scenario(
            LEAVE, 3, P61, 1, script=[ReplayBroadcast()])
        self.assertEqual(result.final, result.after)
        self.assertEqual(result.outcomes.rejections_for(1), ['ReplayDetected'])
        self.assertEqual(result.outcomes[3].reason, 'ShareMissing')

    def test_stale_broadcast_after_join(self):
        result, _ = run_membership_scenario(
            JOIN, 2, P61, 1, script=[ReplayBroadcast()])
        for label in (1, 2, 3):
            self.assertEqual(result.final[label], result.after[label])
        self.assertEqual(result.outcomes.rejections_for(2), ['ReplayDetected'])
        self.assertFalse(
            set(result.final.values()) & set(result.before.values()))

    def test_join_small_field(self):
        for seed in range(30):
            result, _ = run_membership_scenario(
                JOIN, 8, P97, seed, abscissa_mode=HASHED_ABSCISSA)
            self.assertEqual(len(result.after), 10, msg=seed)
            self.assertEqual(len(set(result.after.values())), 1)

    def test_invalid(self):
        with self.assertRaises(HarnessError):
            run_membership_scenario(LEAVE, 1, P61, 1)
        with self.assertRaises(HarnessError):
            run_membership_scenario('merge', 3, P61, 1)


class TestCosts(SimpleTestCase):
    def test_reports(self):
        reports = measure_costs([2, 4, 8, 16], P61)
        leader_octets = [r.leader_octets for r in reports]
        self.assertEqual(leader_octets, sorted(set(leader_octets)))
        self.assertEqual(len({r.user_octets for r in reports}), 1)
        self.assertEqual({r.rounds for r in reports}, {2})

        for report in reports:
            n = report.n
            self.assertEqual(report.p_bits, 61)
            self.assertEqual(report.leader_octets, broadcast_size(n, 8, 32))
            self.assertEqual(report.user_mults, n)
            self.assertEqual(report.user_xor_octets, (n + 1) * 8)

    def test_share_payload(self):
        report = measure_costs([4], P61)[0]
        overhead = broadcast_size(4, 8, 32) - 4 * 5 * 8
        self.assertEqual(report.leader_octets - overhead, 160)

    def test_aggregates_match_transcript(self):
        _, transcript = run_honest_session(4, P61, 1)
        report = measure_costs([4], P61, seed=1)[0]
        self.assertEqual(
            report.total_octets, sum(e.size for e in transcript.events))
        self.assertEqual(
            report.user_octets, transcript.octets_sent_by(1))

    def test_empty(self):
        with self.assertRaises(HarnessError):
            measure_costs([], P61)

    def test_small_field(self):
        self.assertEqual(
            measure_costs([3], P97)[0].leader_octets, broadcast_size(3, 1, 32))
