from django.test import SimpleTestCase

from agreement.field import FieldParams
from simulation.exporters import CostReportCSVExporter, SummaryTableExporter
from simulation.harness import CostReport, measure_costs


class TestCostReportCSVExporter(SimpleTestCase):
    def test_header(self):
        self.assertEqual(
            CostReportCSVExporter().get_header_row(),
            ('n', 'p_bits', 'leader_octets', 'user_octets', 'rounds',
             'user_mults', 'user_xor_octets', 'leader_mults'))

    def test_rows(self):
        reports = [CostReport(2, 61, 181, 141, 2, 2, 24, 30)]
        self.assertEqual(
            CostReportCSVExporter().run(reports),
            'n,p_bits,leader_octets,user_octets,rounds,user_mults,'
            'user_xor_octets,leader_mults\n'
            '2,61,181,141,2,2,24,30\n')

    def test_measured(self):
        reports = measure_costs([1, 2], FieldParams(97))
        lines = CostReportCSVExporter().run(reports).splitlines()
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith('1,7,'))


class TestSummaryTableExporter(SimpleTestCase):
    def test_aligned(self):
        reports = [CostReport(2, 61, 181, 141, 2, 2, 24, 30),
                   CostReport(16, 61, 2537, 141, 2, 16, 136, 900)]
        lines = SummaryTableExporter().run(reports).splitlines()
        self.assertEqual(len(lines), 3)
        self.assertEqual(len({len(i) for i in lines}), 1)
        self.assertTrue(lines[0].strip().startswith('n'))
