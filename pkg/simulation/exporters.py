import csv
import io

from .harness import CostReport


class AbstractExporter:
    pass


class CostReportCSVExporter(AbstractExporter):
    """ One row per measured group size
    """

    def get_header_row(self):
        return CostReport.FIELDS

    def get_row(self, report):
        return report.as_row()

    def run(self, reports):
        """
        :type reports: list of CostReport
        :rtype: str
        """
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')

        writer.writerow(self.get_header_row())

        for report in reports:
            writer.writerow(self.get_row(report))

        return out.getvalue()


class SummaryTableExporter(AbstractExporter):
    """ Fixed-width table for humans, same columns as the CSV
    """

    def run(self, reports):
        header = CostReport.FIELDS
        rows = [[str(i) for i in r.as_row()] for r in reports]
        widths = [max([len(h)] + [len(row[i]) for row in rows])
                  for i, h in enumerate(header)]
        lines = [' '.join(h.rjust(w) for h, w in zip(header, widths))]
        for row in rows:
            lines.append(' '.join(c.rjust(w) for c, w in zip(row, widths)))
        return '\n'.join(lines) + '\n'
