from typing import List

from src.core.experiment import ExperimentResults


def render_summary(results: ExperimentResults) -> List[str]:
    """Console lines for a finished run: stage summaries, then one line per verdict."""
    lines = [f"=== {results.command} ({results.threads} thread(s)) ==="]
    lines.extend(results.summary)
    if results.verdicts:
        passed = sum(report.passed for report in results.verdicts)
        lines.append(f"verdicts: {passed}/{len(results.verdicts)} passed")
        for report in results.verdicts:
            mark = "✅" if report.passed else "❌"
            lines.append(f"  {mark} {report.theorem_id.value}: C = {report.empirical_C:.6g}, "
                         f"band ratio = {report.rhs_series.band_ratio:.4g}")
    return lines
