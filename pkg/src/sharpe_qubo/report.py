"""Summary tables over solved portfolios, next to the classical baseline."""

import csv
import io
import math

from .calibration import summarize
from .formulations import sharpe_ratio
from .solvers.classical import classical_max_sharpe

COLUMNS = [
    "kind", "solver", "n", "n_total", "sharpe_min", "sharpe_max", "sharpe_mean",
    "sharpe_median", "assets_min", "assets_max", "assets_mean", "classical_sharpe",
]


class InconsistentUniverseError(ValueError):
    pass


def flatten_solution_docs(docs):
    """Yield ``(kind, solver, assets, solution_dict)`` from solution or
    statistics documents."""
    for doc in docs:
        if "solutions" in doc:
            for sol in doc["solutions"]:
                yield doc.get("kind"), doc.get("solver"), tuple(doc.get("assets", ())), sol
        else:
            yield doc.get("kind"), doc.get("solver"), tuple(doc.get("assets", ())), doc


def build_report(docs, stats=None):
    """One row per (kind, solver) group plus a ``classical`` row when
    ``stats`` is given. Sharpe and asset-count columns use feasible
    solutions only."""
    entries = list(flatten_solution_docs(docs))
    if not entries:
        raise ValueError("no solutions to report")
    universes = {assets for _, _, assets, _ in entries}
    if stats is not None:
        universes.add(tuple(stats.assets))
    if len(universes) > 1:
        raise InconsistentUniverseError("solutions refer to different asset universes")

    baseline = w = None
    if stats is not None:
        w = classical_max_sharpe(stats)
        baseline = sharpe_ratio(w, stats)

    groups = {}
    for kind, solver, _, sol in entries:
        groups.setdefault((kind, solver), []).append(sol)

    rows = []
    for (kind, solver), sols in groups.items():
        feasible = [s for s in sols if s.get("feasible") and s.get("sharpe") is not None]
        counts = [sum(1 for w in s["weights"] if w > 0) for s in feasible]
        summary = summarize([s["sharpe"] for s in feasible], counts)
        rows.append(
            {
                **{c: None for c in COLUMNS},
                "kind": kind,
                "solver": solver,
                "n_total": len(sols),
                **summary,
                "classical_sharpe": baseline,
            }
        )
    if baseline is not None:
        rows.append(
            {
                **{c: None for c in COLUMNS},
                "kind": "classical",
                "solver": "pgd",
                "n": 1,
                "n_total": 1,
                "sharpe_min": baseline,
                "sharpe_max": baseline,
                "sharpe_mean": baseline,
                "sharpe_median": baseline,
                "assets_min": int(sum(w > 0)),
                "assets_max": int(sum(w > 0)),
                "assets_mean": float(sum(w > 0)),
                "classical_sharpe": baseline,
            }
        )
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: "" if row.get(c) is None else row[c] for c in COLUMNS})
    return buf.getvalue()


def format_table(rows):
    def cell(value):
        if value is None:
            return "-"
        if isinstance(value, float) and not math.isnan(value):
            return f"{value:.4f}"
        return str(value)

    table = [COLUMNS] + [[cell(r.get(c)) for c in COLUMNS] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(COLUMNS))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in table)
