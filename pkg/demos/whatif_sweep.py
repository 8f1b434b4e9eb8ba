"""How strict can the accuracy requirement get before no plan survives?

    python demos/whatif_sweep.py
"""
from sisplan import IRI, PlanRequest, load_model, topological_order
from sisplan.planner import sweep_values, whatif

EX = "http://example.org/rtm#"


def main() -> None:
    model = load_model("rtm_infiltration.ttl")
    fmt = model.prefixes.format
    request = PlanRequest(IRI(EX + "LocalFillTime"),
                          frozenset(IRI(EX + n) for n in ("Geometry", "ResinViscosity", "ShellFEModel")))
    rows, warnings = whatif(model, request, IRI(EX + "ResultAccuracy"), sweep_values(0.5, 1.0, 0.05))
    for w in warnings:
        print("warning:", w)
    print("threshold  feasible  best plan")
    for row in rows:
        best = "-"
        if row.top is not None:
            best = " -> ".join(fmt(n.simulation) for n in topological_order(row.top.dag))
        print(f"{row.threshold:<9g}  {row.feasible_count:<8}  {best}")


if __name__ == "__main__":
    main()
