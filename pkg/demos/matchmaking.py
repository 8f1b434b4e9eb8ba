"""Walk through the bundled infiltration model: which simulations can deliver
LocalFillTime, how good are they, and what do they need?

    python demos/matchmaking.py
"""
from sisplan import (IRI, influences_on, inputs_of, load_model, quality_criteria_of, run_query,
                     simulations_for_output)
from sisplan.report import rows_table

EX = "http://example.org/rtm#"


def main() -> None:
    model = load_model("rtm_infiltration.ttl")
    fmt = model.prefixes.format
    wanted = IRI(EX + "LocalFillTime")

    matches = simulations_for_output(model, wanted)
    print(f"{len(matches)} simulations can produce {fmt(wanted)}:")
    for m in matches:
        print(f"  {fmt(m.simulation)} (process {fmt(m.process)}, capability {fmt(m.capability)})")

    for m in matches:
        sim = m.simulation
        print(f"\n{fmt(sim)}")
        for crit in quality_criteria_of(model, sim):
            print(f"  quality  {fmt(crit.kind)} = {crit.value}")
        for row in inputs_of(model, sim):
            print(f"  input    {fmt(row.parameter)}")
        for inf in influences_on(model, sim):
            print(f"  weight   {fmt(inf.source)} -> {inf.value}")

    # the same question, asked as a query over the raw graph
    query = """SELECT ?sim WHERE {
        ?pr VDI3633:hasResultsData ex:LocalFillTime .
        ?pr CSS:requiresCapability ?cap .
        ?sim CSS:providesCapability ?cap . }"""
    table = run_query(model.graph, query)
    print()
    print(rows_table(table.header, table.tuples(), model.prefixes), end="")


if __name__ == "__main__":
    main()
