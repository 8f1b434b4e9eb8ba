"""Plan LocalFillTime from geometry, resin viscosity and the shell model, then
watch the ranking move as accuracy requirements and time weights change.

The extension file adds simulation times, so the more accurate infiltration
model also turns out to be the slower one.

    python demos/tradeoff.py
"""
from sisplan import IRI, PlanRequest, load_model, plan, topological_order

EX = "http://example.org/rtm#"
ACC, TIME = IRI(EX + "ResultAccuracy"), IRI(EX + "SimulationTime")


def show(title, model, request):
    fmt = model.prefixes.format
    report = plan(model, request)
    print(f"== {title}")
    for i, rp in enumerate(report.ranked, 1):
        order = " -> ".join(fmt(n.simulation) for n in topological_order(rp.dag))
        card = rp.score
        verdict = "ok" if rp.feasible else "infeasible: " + "; ".join(
            f"{fmt(v.criterion)} {v.value:g} at {fmt(v.node[1])} needs {v.bound} {v.threshold:g}"
            for v in rp.violations)
        print(f"  {i}. {order}")
        print(f"     accuracy {card.effective_accuracy:.3f}  time {card.total_time_like:g}  "
              f"score {card.weighted_score:.3f}  {verdict}")
    print()


def main() -> None:
    model = load_model("rtm_infiltration.ttl", "rtm_extension.ttl")
    goal = IRI(EX + "LocalFillTime")
    known = frozenset(IRI(EX + n) for n in ("Geometry", "ResinViscosity", "ShellFEModel"))

    show("no preferences: ties go to the smaller, alphabetically first plan",
         model, PlanRequest(goal, known))
    show("accuracy matters", model, PlanRequest(goal, known, weights={ACC: 1.0}))
    show("accuracy must reach 0.8", model, PlanRequest(goal, known, requirements={ACC: 0.8}))
    show("time matters more than accuracy",
         model, PlanRequest(goal, known, weights={ACC: 1.0, TIME: 2.0}))
    show("the whole chain must finish within 5 time units",
         model, PlanRequest(goal, known, weights={ACC: 1.0}, limits={TIME: 5.0}))

    # a requirement on the goal turns into a looser one upstream
    report = plan(model, PlanRequest(goal, known, requirements={ACC: 0.8}))
    fmt = model.prefixes.format
    best = report.ranked[0]
    print("== thresholds handed down the chain for accuracy >= 0.8")
    for (key, kind), thr in sorted(best.score.propagated_requirements.items(),
                                   key=lambda kv: -kv[1]):
        print(f"  {fmt(key[1])}: {fmt(kind)} >= {thr:g}")


if __name__ == "__main__":
    main()
