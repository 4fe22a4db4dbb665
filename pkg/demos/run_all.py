"""Run every registered scenario and print a verdict table."""
from geomtomo.scenarios import REGISTRY, make_scenario, run_scenario

for name in REGISTRY:
    r = run_scenario(make_scenario(name))
    bad = [c.name for c in r.checks if not c.passed]
    print(f"{name:<26} {r.verdict:<5} {r.runtime:6.1f}s  {', '.join(bad)}")
