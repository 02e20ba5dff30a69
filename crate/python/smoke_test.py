"""Smoke test for the Python bindings.

Run after `pip install --no-build-isolation ./crates/python`:

    python python/smoke_test.py
"""

import math
import os
import tempfile

import regime_mitigator as rm


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    model = rm.Model.load(os.path.join(here, "..", "models", "case_study.json"))
    assert model.k == 4 and model.m == 6
    assert model.hash == rm.Model.case_study().hash
    for a in range(model.m):
        for row in model.transition(a):
            assert abs(sum(row) - 1.0) < 1e-12
        for row in model.generator(a):
            assert abs(sum(row)) < 1e-9

    mdp = rm.solve_mdp(model)
    assert mdp.converged
    assert mdp.labels == ["NoAction", "DwSensorA", "ReidentPlant", "BiasCorrect"], mdp.labels
    print(f"MDP: {mdp.iterations} iterations, V* = {[round(v, 3) for v in mdp.values]}")

    b = rm.belief_step(model, [0.25] * 4, 0, 0.5, 1)
    assert abs(sum(b) - 1.0) < 1e-12 and all(p >= 0 for p in b)

    sol = rm.solve_pomdp(model, seed=42)
    for s in range(model.k):
        corner = [1.0 if i == s else 0.0 for i in range(model.k)]
        action, value = sol.evaluate(corner)
        assert action == mdp.policy[s]
        assert value <= mdp.values[s] + 1e-6
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "alpha.json")
        sol.save(path)
        assert rm.PomdpSolution.load(path).n_vectors == sol.n_vectors
    print(f"POMDP: {sol.n_vectors} alpha vectors after {sol.iterations} sweeps")

    a = rm.simulate(model, "pomdp", 200, 20.0, seed=1, solution=sol)
    b = rm.simulate(model, "pomdp", 200, 20.0, seed=1, solution=sol)
    assert a.returns == b.returns

    table = rm.compare(model, 200, 20.0, seed=42, learners=False)
    means = {p.policy: p.mean_return for p in table}
    assert means["MDP"] > means["POMDP"] > means["NoAction"], means
    by_name = {p.policy: p for p in table}
    p, exact = rm.wilcoxon(by_name["MDP"].returns, by_name["NoAction"].returns)
    d = rm.cliffs_delta(by_name["MDP"].returns, by_name["NoAction"].returns)
    assert p < 1e-3 and not exact and 0.0 < d <= 1.0
    assert math.isclose(d, -rm.cliffs_delta(by_name["NoAction"].returns, by_name["MDP"].returns))
    for row in table:
        print(f"{row.policy:<14} {row.mean_return:8.2f} nominal {row.fraction_nominal:.3f}")

    try:
        rm.Model.load("does/not/exist.json")
    except OSError:
        pass
    else:
        raise AssertionError("missing model must raise OSError")
    print("smoke test passed")


if __name__ == "__main__":
    main()
