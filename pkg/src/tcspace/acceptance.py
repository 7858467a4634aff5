"""Library-level acceptance checks, shared by the test suite and ``tcs reproduce``.

Every check returns a CriterionResult whose ``details`` are JSON-ready and
deterministic for a given seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linear_sum_assignment

from .basis import (
    _PairScorer,
    alpha_recursion,
    basis_distortion,
    dual_coefficients,
    molecular_tree,
    pair_distortion,
    series_dual_coefficients,
    tree_basis,
)
from .hyperbolic import build_hyperbolic, grid_instance, homogeneity_constant, two_point_instance, singleton_instance, verify_hyperbolic_bound
from .laakso import build_laakso, check_edge_lengths, check_norm_bound, laakso_basis, laakso_order, laakso_vertex_count, verify_laakso_bound
from .metric import ONE, ZERO, fmt
from .samples import five_point_basis, five_point_space, random_basis, random_metric_space, random_tree_space
from .transport import TransportProblem, optimal_cost
from .tree_prob import (
    _chains_between,
    check_compatible,
    check_independent,
    edge_marginals,
    effective_charge,
    expected_tree_distance,
    product_probability,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.name}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "details": self.details}


def _rng(seed: int, criterion: int) -> random.Random:
    return random.Random(f"{seed}:{criterion}")


def random_corpus(seed: int, count: int = 200, sizes=range(3, 8)):
    """(space, basis) pairs: N uniform in ``sizes``, random geodesic metric, random order and rows."""
    rng = _rng(seed, 3)
    out = []
    for _ in range(count):
        N = rng.choice(list(sizes))
        space = random_metric_space(rng, N + 1)
        out.append((space, random_basis(rng, space)))
    return out


def laakso_bound(ks=(1, 2, 3), full_pairs: bool = True, workers: int = 1) -> CriterionResult:
    rows, ok = [], True
    for k in ks:
        rep = verify_laakso_bound(k, full_pairs=full_pairs or k < 3, workers=workers)
        value = mpq(rep["distortion"])
        good = ONE <= value <= 8 * k
        ok &= good
        rows.append({"k": k, "distortion": rep["distortion"], "bound": 8 * k, "witness": rep["witness"],
                     "full_pairs": rep["full_pairs"], "pairs_scanned": rep["pairs_scanned"], "ok": good})
    return CriterionResult(1, "Laakso basis distortion <= 8k", ok, {"levels": rows})


def laakso_structure(ks=(1, 2, 3)) -> CriterionResult:
    rows, ok = [], True
    expected = {1: 6, 2: 30, 3: 174}
    for k in ks:
        graph, space = build_laakso(k)
        basis = laakso_basis(graph, laakso_order(graph, space))
        count_ok = len(graph.labels) == expected.get(k, laakso_vertex_count(k))
        lengths = check_edge_lengths(graph, space)
        norms = check_norm_bound(graph, basis, space)
        good = count_ok and not lengths and not norms
        ok &= good
        rows.append({"k": k, "vertices": len(graph.labels), "edge_length_failures": len(lengths),
                     "norm_bound_failures": len(norms), "ok": good})
    return CriterionResult(2, "Laakso vertex counts, edge lengths, basis norms", ok, {"levels": rows})


def effective_charge_equality(corpus) -> CriterionResult:
    pairs = mism = incompatible = dependent = 0
    first_failure = None
    for b_idx, (space, basis) in enumerate(corpus):
        pi = product_probability(basis)
        scorer = _PairScorer(basis, space)
        order = basis.order
        for i, j in space.pairs():
            pairs += 1
            a, b = order.position(i), order.position(j)
            p, _ = effective_charge(basis, a, b)
            lhs = expected_tree_distance(p, space, a, b)
            rhs = scorer.weighted_sum(i, j)
            bad = []
            if lhs != rhs:
                mism += 1
                bad.append("expectation")
            if not check_compatible(p, pi):
                incompatible += 1
                bad.append("compatible")
            if not check_independent(p, a, b):
                dependent += 1
                bad.append("independent")
            if bad and first_failure is None:
                first_failure = {"basis": b_idx, "pair": [space.points[i], space.points[j]], "failed": bad}
    ok = not (mism or incompatible or dependent) and len(corpus) >= 200
    return CriterionResult(3, "effective charge: expectation equality, compatibility, independence", ok, {
        "bases": len(corpus), "pairs": pairs, "expectation_mismatches": mism,
        "incompatible": incompatible, "not_independent": dependent, "first_failure": first_failure,
    })


def _chain_product(basis, chain):
    w = ONE
    for a, b in zip(chain, chain[1:]):
        w *= basis.rows[a].get(b, ZERO)
    return w


def product_identities(corpus) -> CriterionResult:
    total_bad = marg_bad = chain_bad = checked = 0
    for space, basis in corpus:
        pi = product_probability(basis)
        if pi.total() != 1:
            total_bad += 1
        marg = edge_marginals(pi)
        N = basis.N
        for n in range(1, N + 1):
            for i in range(n):
                if marg.get((n, i), ZERO) != basis.rows[n].get(i, ZERO):
                    marg_bad += 1
        for z in range(1, N + 1):
            alpha = dual_coefficients(basis, TransportProblem.delta(space, space.points[basis.order.point(z)]))
            ancestor = [ZERO] * (N + 1)  # π(n lies on the root path of z)
            for parent, w in pi.support.items():
                v = z
                while v > 0:
                    ancestor[v] += w
                    v = parent[v]
            for n in range(1, N + 1):
                checked += 1
                chain_sum = sum((_chain_product(basis, c) for c in _chains_between(z, n)), ZERO) if z >= n else ZERO
                if not alpha[n] == chain_sum == ancestor[n]:
                    chain_bad += 1
    ok = not (total_bad or marg_bad or chain_bad)
    return CriterionResult(4, "product distribution: total mass, edge marginals, chain sums", ok, {
        "bases": len(corpus), "total_mass_failures": total_bad, "edge_marginal_failures": marg_bad,
        "chain_sum_checks": checked, "chain_sum_failures": chain_bad,
    })


def recursion_invariants(corpus, seed: int = 0) -> CriterionResult:
    rng = _rng(seed, 5)
    bad = {"zero_above_x": 0, "one_at_x": 0, "nonnegative_above_y": 0, "sum_at_root": 0, "upper_bound": 0}
    checked = 0
    for space, basis in corpus:
        N = basis.N
        for y in range(0, N + 1):
            for x in range(y + 1, N + 1):
                checked += 1
                mu = [ZERO] * (N + 1)
                mu[x], mu[y] = ONE, -ONE
                alpha = alpha_recursion(basis, mu)
                if any(alpha[n] for n in range(x + 1, N + 1)):
                    bad["zero_above_x"] += 1
                if alpha[x] != 1:
                    bad["one_at_x"] += 1
                if any(alpha[n] < 0 for n in range(y + 1, N + 1)):
                    bad["nonnegative_above_y"] += 1
                if alpha[0] != 0:
                    bad["sum_at_root"] += 1
        v = [mpq(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(N + 1)]
        alpha = alpha_recursion(basis, v)
        if alpha[0] != sum(v, ZERO):
            bad["sum_at_root"] += 1
        if any(alpha[n] > v[n] + sum((abs(v[m]) for m in range(n + 1, N + 1)), ZERO) for n in range(N + 1)):
            bad["upper_bound"] += 1
    ok = not any(bad.values())
    return CriterionResult(5, "dual recursion invariants", ok, {"molecules": checked, "failures": bad})


def series_agreement(corpus, seed: int = 0) -> CriterionResult:
    rng = _rng(seed, 6)
    bad = 0
    for space, basis in corpus:
        mass = {p: mpq(rng.randint(-6, 6), rng.randint(1, 3)) for p in space.points}
        mu = TransportProblem.from_mass(space, mass)
        if dual_coefficients(basis, mu).values != series_dual_coefficients(basis, mu).values:
            bad += 1
    return CriterionResult(6, "triangular solve equals matrix series", bad == 0, {"instances": len(corpus), "mismatches": bad})


def five_point_reproduction() -> CriterionResult:
    space = five_point_space()
    basis = five_point_basis(space)
    alpha = dual_coefficients(basis, TransportProblem.molecule(space, "4", "3"))
    ratio = pair_distortion(basis, space, "4", "3")
    p, _ = effective_charge(basis, "4", "3")
    eff = expected_tree_distance(p, space, "4", "3")
    pi = product_probability(basis)
    prod = expected_tree_distance(pi, space, "4", "3")
    pi_indep = check_independent(pi, "4", "3")
    probs = sorted(p.support.values())
    checks = {
        "alpha": list(alpha.coeffs) == [0, 0, -1, 1],
        "pair_distortion": ratio == 2,
        "effective_two_trees": len(probs) == 2 and probs == [mpq(1, 2), mpq(1, 2)],
        "effective_expectation": eff == 2,
        "product_expectation": prod == 3,
        "product_dominates": (prod >= eff) if pi_indep else True,
    }
    return CriterionResult(7, "worked five-point example", all(checks.values()), {
        "alpha": [fmt(a) for a in alpha.coeffs], "pair_distortion": fmt(ratio),
        "effective_trees": {",".join(map(str, t)): fmt(w) for t, w in sorted(p.support.items())},
        "effective_expectation": fmt(eff), "product_expectation": fmt(prod),
        "product_independent": pi_indep, "product_comparison_asserted": pi_indep, "checks": checks,
    })


def tree_characterisation(seed: int = 0, count: int = 50) -> CriterionResult:
    rng = _rng(seed, 8)
    bad_distortion = bad_roundtrip = 0
    for _ in range(count):
        space, edges = random_tree_space(rng, rng.randint(2, 11))
        basis = tree_basis(space, edges)
        if basis_distortion(basis, space).value != 1:
            bad_distortion += 1
        tree = molecular_tree(basis)
        got = {frozenset((basis.order.label(c), basis.order.label(p))) for c, p in tree.edges()}
        if got != {frozenset(e) for e in edges}:
            bad_roundtrip += 1
    ok = not (bad_distortion or bad_roundtrip)
    return CriterionResult(8, "weighted trees: molecular basis has distortion 1", ok, {
        "trees": count, "distortion_failures": bad_distortion, "roundtrip_failures": bad_roundtrip,
    })


HYPERBOLIC_INSTANCES = {
    "singleton": singleton_instance,
    "two_point": two_point_instance,
    "grid4x4_l1": grid_instance,
}


def hyperbolic_bound(lam=2, r=mpq(1, 8), k: int = 1) -> CriterionResult:
    rows, ok = {}, True
    for name, make in HYPERBOLIC_INSTANCES.items():
        rep = verify_hyperbolic_bound(build_hyperbolic(make(), lam, r, k))
        c = rep["checks"]
        good = (c["distortion_bound"] and c["radial_ball_identity"] and c["edge_measure_clique"]
                and c["edge_measure_total_variation"])
        ok &= good
        rows[name] = {"distortion": rep["distortion"], "bound": rep["bound"],
                      "C_used": rep["homogeneity"]["C_used"], "checks": c, "ok": good}
    return CriterionResult(9, "hyperbolic approximations: distortion <= 1 + 2C", ok, {"instances": rows})


def doubling_consistency(lam=2, r=mpq(1, 8), k: int = 1) -> CriterionResult:
    approx = build_hyperbolic(grid_instance(), lam, r, k)
    h = homogeneity_constant(approx)
    D = h.D_est
    rhs = D * float(approx.lam) ** math.log2(D)
    ok = float(h.C_used) <= rhs + 1e-9
    return CriterionResult(10, "homogeneity constant within doubling estimate", ok, {
        "C_used": fmt(h.C_used), "D_est": D, "D_lambda_power": rhs,
    })


def _random_integer_problem(rng, space, max_support=4, max_mass=5):
    while True:
        k = rng.randint(2, min(max_support, space.size))
        pts = rng.sample(range(space.size), k)
        masses = [rng.choice([m for m in range(-max_mass, max_mass + 1) if m]) for _ in pts[:-1]]
        last = -sum(masses)
        if last and abs(last) <= max_mass:
            return dict(zip(pts, masses + [last]))


def assignment_oracle(space, masses: dict):
    """Exact optimal cost by splitting integer masses into units and solving an assignment."""
    src = [p for p, m in masses.items() if m > 0 for _ in range(m)]
    dst = [p for p, m in masses.items() if m < 0 for _ in range(-m)]
    scale = math.lcm(*(int(space.dist[i][j].denominator) for i in range(space.size) for j in range(space.size)))
    cost = np.array([[int(space.dist[p][q] * scale) for q in dst] for p in src], dtype=np.int64)
    rows, cols = linear_sum_assignment(cost)
    return sum((space.dist[src[a]][dst[b]] for a, b in zip(rows, cols)), ZERO)


def transport_oracle(seed: int = 0, count: int = 500) -> CriterionResult:
    rng = _rng(seed, 11)
    bad, first = 0, None
    for t in range(count):
        space = random_metric_space(rng, rng.randint(2, 8))
        masses = _random_integer_problem(rng, space)
        mu = TransportProblem.from_mass(space, {space.points[p]: m for p, m in masses.items()})
        got, want = optimal_cost(space, mu), assignment_oracle(space, masses)
        if got != want:
            bad += 1
            first = first or {"instance": t, "solver": fmt(got), "oracle": fmt(want)}
    return CriterionResult(11, "optimal cost matches assignment oracle", bad == 0, {
        "instances": count, "mismatches": bad, "first_mismatch": first,
    })


def run_all(seed: int = 0, quick: bool = False, workers: int = 1, progress=None) -> list:
    """All eleven criteria in order. ``quick`` scans only edges for Laakso k = 3."""
    corpus = random_corpus(seed)
    steps = [
        lambda: laakso_bound(full_pairs=not quick, workers=workers),
        laakso_structure,
        lambda: effective_charge_equality(corpus),
        lambda: product_identities(corpus),
        lambda: recursion_invariants(corpus, seed),
        lambda: series_agreement(corpus, seed),
        five_point_reproduction,
        lambda: tree_characterisation(seed),
        hyperbolic_bound,
        doubling_consistency,
        lambda: transport_oracle(seed),
    ]
    out = []
    for step in steps:
        result = step()
        if progress:
            progress(result)
        out.append(result)
    return out
