"""Width experiment harness: six jointree variants per random instance,
per-seed CSV rows with per-cell mean/std rows, theorem-bound audits, and
the exhaustive tightness search on small DAGs.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations

from .elimination import EliminationOrder, eliminate, exact_treewidth, minfill_order, n_world_order, twin_order
from .jointree import classical_separators, jointree_from_order, make_twin_jointree, twin_separators_direct
from .model import Dag, ModelError, network_to_dict
from .randgen import Rng, gen_rnet, gen_rnet2, parameterize, to_rscm
from .thinning import replicate, thin, thinned_twin_separators
from .worlds import generalized_n_world, moral_graph, twin_name, world_name

METHODS = ("base_mf", "twin_alg1", "twin_mf", "base_mf_rls", "twin_thm3", "twin_mf_rls")

GENERATORS = ("rNET", "rNET2", "rSCM", "rSCM2")


@dataclass(frozen=True)
class SuiteConfig:
    generator: str
    n_values: tuple[int, ...]
    param_values: tuple[int, ...]  # max parents (rNET*) or max degree (rNET2*)
    reps: int = 50
    chain_bound: int = 10
    seed: int = 0
    workers: int = 1
    timings: bool = False

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ModelError(f"unknown generator {self.generator!r}")
        if self.reps < 1:
            raise ModelError("reps must be >= 1")


def _cell_seed(base_seed: int, n: int, param: int, rep: int) -> int:
    s = base_seed & (1 << 64) - 1
    for part in (n, param, rep):
        s = (s * 1000003 + part + 1) & (1 << 64) - 1
    return s


def generate_dag(generator: str, n: int, param: int, seed: int) -> Dag:
    rng = Rng(seed)
    if generator == "rNET":
        return gen_rnet(n, param, rng)
    if generator == "rNET2":
        return gen_rnet2(n, param, rng)
    if generator == "rSCM":
        return to_rscm(gen_rnet(n, param, rng))
    if generator == "rSCM2":
        return to_rscm(gen_rnet2(n, param, rng))
    raise ModelError(f"unknown generator {generator!r}")


def twin_dag(base: Dag) -> Dag:
    roots = set(base.roots())
    nodes = list(base.nodes)
    parents = dict(base.parents)
    for v in base.nodes:
        if v in roots:
            continue
        d = twin_name(v)
        nodes.append(d)
        parents[d] = tuple(p if p in roots else twin_name(p) for p in base.parents[v])
    return Dag(tuple(nodes), parents)


def instance_widths(dag: Dag, chain_bound: int) -> dict[str, tuple[int, float]]:
    """The six (width, normalized width) measurements for one base DAG."""
    out = {}
    base_jt = jointree_from_order(dag, minfill_order(moral_graph(dag)))
    base_seps = classical_separators(base_jt)
    out["base_mf"] = (base_seps.width, base_seps.normalized_width)

    twin_jt = make_twin_jointree(base_jt, dag)
    alg1 = twin_separators_direct(base_seps, twin_jt)
    out["twin_alg1"] = (alg1.width, alg1.normalized_width)

    tdag = twin_dag(dag)
    tw_jt = jointree_from_order(tdag, minfill_order(moral_graph(tdag)))
    tw_seps = classical_separators(tw_jt)
    out["twin_mf"] = (tw_seps.width, tw_seps.normalized_width)

    rep = replicate(base_jt, dag, chain_bound)
    thinned = thin(rep, dag.internals())
    out["base_mf_rls"] = (thinned.thinned.width, thinned.thinned.normalized_width)

    twin_rep = make_twin_jointree(rep, dag)
    thm3 = thinned_twin_separators(thinned, twin_rep)
    out["twin_thm3"] = (thm3.thinned.width, thm3.thinned.normalized_width)

    tw_rep = replicate(tw_jt, tdag, chain_bound)
    tw_thinned = thin(tw_rep, tdag.internals())
    out["twin_mf_rls"] = (tw_thinned.thinned.width, tw_thinned.thinned.normalized_width)
    return out


@dataclass(frozen=True)
class ResultRow:
    generator: str
    n: int
    param: int
    rep: int
    seed: int
    widths: dict[str, tuple[int, float]]
    elapsed_ms: float


def _run_task(args) -> ResultRow:
    generator, n, param, rep, seed, chain_bound = args
    t0 = time.perf_counter()
    dag = generate_dag(generator, n, param, seed)
    widths = instance_widths(dag, chain_bound)
    return ResultRow(generator, n, param, rep, seed, widths, (time.perf_counter() - t0) * 1e3)


def run_suite(cfg: SuiteConfig, out_path) -> list[ResultRow]:
    """One CSV row per (cell, seed) plus per-cell mean/std rows. Output is
    byte-identical for any worker count (rows are sorted, timings are
    opt-in)."""
    tasks = [
        (cfg.generator, n, p, rep, _cell_seed(cfg.seed, n, p, rep), cfg.chain_bound)
        for n in cfg.n_values
        for p in cfg.param_values
        for rep in range(cfg.reps)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        rows = [_run_task(t) for t in tasks]
    rows.sort(key=lambda r: (r.n, r.param, r.rep))

    header = ["generator", "n", "param", "rep", "seed", "row_type"]
    for m in METHODS:
        header += [f"{m}_wd", f"{m}_nwd"]
    if cfg.timings:
        header.append("elapsed_ms")

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            rec = [r.generator, r.n, r.param, r.rep, r.seed, "seed"]
            for m in METHODS:
                wd, nwd = r.widths[m]
                rec += [wd, f"{nwd:.4f}"]
            if cfg.timings:
                rec.append(f"{r.elapsed_ms:.1f}")
            w.writerow(rec)
        for n in cfg.n_values:
            for p in cfg.param_values:
                cell = [r for r in rows if r.n == n and r.param == p]
                for stat, fn in (("mean", statistics.fmean), ("std", _std)):
                    rec = [cfg.generator, n, p, "", "", stat]
                    for m in METHODS:
                        rec.append(f"{fn([r.widths[m][0] for r in cell]):.4f}")
                        rec.append(f"{fn([r.widths[m][1] for r in cell]):.4f}")
                    if cfg.timings:
                        rec.append("")
                    w.writerow(rec)
    return rows


def _std(xs) -> float:
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


# ---------------------------------------------------------------- audits

def _order_width(dag: Dag, order: EliminationOrder) -> int:
    return eliminate(moral_graph(dag), order).width


def audit_instance(dag: Dag, chain_bound: int, rng: Rng) -> list[dict]:
    """Check the four lifted-construction bounds on one base DAG; returns
    violation records (empty = all bounds hold)."""
    violations = []
    order = minfill_order(moral_graph(dag))
    w = _order_width(dag, order)
    tdag = twin_dag(dag)
    wt = _order_width(tdag, twin_order(order, dag))

    def flag(bound, observed, limit):
        violations.append(
            {"bound": bound, "observed": observed, "limit": limit,
             "dag": {"nodes": list(dag.nodes), "parents": {v: list(ps) for v, ps in dag.parents.items()}}}
        )

    if wt > 2 * w + 1:
        flag("cor1: twin order width <= 2w+1", wt, 2 * w + 1)

    base_jt = jointree_from_order(dag, order)
    base_seps = classical_separators(base_jt)
    twin_jt = make_twin_jointree(base_jt, dag)
    alg1 = twin_separators_direct(base_seps, twin_jt)
    if alg1.width > 2 * base_seps.width + 1:
        flag("cor3: twin jointree width <= 2w+1", alg1.width, 2 * base_seps.width + 1)
    if len(twin_jt.nodes) > 2 * len(base_jt.nodes):
        flag("cor3: twin jointree nodes <= 2n", len(twin_jt.nodes), 2 * len(base_jt.nodes))

    rep = replicate(base_jt, dag, chain_bound)
    thinned = thin(rep, dag.internals())
    twin_rep = make_twin_jointree(rep, dag)
    thm3 = thinned_twin_separators(thinned, twin_rep)
    if thm3.thinned.width > 2 * thinned.thinned.width + 1:
        flag("cor4: thinned twin width <= 2w+1", thm3.thinned.width, 2 * thinned.thinned.width + 1)

    roots = list(dag.roots())
    for n_worlds in (2, 3, 5):
        for mode in ("all", "subset"):
            if mode == "all":
                shared = roots
            else:
                shared = [r for r in roots if rng.below(2)]
            nw_order = n_world_order(order, dag, shared, n_worlds)
            ndag = _n_world_dag(dag, shared, n_worlds)
            wn = _order_width(ndag, nw_order)
            if wn > n_worlds * (w + 1) - 1:
                flag(f"thm4: N-world order width <= N(w+1)-1 (N={n_worlds}, {mode})",
                     wn, n_worlds * (w + 1) - 1)
    return violations


def _n_world_dag(dag: Dag, shared, n_worlds: int) -> Dag:
    shared = set(shared)

    def name(v, j):
        return v if v in shared else world_name(v, j)

    nodes, parents = [], {}
    for v in dag.nodes:
        for j in range(1, n_worlds + 1) if v not in shared else (1,):
            nodes.append(name(v, j))
            parents[name(v, j)] = tuple(name(p, j) for p in dag.parents[v])
    return Dag(tuple(nodes), parents)


def audit_generalized(dag: Dag, n_worlds: int, rng: Rng) -> list[dict]:
    """Appendix-D bound on a generalized N-world network with random
    duplicated subset and random admissible cross edges."""
    dup = [v for v in dag.nodes if rng.below(2)]
    if not dup:
        dup = [dag.nodes[rng.below(len(dag.nodes))]]
    cross = []
    for v in dup:
        if rng.below(2):
            i = 1 + rng.below(n_worlds - 1) if n_worlds > 1 else 1
            j = i + 1 + rng.below(n_worlds - i) if i < n_worlds else i
            if i < j:
                cross.append((v, i, j))
    gdag = generalized_n_world(dag, dup, n_worlds, cross)
    order = minfill_order(moral_graph(dag))
    w = _order_width(dag, order)
    seq = []
    for v in order.sequence:
        if v in set(dup):
            seq.extend(world_name(v, j) for j in range(1, n_worlds + 1))
        else:
            seq.append(v)
    wn = _order_width(gdag, EliminationOrder(tuple(seq)))
    if wn > n_worlds * (w + 1) - 1:
        return [{
            "bound": f"appendix-d: generalized N-world width <= N(w+1)-1 (N={n_worlds})",
            "observed": wn, "limit": n_worlds * (w + 1) - 1,
            "dag": {"nodes": list(dag.nodes), "parents": {v: list(ps) for v, ps in dag.parents.items()}},
            "duplicated": sorted(dup), "cross_edges": cross,
        }]
    return []


def run_bound_audit(instances: int = 1000, seed: int = 0, chain_bound: int = 10) -> dict:
    """Spread `instances` across the four generators and small cells;
    report all bound violations (expected: none)."""
    cells = [(g, n, p) for g in GENERATORS for n in (10, 20, 30) for p in (2, 3, 5)]
    violations = []
    for k in range(instances):
        g, n, p = cells[k % len(cells)]
        s = _cell_seed(seed, n, p, k)
        dag = generate_dag(g, n, p, s)
        rng = Rng(s ^ 0xA5A5A5A5)
        violations += audit_instance(dag, chain_bound, rng)
        violations += audit_generalized(dag, 2 + rng.below(4), rng)
    return {"instances": instances, "violations": violations}


# ------------------------------------------------------------- tightness

def _connected_dags(max_nodes: int):
    """All connected DAGs up to iso-of-labeling over a fixed topological
    order, by edge mask enumeration."""
    for n in range(2, max_nodes + 1):
        names = tuple(chr(ord("A") + i) for i in range(n))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for mask in range(1 << len(pairs)):
            parents = {v: () for v in names}
            adj = [0] * n
            for k, (i, j) in enumerate(pairs):
                if mask >> k & 1:
                    parents[names[j]] = parents[names[j]] + (names[i],)
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
            # connectivity over the skeleton
            seen = 1
            stack = [0]
            while stack:
                v = stack.pop()
                m = adj[v] & ~seen
                while m:
                    low = m & -m
                    seen |= low
                    stack.append(low.bit_length() - 1)
                    m &= ~low
            if seen != (1 << n) - 1:
                continue
            yield Dag(names, parents)


def find_order_tightness(max_nodes: int = 6) -> dict | None:
    """Search for a DAG and order with width 2 whose twin order has width
    5 (the Cor 1 bound met with equality)."""
    for dag in _connected_dags(max_nodes):
        g = moral_graph(dag)
        if eliminate(g, minfill_order(g)).width > 2:
            continue
        tdag = twin_dag(dag)
        tg = moral_graph(tdag)
        for perm in permutations(dag.nodes):
            order = EliminationOrder(perm)
            if eliminate(g, order).width != 2:
                continue
            if eliminate(tg, twin_order(order, dag)).width == 5:
                return {
                    "parents": {v: list(ps) for v, ps in dag.parents.items()},
                    "order": list(perm),
                    "base_width": 2,
                    "twin_width": 5,
                }
    return None


def find_treewidth_tightness(max_nodes: int = 6) -> dict | None:
    """Search for a base network with exact treewidth 2 whose twin
    network has exact treewidth 4."""
    for dag in _connected_dags(max_nodes):
        g = moral_graph(dag)
        if exact_treewidth(g) != 2:
            continue
        tdag = twin_dag(dag)
        if exact_treewidth(moral_graph(tdag)) == 4:
            return {
                "parents": {v: list(ps) for v, ps in dag.parents.items()},
                "base_treewidth": 2,
                "twin_treewidth": 4,
            }
    return None
