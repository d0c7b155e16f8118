"""Command-line surface.

Subcommands: gen, twin, nworld, mutilate, order, jointree, twin-jointree,
thin, infer, bench, audit, treewidth. Exit codes: 0 success, 1 usage or
input error, 2 violated invariant / failed audit.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import SuiteConfig, find_order_tightness, find_treewidth_tightness, run_bound_audit, run_suite
from .elimination import EliminationOrder, eliminate, exact_treewidth, minfill_order, n_world_order, twin_order
from .inference import CounterfactualQuery, counterfactual
from .jointree import classical_separators, jointree_from_order, make_twin_jointree, twin_separators_direct
from .model import Evidence, ModelError, load_network, network_to_dict, validate
from .randgen import Rng, gen_rnet, gen_rnet2, parameterize, to_rscm
from .thinning import replicate, thin, thinned_twin_separators
from .worlds import moral_graph, mutilate, n_world_network, twin_network


def _emit(doc, out_path):
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    scm = load_network(path)
    problems = validate(scm)
    if problems:
        raise ModelError("; ".join(problems))
    return scm


def _evidence(spec: str) -> Evidence:
    out = {}
    if spec:
        for part in spec.split(","):
            v, _, s = part.partition("=")
            if not _ or not s.lstrip("-").isdigit():
                raise ModelError(f"bad assignment {part!r}; use VAR=STATE_INDEX")
            out[v.strip()] = int(s)
    return Evidence(out)


def _separators_doc(jt, seps):
    return {
        "nodes": list(jt.nodes),
        "edges": [list(e) for e in jt.edges],
        "hosts": {c: list(hs) for c, hs in sorted(jt.hosts.items())},
        "separators": {f"{a}|{b}": sorted(s) for (a, b), s in sorted(seps.separators.items())},
        "clusters": {v: sorted(c) for v, c in sorted(seps.clusters.items())},
        "width": seps.width,
        "normalized_width": round(seps.normalized_width, 6),
    }


def _base_jointree(scm):
    order = minfill_order(moral_graph(scm.dag))
    return jointree_from_order(scm.dag, order)


def cmd_gen(a):
    rng = Rng(a.seed)
    if a.generator == "rNET":
        dag = gen_rnet(a.n, a.param, rng)
    elif a.generator == "rNET2":
        dag = gen_rnet2(a.n, a.param, rng)
    elif a.generator == "rSCM":
        dag = to_rscm(gen_rnet(a.n, a.param, rng))
    else:
        dag = to_rscm(gen_rnet2(a.n, a.param, rng))
    scm = parameterize(dag, rng, a.cardinality)
    _emit(network_to_dict(scm), a.out)


def cmd_twin(a):
    net, wmap = twin_network(_load(a.net))
    _emit(network_to_dict(net, wmap), a.out)


def cmd_nworld(a):
    scm = _load(a.net)
    shared = scm.dag.roots() if a.shared == "all" else tuple(a.shared.split(","))
    net, wmap = n_world_network(scm, shared, a.worlds)
    _emit(network_to_dict(net, wmap), a.out)


def cmd_mutilate(a):
    scm = _load(a.net)
    _emit(network_to_dict(mutilate(scm, _evidence(a.do))), a.out)


def cmd_order(a):
    scm = _load(a.net)
    order = minfill_order(moral_graph(scm.dag))
    doc = {"sequence": list(order.sequence),
           "width": eliminate(moral_graph(scm.dag), order).width}
    if a.lift == "twin":
        lifted = twin_order(order, scm.dag)
        tnet, _ = twin_network(scm)
        doc["lifted"] = {"sequence": list(lifted.sequence),
                         "width": eliminate(moral_graph(tnet.dag), lifted).width}
    elif a.lift == "nworld":
        shared = scm.dag.roots() if a.shared == "all" else tuple(a.shared.split(","))
        lifted = n_world_order(order, scm.dag, shared, a.worlds)
        net, _ = n_world_network(scm, shared, a.worlds)
        doc["lifted"] = {"sequence": list(lifted.sequence),
                         "width": eliminate(moral_graph(net.dag), lifted).width}
    _emit(doc, a.out)


def cmd_jointree(a):
    scm = _load(a.net)
    jt = _base_jointree(scm)
    _emit(_separators_doc(jt, classical_separators(jt)), a.out)


def cmd_twin_jointree(a):
    scm = _load(a.net)
    jt = _base_jointree(scm)
    twin_jt = make_twin_jointree(jt, scm.dag)
    doc = _separators_doc(twin_jt, twin_separators_direct(classical_separators(jt), twin_jt))
    doc["edge_class"] = {f"{x}|{y}": c for (x, y), c in sorted(twin_jt.edge_class.items())}
    _emit(doc, a.out)


def cmd_thin(a):
    scm = _load(a.net)
    jt = _base_jointree(scm)
    rep = replicate(jt, scm.dag, a.chain_bound)
    thinned = thin(rep, scm.dag.internals())
    doc = _separators_doc(rep, thinned.thinned)
    doc["thinned_separators"] = doc.pop("separators")
    doc["thinning_log"] = [
        {"edge": list(r["edge"]), "variable": r["variable"], "rule": r["rule"],
         "witness": list(r["witness"]) if isinstance(r["witness"], tuple) else r["witness"]}
        for r in thinned.log
    ]
    if a.twin:
        twin_jt = make_twin_jointree(rep, scm.dag)
        lifted = thinned_twin_separators(thinned, twin_jt)
        doc["twin"] = _separators_doc(twin_jt, lifted.thinned)
    _emit(doc, a.out)


def cmd_infer(a):
    scm = _load(a.net)
    with open(a.query, "r", encoding="utf-8") as fh:
        q = json.load(fh)
    worlds = int(q.get("worlds", 1))
    shared = q.get("shared_roots", "all")
    shared = frozenset(scm.dag.roots()) if shared == "all" else frozenset(shared)
    query = CounterfactualQuery(
        world_count=worlds,
        shared_roots=shared,
        observations=tuple(Evidence(o) for o in q.get("observations", [{}] * worlds)),
        interventions=tuple(Evidence(o) for o in q.get("interventions", [{}] * worlds)),
        target=tuple((int(w), v, int(s)) for w, v, s in q["target"]),
        mode=q.get("mode", "conditional"),
    )
    res = counterfactual(scm, query, engine=a.engine)
    _emit({"value": res.value, "evidence_probability": res.evidence_probability,
           "method": res.method}, a.out)


def cmd_bench(a):
    cfg = SuiteConfig(
        generator=a.generator,
        n_values=tuple(int(x) for x in a.n.split(",")),
        param_values=tuple(int(x) for x in a.param.split(",")),
        reps=a.reps,
        chain_bound=a.chain_bound,
        seed=a.seed,
        workers=a.workers,
        timings=a.timings,
    )
    run_suite(cfg, a.out or "bench.csv")


def cmd_audit(a):
    report = run_bound_audit(a.instances, seed=a.seed, chain_bound=a.chain_bound)
    if a.tightness:
        report["tightness"] = {
            "order_width": find_order_tightness(a.tightness),
            "treewidth": find_treewidth_tightness(a.tightness),
        }
    _emit(report, a.out)
    if report["violations"]:
        return 2
    return 0


def cmd_treewidth(a):
    scm = _load(a.net)
    g = moral_graph(scm.dag)
    if a.exact:
        doc = {"treewidth": exact_treewidth(g, a.node_limit), "exact": True}
    else:
        doc = {"treewidth": eliminate(g, minfill_order(g)).width, "exact": False}
    _emit(doc, a.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctwin", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=("json", "csv"), default=None)

    p = sub.add_parser("gen", help="generate a random fully specified SCM")
    p.add_argument("--generator", choices=("rNET", "rNET2", "rSCM", "rSCM2"), default="rSCM")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--param", type=int, required=True)
    p.add_argument("--cardinality", type=int, default=2)
    common(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("twin", help="twin network of a base network")
    p.add_argument("--net", required=True)
    common(p)
    p.set_defaults(fn=cmd_twin)

    p = sub.add_parser("nworld", help="N-world network sharing a root subset")
    p.add_argument("--net", required=True)
    p.add_argument("--worlds", type=int, required=True)
    p.add_argument("--shared", default="all")
    common(p)
    p.set_defaults(fn=cmd_nworld)

    p = sub.add_parser("mutilate", help="cut incoming edges of intervened variables")
    p.add_argument("--net", required=True)
    p.add_argument("--do", required=True, help="comma-separated VAR=STATE list")
    common(p)
    p.set_defaults(fn=cmd_mutilate)

    p = sub.add_parser("order", help="minfill order, optionally lifted")
    p.add_argument("--net", required=True)
    p.add_argument("--lift", choices=("twin", "nworld"), default=None)
    p.add_argument("--worlds", type=int, default=2)
    p.add_argument("--shared", default="all")
    common(p)
    p.set_defaults(fn=cmd_order)

    p = sub.add_parser("jointree", help="jointree from the minfill order")
    p.add_argument("--net", required=True)
    common(p)
    p.set_defaults(fn=cmd_jointree)

    p = sub.add_parser("twin-jointree", help="twin jointree with lifted separators")
    p.add_argument("--net", required=True)
    common(p)
    p.set_defaults(fn=cmd_twin_jointree)

    p = sub.add_parser("thin", help="replicate and thin a jointree")
    p.add_argument("--net", required=True)
    p.add_argument("--chain-bound", type=int, default=10)
    p.add_argument("--twin", action="store_true", help="also lift to thinned twin separators")
    common(p)
    p.set_defaults(fn=cmd_thin)

    p = sub.add_parser("infer", help="evaluate a counterfactual query")
    p.add_argument("--net", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--engine", choices=("ve", "jointree", "jointree-thinned", "oracle"), default="ve")
    common(p)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("bench", help="run the width experiment suite (CSV)")
    p.add_argument("--generator", choices=("rNET", "rNET2", "rSCM", "rSCM2"), required=True)
    p.add_argument("--n", required=True, help="comma-separated node counts")
    p.add_argument("--param", required=True, help="comma-separated p/d values")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--chain-bound", type=int, default=10)
    p.add_argument("--timings", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("audit", help="theorem-bound audit over random instances")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--chain-bound", type=int, default=10)
    p.add_argument("--tightness", type=int, default=0,
                   help="also run the tightness searches up to this node count")
    common(p)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("treewidth", help="treewidth (exact or minfill upper bound)")
    p.add_argument("--net", required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--node-limit", type=int, default=12)
    common(p)
    p.set_defaults(fn=cmd_treewidth)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        rc = args.fn(args)
    except (ModelError, OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
