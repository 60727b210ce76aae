"""Compare the three Markov-tree architectures and MPE against the global oracle on random trees.

    python3 scripts/soundness_sweep.py --trees 200 --seed 0
"""
import argparse

import numpy as np

from fcf.frames import is_commutative_pair
from fcf.generators import random_mv_tree, random_partition_tree
from fcf.markov import MessageStore, hugin, lauritzen_spiegelhalter, shenoy_shafer
from fcf.maxprod import mpe
from fcf.oracle import global_combine, oracle_marginal, oracle_mpe


def rel_dev(a, b) -> float:
    return float(np.max(np.abs(a.values - b.values) / np.maximum(np.abs(b.values), 1e-300), initial=0.0))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-nodes", type=int, default=8)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    worst = {"ss": 0.0, "ls": 0.0, "hugin": 0.0}
    counts = {"commutative": 0, "mpe_mismatch": 0, "bad_message_count": 0}
    for i in range(args.trees):
        n = int(rng.integers(2, args.max_nodes + 1))
        case = random_partition_tree(rng, n_nodes=n) if i % 2 else random_mv_tree(rng, n_factors=n)
        tree = case.tree
        g = global_combine([tree.factors[v] for v in tree.nodes])
        store = MessageStore()
        ss = shenoy_shafer(tree, store=store)
        counts["bad_message_count"] += len(store) != 2 * (len(tree.nodes) - 1)
        for v in tree.nodes:
            worst["ss"] = max(worst["ss"], rel_dev(ss[v], oracle_marginal(g, tree.labels[v])))
        if all(is_commutative_pair(tree.labels[a], tree.labels[b]) for a, b in tree.edges):
            counts["commutative"] += 1
            ls, hg = lauritzen_spiegelhalter(tree), hugin(tree)
            for v in tree.nodes:
                worst["ls"] = max(worst["ls"], rel_dev(ls[v], ss[v]))
                worst["hugin"] = max(worst["hugin"], rel_dev(hg.nodes[v], ss[v]))
        res, (value, cfg) = mpe(tree), oracle_mpe(g)
        counts["mpe_mismatch"] += not (np.isclose(res.value, value, rtol=1e-9) and res.configurations == cfg)

    print(f"trees={args.trees} seed={args.seed}")
    for k, v in worst.items():
        print(f"max_rel_dev_{k}={v:.3e}")
    for k, v in counts.items():
        print(f"{k}={v}")


if __name__ == "__main__":
    main()
