"""Numeric checks of the conditional calculus, shared by unit and acceptance tests."""
import numpy as np

from fcf.conditioning import conditional, project, support_indicator
from fcf.frames import join, meet
from fcf.potentials import ProbPotential, pp_combine
from oracles import coarsen


def dev(a, b) -> float:
    """Max relative deviation; infinite when frames differ."""
    if a.frame != b.frame:
        return float("inf")
    scale = np.maximum(np.maximum(np.abs(a.values), np.abs(b.values)), 1.0)
    return float(np.max(np.abs(a.values - b.values) / scale, initial=0.0))


def conditional_identities(p: ProbPotential, rng: np.random.Generator) -> dict[str, float]:
    """Continuation and the six basic conditional properties on random coarsenings of d(p)."""
    th = coarsen(p.frame, rng)
    lam = coarsen(th, rng)
    mid = coarsen(th, rng)
    low = coarsen(mid, rng)
    th1 = join(lam, coarsen(th, rng))
    l1, l2 = coarsen(th, rng), coarsen(th, rng)
    base = coarsen(meet(l1, l2), rng)
    p_lam = project(p, lam)
    p2 = ProbPotential(lam, rng.uniform(0.5, 2.0, lam.size) * (rng.random(lam.size) > 0.2))

    c = conditional(p, th, lam)
    f_lam = support_indicator(p_lam)
    return {
        "continuation": dev(project(p, th), pp_combine(c, p_lam)),
        # support of the conditional lies under the support of the marginal
        "item1": dev(pp_combine(f_lam, c), c),
        "item2": dev(project(c, lam), f_lam),
        # chain rule, conditioning on the coarser of the two intermediate frames
        "item3": dev(
            conditional(p, th, low),
            pp_combine(conditional(p, th, mid), conditional(p, mid, low)),
        ),
        "item4": dev(project(c, th1), conditional(p, th1, lam)),
        "item5": dev(
            project(pp_combine(conditional(p, th, l2), conditional(p, l2, base)), l1),
            conditional(p, l1, base),
        ),
        "item6": dev(
            conditional(pp_combine(project(p, th), p2), th, lam),
            pp_combine(conditional(p, th, lam), support_indicator(p2)),
        ),
    }
