"""LSF-based reference schemes with idealized knowledge of every AP's LSF.
"""
from cfhandoff.handoff.engine import HandoffDecision, initial_serving, count_handoffs
from cfhandoff.utils import top_k


def run_lsf_time(trip, cfg, seed=0):
    """Connects to the B_con strongest APs at every cycle."""
    serving = initial_serving(trip, cfg.b_con)
    decisions = []
    for t in range(1, trip.n_cycles + 1):
        selected = top_k(trip.lsf[t], cfg.b_con)
        decisions.append(HandoffDecision(cycle=t, serving_set=selected,
                                         n_ho=count_handoffs(selected, serving),
                                         triggered=True))
        serving = selected
    return decisions


def run_lsf_threshold(trip, cfg, seed=0):
    """Re-selects the B_con strongest APs only after a cycle whose rate fell
    below ``cfg.r_threshold``.
    """
    serving = initial_serving(trip, cfg.b_con)
    rate = trip.rate(serving, 0)
    decisions = []
    for t in range(1, trip.n_cycles + 1):
        triggered = rate < cfg.r_threshold
        selected = top_k(trip.lsf[t], cfg.b_con) if triggered else serving
        decisions.append(HandoffDecision(cycle=t, serving_set=selected,
                                         n_ho=count_handoffs(selected, serving),
                                         triggered=triggered))
        serving = selected
        rate = trip.rate(serving, t)
    return decisions
