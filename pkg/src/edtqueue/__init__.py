"""Extended delivery time laws and secondary-user M/G/1 delay on an on/off primary channel.

The secondary packet needs ``ttr`` seconds of airtime and may only transmit
while the primary user is idle.  Subpackages:

* :mod:`edtqueue.channel` on/off channel and sensing strategies
* :mod:`edtqueue.edt` fixed transmission time laws
* :mod:`edtqueue.random_ttr` Rayleigh-random transmission time laws
* :mod:`edtqueue.service` service moments and the two-type M/G/1 solution
* :mod:`edtqueue.sim` discrete-event oracle
* :mod:`edtqueue.validation` analytic vs simulation checks
"""

from .channel import ChannelParams, SensingStrategy, beta, p_on_given_off, stationary_on_prob
from .edt import (
    DiscreteEdtPmf,
    MixedDistribution,
    edt_pdf_continuous,
    edt_pmf_periodic,
    waiting_dist_poff,
    waiting_pdf_pon,
    waiting_pmf_poff_periodic,
    waiting_pmf_pon_periodic,
)
from .errors import DomainError, EdtError, InstabilityError, NumericFailure, SimulationError
from .random_ttr import (
    RandomTtrLaw,
    RayleighTtrSpec,
    edt_pdf_oneshot,
    edt_pdf_random_ttr_continuous,
    edt_pdf_random_ttr_periodic,
    fixed_ttr_from_capacity,
    ttr_pdf_rayleigh,
)
from .service import (
    MomentPair,
    QueueSolution,
    mg1_conventional,
    mg1_solve,
    p_on_type2,
    service_moments,
    solve_scenario,
    type2_moments,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "SensingStrategy",
    "beta",
    "p_on_given_off",
    "stationary_on_prob",
    "DiscreteEdtPmf",
    "MixedDistribution",
    "edt_pdf_continuous",
    "edt_pmf_periodic",
    "waiting_dist_poff",
    "waiting_pdf_pon",
    "waiting_pmf_poff_periodic",
    "waiting_pmf_pon_periodic",
    "DomainError",
    "EdtError",
    "InstabilityError",
    "NumericFailure",
    "SimulationError",
    "RandomTtrLaw",
    "RayleighTtrSpec",
    "edt_pdf_oneshot",
    "edt_pdf_random_ttr_continuous",
    "edt_pdf_random_ttr_periodic",
    "fixed_ttr_from_capacity",
    "ttr_pdf_rayleigh",
    "MomentPair",
    "QueueSolution",
    "mg1_conventional",
    "mg1_solve",
    "p_on_type2",
    "service_moments",
    "solve_scenario",
    "type2_moments",
]
