"""
MWU schedule.

Faithful mode instantiates the analysis constants with equalities:

    h       = ceil(log2 phi) + 1
    D_l     = eps / log2 phi            D_u = d_u_factor * ln n
    D_T     = D_u / D_l
    gamma   = eps * D_l / (2h)          K   = D_u * D_T
    eta     = gamma / (100 K^2)         R   = ceil(ln(2n^2) / (100 eta gamma))
    chi     = gamma / (100 R K)         delta = 1 / (100 R)
    s       = ceil(c_s * n * (h D_u / (eps D_l))^2 / delta^2)

Practical mode keeps gamma and K, divides R and s by the relaxation
factors (then caps them), and sets eta to the Hedge rate for the payoff
width D_u (1+eps)^3 over R rounds. Every changed constant is logged once.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from ..core.defaults import SolverDefaultsManager
from ..core.exceptions import InputError
from ..embedding.quadtree import tree_depth

logger = logging.getLogger(__name__)

MODES = ("faithful", "practical")


@dataclass(frozen=True)
class MwuParams:
    mode: str
    n: int
    phi: float
    eps: float
    h: int
    d_l: float
    d_u: float
    d_t: float
    gamma_gap: float
    K: float
    eta: float
    R: int
    chi: float
    delta: float
    s: int
    deviations: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return asdict(self)


def _check(n: int, phi: float, eps: float, mode: str):
    if not (0 < eps < 0.5):
        raise InputError(f"eps must be in (0, 0.5), got {eps}")
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    if phi < 1:
        raise InputError(f"phi must be at least 1, got {phi}")
    if mode not in MODES:
        raise InputError(f"Unknown mode '{mode}'. Available: {list(MODES)}")


def compute_params(n: int, phi: float, eps: float, mode: str = "faithful",
                   d_l: Optional[float] = None, d_u: Optional[float] = None,
                   defaults: Optional[SolverDefaultsManager] = None,
                   relax: Optional[float] = None) -> MwuParams:
    """
    Instantiate the MWU schedule.

    Args:
        n: Points per side
        phi: Aspect-ratio bound of the instance
        eps: Accuracy in (0, 1/2)
        mode: 'faithful' or 'practical'
        d_l, d_u: Distortion bounds; the w.h.p. formulas are used when omitted
        defaults: Solver defaults (the shipped YAML when omitted)
        relax: Overrides both practical relaxation factors

    Returns:
        MwuParams
    """
    _check(n, phi, eps, mode)
    defaults = defaults or SolverDefaultsManager()

    h = tree_depth(phi)
    log_phi = max(1.0, math.log2(phi))
    if d_l is None:
        d_l = eps / log_phi
    if d_u is None:
        d_u = defaults.get('mwu', 'd_u_factor') * math.log(max(n, 2))
    if d_l <= 0 or d_u <= 0:
        raise InputError(f"Distortion bounds must be positive, got D_l={d_l}, D_u={d_u}")

    d_t = d_u / d_l
    gamma = eps * d_l / (2 * h)
    K = d_u * d_t
    log_constraints = math.log(2.0 * max(n, 1) ** 2)

    eta = gamma / (100.0 * K * K)
    R = max(1, math.ceil(log_constraints / (100.0 * eta * gamma)))
    chi = gamma / (100.0 * R * K)
    delta = 1.0 / (100.0 * R)
    s = max(1, math.ceil(defaults.get('mwu', 'c_s') * n * (h * d_u / (eps * d_l)) ** 2 / delta ** 2))

    deviations: List[str] = []
    if mode == "practical":
        practical = defaults.section('practical')
        relax_rounds = relax if relax is not None else practical['relax_rounds']
        relax_samples = relax if relax is not None else practical['relax_samples']

        R_p = min(int(practical['max_rounds']), max(1, math.ceil(R / relax_rounds)))
        s_p = min(int(practical['max_samples']), max(1, math.ceil(s / relax_samples)))
        width = d_u * (1.0 + eps) ** 3
        eta_p = math.sqrt(log_constraints / R_p) / width
        chi_p = max(float(practical['chi_floor']), chi)
        delta_p = 1.0 / (100.0 * R_p)

        for name, before, after in (("R", R, R_p), ("s", s, s_p), ("eta", eta, eta_p),
                                    ("chi", chi, chi_p), ("delta", delta, delta_p)):
            if before != after:
                deviations.append(f"{name}: {before:.6g} -> {after:.6g}")
        R, s, eta, chi, delta = R_p, s_p, eta_p, chi_p, delta_p
        if deviations:
            logger.warning(f"Practical schedule deviates from the analysis constants: {'; '.join(deviations)}")

    return MwuParams(
        mode=mode, n=n, phi=float(phi), eps=eps, h=h,
        d_l=float(d_l), d_u=float(d_u), d_t=float(d_t),
        gamma_gap=gamma, K=K, eta=eta, R=int(R), chi=chi, delta=delta, s=int(s),
        deviations=deviations,
    )
