"""Published experimental parameter sets, in units of the cavity decay rate."""
from __future__ import annotations

from dataclasses import dataclass

from .channel import PulseSchedule, SystemParams

__all__ = ["ExperimentPreset", "PRESETS", "get_preset"]


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    params: SystemParams
    tau1_max: float
    tau2_max: float
    tau_s: float

    def schedule(self, tau1=None, tau2=None) -> PulseSchedule:
        """Schedule at the given durations, defaulting to the longest allowed."""
        return PulseSchedule(self.tau1_max if tau1 is None else tau1,
                             self.tau2_max if tau2 is None else tau2,
                             self.tau_s)


# omega_m is only quoted for the first electromechanical set; the others
# reuse it (it only enters the non-RWA level).
_OMEGA_M = 50.0


def _electro(name, description, g, tau_max, tau_s, gamma, n, eta):
    params = SystemParams(kappa_e=eta, gamma=gamma, omega_m=_OMEGA_M,
                          g0_sqrtN1=g, g0_sqrtN2=g, n0=n, nth=n)
    return ExperimentPreset(name, description, params, tau_max, tau_max, tau_s)


def _opto(name, eta):
    params = SystemParams(kappa_e=eta, gamma=7e-6, omega_m=_OMEGA_M,
                          g0_sqrtN1=0.04, g0_sqrtN2=0.04, n0=1.0, nth=1.0)
    return ExperimentPreset(name, f"optomechanical crystal, eta={eta}", params,
                            3e3, 2e3, 100.0)


PRESETS = {
    p.name: p
    for p in (
        _electro("electro_palomaki", "electromechanics, Palomaki et al. 2013",
                 g=0.25, tau_max=100.0, tau_s=3.0, gamma=2e-4, n=20.0, eta=0.83),
        _electro("electro_ockeloen", "electromechanics, Ockeloen-Korppi et al. 2016",
                 g=0.07, tau_max=1e3, tau_s=100.0, gamma=2e-5, n=18.0, eta=0.91),
        _opto("opto_riedinger_eta50", 0.5),
        _opto("opto_riedinger_eta25", 0.25),
    )
}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
