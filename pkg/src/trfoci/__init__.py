"""B1-robust adiabatic inversion pulse design (HSC, C-FOCI, TR-FOCI)."""
from ._backend import BACKEND
from .bloch import (InversionProfile, distort_gradient, rotation_step, sideband_scan,
                    simulate_mz, simulate_profile)
from .evaluate import (IdealProfile, WipaFitness, ideal_profile, integrated_ipa, ipa,
                       ipa_curve, wipa)
from .fixtures import FIXTURES, load_fixture
from .model import (HardwareLimits, PhysicalConstants, PulseKind, PulseParams,
                    PulseWaveforms, SequenceConfig, validate_params)
from .pulsegen import calibrate_gradient, design_pulse, generate_envelopes, initial_gradient

__version__ = "0.1.0"
