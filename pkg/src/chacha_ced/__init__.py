"""ChaCha Quarterround with parity-based concurrent error detection and fault campaigns."""

__version__ = "0.1.0"

from .arx_core import AddResult, Word, add_traced, parity, rotl, xor  # noqa: E402
from .quarterround import FaultSpec, QrTrace, Signal, qr_output_parity, quarterround  # noqa: E402
from .ced import (  # noqa: E402
    CheckVerdict, InputParities, Scheme, check_classic, check_gbpp, gbpp, predict_outputs_lemma,
    predict_qr_parity,
)

__all__ = [
    "AddResult", "Word", "add_traced", "parity", "rotl", "xor",
    "FaultSpec", "QrTrace", "Signal", "qr_output_parity", "quarterround",
    "CheckVerdict", "InputParities", "Scheme", "check_classic", "check_gbpp", "gbpp",
    "predict_outputs_lemma", "predict_qr_parity",
]
