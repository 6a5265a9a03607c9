"""Numerical checks of decoherence and collapse under unitary information transfer."""

from . import cli, models, observables, qla, states, transfer
from .observables import Observable, SiteSystem
from .states import SuperpositionSpec
from .transfer import Instrument, PointerStats, TransferMap, VerificationRecord

__version__ = "0.1.0"
